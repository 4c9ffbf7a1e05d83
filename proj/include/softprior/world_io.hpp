#pragma once

#include <iosfwd>
#include <optional>

#include "softprior/env.hpp"

namespace softprior {

// Plain-text world dump:
//
//   # softprior world v1
//   seed 42
//   size 20 20
//   start 10 10
//   termination 0.01
//   noise 0.1
//   probs 0.15 0.75 r0 r1 r2 r3 r4 r5      (optional; wall, empty, then -10..+10)
//   legend A=-10 B=-5 C=-1 D=+1 E=+5 F=+10
//   grid
//   <rows lines of '#', '.', 'A'..'F'>
struct WorldFile {
  GridWorld world;
  std::optional<ObjectProbs> probs;
};

void write_world(std::ostream& out, const GridWorld& world, const std::optional<ObjectProbs>& probs = {});
WorldFile read_world(std::istream& in);

}  // namespace softprior
