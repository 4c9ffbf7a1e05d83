#pragma once

#include <iosfwd>

#include "softprior/param_table.hpp"

namespace softprior {

// Expert Q-table record file, line-delimited text:
//
//   # softprior qtable v1
//   rows <n>
//   <81-char observation key> <q_up> <q_right> <q_down> <q_left>    (n lines)
//
// Keys use the world-file alphabet plus 'x' for out-of-bounds. Values are
// written in shortest round-trip form, so save/load is exact.
void save_qtable(std::ostream& out, const QTable& table, const StateSpace& space);

/// Interns every key into `space` (loading into a space built from the same
/// world reproduces the original ids).
QTable load_qtable(std::istream& in, StateSpace& space);

}  // namespace softprior
