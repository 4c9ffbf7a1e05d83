#include "softprior/world_io.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "softprior/text.hpp"

namespace softprior {

namespace {

constexpr std::string_view kMagic = "# softprior world v1";
constexpr std::string_view kLegend = "legend A=-10 B=-5 C=-1 D=+1 E=+5 F=+10";

char cell_char(const Cell& cell) {
  switch (cell.kind) {
    case CellKind::Wall: return '#';
    case CellKind::Empty: return '.';
    case CellKind::Reward: return code_char(cell_code(cell));
  }
  return '?';
}

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("world file: " + what); }

std::string next_line(std::istream& in, std::string_view expect_prefix) {
  std::string line;
  if (!std::getline(in, line)) fail("unexpected end of input before '" + std::string(expect_prefix) + "'");
  if (!line.starts_with(expect_prefix)) fail("expected '" + std::string(expect_prefix) + "', got '" + line + "'");
  return line.substr(expect_prefix.size());
}

}  // namespace

void write_world(std::ostream& out, const GridWorld& world, const std::optional<ObjectProbs>& probs) {
  out << kMagic << '\n';
  out << "seed " << world.seed() << '\n';
  out << "size " << world.rows() << ' ' << world.cols() << '\n';
  out << "start " << world.initial_position().row << ' ' << world.initial_position().col << '\n';
  out << "termination " << format_double(world.termination_prob()) << '\n';
  out << "noise " << format_double(world.transition_noise()) << '\n';
  if (probs) {
    out << "probs";
    for (double p : probs->as_array()) out << ' ' << format_double(p);
    out << '\n';
  }
  out << kLegend << '\n' << "grid\n";
  for (int r = 0; r < world.rows(); ++r) {
    for (int c = 0; c < world.cols(); ++c) out << cell_char(world.at({r, c}));
    out << '\n';
  }
}

WorldFile read_world(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) fail("missing header");
  const auto seed = parse_int<std::uint64_t>(next_line(in, "seed "));

  std::istringstream size_in(next_line(in, "size "));
  int rows = 0, cols = 0;
  if (!(size_in >> rows >> cols) || rows <= 0 || cols <= 0) fail("bad size");
  std::istringstream start_in(next_line(in, "start "));
  Position start;
  if (!(start_in >> start.row >> start.col)) fail("bad start");
  const double termination = parse_double(next_line(in, "termination "));
  const double noise = parse_double(next_line(in, "noise "));

  std::optional<ObjectProbs> probs;
  if (!std::getline(in, line)) fail("truncated");
  if (line.starts_with("probs ")) {
    const auto parts = split(std::string_view(line).substr(6), ' ');
    if (parts.size() != 8) fail("probs needs 8 entries");
    ObjectProbs p;
    p.wall = parse_double(parts[0]);
    p.empty = parse_double(parts[1]);
    for (std::size_t i = 0; i < 6; ++i) p.reward[i] = parse_double(parts[2 + i]);
    probs = p;
    if (!std::getline(in, line)) fail("truncated");
  }
  if (line != kLegend) fail("unsupported legend '" + line + "'");
  if (!std::getline(in, line) || line != "grid") fail("missing grid marker");

  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r) {
    if (!std::getline(in, line) || static_cast<int>(line.size()) != cols) fail("bad grid row " + std::to_string(r));
    for (char ch : line) {
      if (ch == '#') cells.push_back(Cell::wall());
      else if (ch == '.') cells.push_back(Cell::empty());
      else if (ch >= 'A' && ch <= 'F') cells.push_back(Cell::objective(kRewardValues[static_cast<std::size_t>(ch - 'A')]));
      else fail(std::string("bad grid character '") + ch + "'");
    }
  }
  return {GridWorld(rows, cols, std::move(cells), start, termination, noise, seed), probs};
}

}  // namespace softprior
