#include "softprior/qtable_io.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "softprior/text.hpp"

namespace softprior {

namespace {
constexpr std::string_view kMagic = "# softprior qtable v1";
}

void save_qtable(std::ostream& out, const QTable& table, const StateSpace& space) {
  const auto states = table.states();
  out << kMagic << '\n' << "rows " << states.size() << '\n';
  for (StateId s : states) {
    out << key_to_string(space.key(s));
    for (double v : table[s]) out << ' ' << format_double(v);
    out << '\n';
  }
}

QTable load_qtable(std::istream& in, StateSpace& space) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw std::runtime_error("qtable: missing header");
  if (!std::getline(in, line) || !line.starts_with("rows ")) throw std::runtime_error("qtable: missing row count");
  const auto n = parse_int<std::size_t>(std::string_view(line).substr(5));
  QTable table(space.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("qtable: truncated");
    const auto parts = split(line, ' ');
    if (parts.size() != 1 + kNumActions) throw std::runtime_error("qtable: bad record on line " + std::to_string(i + 3));
    const StateId s = space.intern(key_from_string(parts[0]));
    auto& row = table.at(s);
    for (int a = 0; a < kNumActions; ++a) row[a] = parse_double(parts[1 + a]);
  }
  return table;
}

}  // namespace softprior
