#include "softprior/env.hpp"

#include <cmath>
#include <stdexcept>

namespace softprior {

Position moved(Position p, Action a) {
  switch (a) {
    case Action::Up: return {p.row - 1, p.col};
    case Action::Right: return {p.row, p.col + 1};
    case Action::Down: return {p.row + 1, p.col};
    case Action::Left: return {p.row, p.col - 1};
  }
  return p;
}

Cell Cell::objective(int value) {
  for (int v : kRewardValues)
    if (v == value) return {CellKind::Reward, value, is_terminal_reward(value)};
  throw std::invalid_argument("objective reward must be one of -10,-5,-1,1,5,10");
}

std::array<double, 8> ObjectProbs::as_array() const {
  return {wall, empty, reward[0], reward[1], reward[2], reward[3], reward[4], reward[5]};
}

void ObjectProbs::validate() const {
  double total = 0.0;
  for (double p : as_array()) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("object probabilities must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("object probabilities must sum to 1");
}

GridWorld::GridWorld(int rows, int cols, std::vector<Cell> cells, Position start,
                     double termination_prob, double transition_noise, std::uint64_t seed)
    : rows_(rows),
      cols_(cols),
      cells_(std::move(cells)),
      start_(start),
      termination_prob_(termination_prob),
      transition_noise_(transition_noise),
      seed_(seed) {
  if (rows <= 0 || cols <= 0 || cells_.size() != static_cast<std::size_t>(rows * cols))
    throw std::invalid_argument("grid dimensions do not match cell count");
  if (!in_bounds(start)) throw std::invalid_argument("start position outside grid");
  if (at(start).kind == CellKind::Wall || at(start).terminal)
    throw std::invalid_argument("start cell must be open and non-terminal");
  if (!(termination_prob >= 0.0 && termination_prob <= 1.0) ||
      !(transition_noise >= 0.0 && transition_noise <= 1.0))
    throw std::invalid_argument("termination and noise must be probabilities");
}

GridWorld GridWorld::from_rows(std::span<const std::string> rows, double termination_prob,
                               double transition_noise) {
  if (rows.empty()) throw std::invalid_argument("empty grid");
  const int n_rows = static_cast<int>(rows.size());
  const int n_cols = static_cast<int>(rows.front().size());
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(n_rows * n_cols));
  std::optional<Position> start;
  for (int r = 0; r < n_rows; ++r) {
    if (static_cast<int>(rows[r].size()) != n_cols) throw std::invalid_argument("ragged grid rows");
    for (int c = 0; c < n_cols; ++c) {
      const char ch = rows[r][c];
      if (ch == '#') {
        cells.push_back(Cell::wall());
      } else if (ch == '.') {
        cells.push_back(Cell::empty());
      } else if (ch == 'S') {
        start = Position{r, c};
        cells.push_back(Cell::empty());
      } else if (ch >= 'A' && ch <= 'F') {
        cells.push_back(Cell::objective(kRewardValues[static_cast<std::size_t>(ch - 'A')]));
      } else {
        throw std::invalid_argument(std::string("unknown grid character '") + ch + "'");
      }
    }
  }
  if (!start) start = Position{n_rows / 2, n_cols / 2};
  return GridWorld(n_rows, n_cols, std::move(cells), *start, termination_prob, transition_noise);
}

GridWorld GridWorld::with_dynamics(double termination_prob, double transition_noise) const {
  return GridWorld(rows_, cols_, cells_, start_, termination_prob, transition_noise, seed_);
}

namespace {

bool has_open_neighbour(const std::vector<Cell>& cells, int size, Position p) {
  for (int a = 0; a < kNumActions; ++a) {
    const Position q = moved(p, static_cast<Action>(a));
    if (q.row < 0 || q.row >= size || q.col < 0 || q.col >= size) continue;
    if (cells[static_cast<std::size_t>(q.row * size + q.col)].kind != CellKind::Wall) return true;
  }
  return false;
}

}  // namespace

GridWorld sample_gridworld(std::uint64_t seed, const ObjectProbs& probs, double termination_prob,
                           double transition_noise) {
  probs.validate();
  const auto weights = probs.as_array();
  constexpr int size = kDefaultGridSize;
  const Position center{size / 2, size / 2};

  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt), "resample"));
    std::vector<Cell> cells;
    cells.reserve(size * size);
    for (int i = 0; i < size * size; ++i) {
      const std::size_t k = rng.categorical(weights);
      if (k == 0) cells.push_back(Cell::wall());
      else if (k == 1) cells.push_back(Cell::empty());
      else cells.push_back(Cell::objective(kRewardValues[k - 2]));
    }
    cells[static_cast<std::size_t>(center.row * size + center.col)] = Cell::empty();
    if (has_open_neighbour(cells, size, center))
      return GridWorld(size, size, std::move(cells), center, termination_prob, transition_noise, seed);
  }
  throw std::runtime_error("sample_gridworld: start cell enclosed by walls after 100 attempts");
}

// ---------------------------------------------------------------------------

std::uint8_t cell_code(const Cell& cell) {
  switch (cell.kind) {
    case CellKind::Wall: return static_cast<std::uint8_t>(CellCode::Wall);
    case CellKind::Empty: return static_cast<std::uint8_t>(CellCode::Empty);
    case CellKind::Reward:
      for (std::size_t i = 0; i < kRewardValues.size(); ++i)
        if (kRewardValues[i] == cell.reward) return static_cast<std::uint8_t>(3 + i);
  }
  throw std::logic_error("cell_code: invalid cell");
}

namespace {
constexpr char kCodeChars[] = "x#.ABCDEF";
}

char code_char(std::uint8_t code) {
  if (code > 8) throw std::out_of_range("cell code");
  return kCodeChars[code];
}

std::optional<std::uint8_t> char_code(char c) {
  for (std::uint8_t i = 0; i < 9; ++i)
    if (kCodeChars[i] == c) return i;
  return std::nullopt;
}

std::size_t ObsKeyHash::operator()(const ObsKey& key) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : key) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

std::string key_to_string(const ObsKey& key) {
  std::string s(key.size(), '?');
  for (std::size_t i = 0; i < key.size(); ++i) s[i] = code_char(key[i]);
  return s;
}

ObsKey key_from_string(std::string_view text) {
  if (text.size() != static_cast<std::size_t>(kViewCells))
    throw std::invalid_argument("observation key must have 81 characters");
  ObsKey key{};
  for (std::size_t i = 0; i < key.size(); ++i) {
    const auto code = char_code(text[i]);
    if (!code) throw std::invalid_argument("observation key has invalid character");
    key[i] = *code;
  }
  return key;
}

Observation observe(const GridWorld& world, Position position) {
  Observation obs;
  for (int dr = -kViewRadius; dr <= kViewRadius; ++dr) {
    for (int dc = -kViewRadius; dc <= kViewRadius; ++dc) {
      const Position q{position.row + dr, position.col + dc};
      const std::size_t slot = static_cast<std::size_t>((dr + kViewRadius) * kViewSize + dc + kViewRadius);
      obs.window[slot] = world.in_bounds(q) ? cell_code(world.at(q))
                                            : static_cast<std::uint8_t>(CellCode::OutOfBounds);
    }
  }
  return obs;
}

StepOutcome step(const GridWorld& world, Position position, Action action, Rng& rng) {
  const bool noisy = rng.uniform() < world.transition_noise();
  const auto replacement = static_cast<Action>(rng.uniform_int(kNumActions));
  const bool killed = rng.uniform() < world.termination_prob();

  StepOutcome out;
  out.executed = noisy ? replacement : action;
  const Position target = moved(position, out.executed);
  if (!world.in_bounds(target) || world.at(target).kind == CellKind::Wall) {
    out.next_position = position;
  } else {
    out.next_position = target;
    const Cell& cell = world.at(target);
    out.reward = static_cast<double>(cell.reward);
    if (cell.terminal) out.done_cause = DoneCause::Terminal;
  }
  if (out.done_cause == DoneCause::None && killed) out.done_cause = DoneCause::RandomTermination;
  out.done = out.done_cause != DoneCause::None;
  return out;
}

// ---------------------------------------------------------------------------

StateSpace::StateSpace(const GridWorld& world) : cols_(world.cols()) {
  position_ids_.assign(world.cells().size(), kNoState);
  for (std::size_t i = 0; i < world.cells().size(); ++i) {
    if (world.cells()[i].kind == CellKind::Wall) continue;
    position_ids_[i] = intern(observe(world, world.position_of(i)).key());
  }
}

StateId StateSpace::intern(const ObsKey& key) {
  const auto [it, inserted] = index_.try_emplace(key, static_cast<StateId>(keys_.size()));
  if (inserted) keys_.push_back(key);
  return it->second;
}

std::optional<StateId> StateSpace::find(const ObsKey& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace softprior
