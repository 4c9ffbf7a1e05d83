#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "softprior/rng.hpp"

namespace softprior {

inline constexpr int kNumActions = 4;

// Index order is fixed: 0=up, 1=right, 2=down, 3=left.
enum class Action : std::uint8_t { Up = 0, Right = 1, Down = 2, Left = 3 };

struct Position {
  int row = 0;
  int col = 0;
  auto operator<=>(const Position&) const = default;
};

Position moved(Position p, Action a);

enum class CellKind : std::uint8_t { Wall, Empty, Reward };

inline constexpr std::array<int, 6> kRewardValues{-10, -5, -1, 1, 5, 10};

// Objectives worth -10, -5, +5 and +10 end the episode; +-1 do not.
constexpr bool is_terminal_reward(int value) { return value != 1 && value != -1; }

struct Cell {
  CellKind kind = CellKind::Empty;
  int reward = 0;
  bool terminal = false;

  static Cell wall() { return {CellKind::Wall, 0, false}; }
  static Cell empty() { return {CellKind::Empty, 0, false}; }
  static Cell objective(int value);

  bool operator==(const Cell&) const = default;
};

/// Categorical over the eight cell kinds: wall, empty, then one entry per
/// reward value in kRewardValues order.
struct ObjectProbs {
  // Calibrated so a 30k-transition expert reaches about 130 distinct states
  // with a short greedy path; +-1 cells are rare because they never end an
  // episode and otherwise become farms.
  double wall = 0.10;
  double empty = 0.849;
  std::array<double, 6> reward{0.0125, 0.0125, 0.0005, 0.0005, 0.0125, 0.0125};

  std::array<double, 8> as_array() const;
  /// Throws std::invalid_argument unless entries are non-negative and sum to 1 within 1e-9.
  void validate() const;

  bool operator==(const ObjectProbs&) const = default;
};

inline constexpr int kDefaultGridSize = 20;
inline constexpr double kDefaultTerminationProb = 0.01;
inline constexpr double kDefaultTransitionNoise = 0.1;

class GridWorld {
 public:
  GridWorld(int rows, int cols, std::vector<Cell> cells, Position start,
            double termination_prob = kDefaultTerminationProb,
            double transition_noise = kDefaultTransitionNoise, std::uint64_t seed = 0);

  /// Builds a world from rows of characters: '#' wall, '.' empty, 'S' start (empty),
  /// 'A'..'F' objectives -10, -5, -1, +1, +5, +10. Test and tooling helper.
  static GridWorld from_rows(std::span<const std::string> rows,
                             double termination_prob = kDefaultTerminationProb,
                             double transition_noise = kDefaultTransitionNoise);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool in_bounds(Position p) const {
    return p.row >= 0 && p.row < rows_ && p.col >= 0 && p.col < cols_;
  }
  const Cell& at(Position p) const { return cells_[index(p)]; }
  std::span<const Cell> cells() const { return cells_; }
  std::size_t index(Position p) const { return static_cast<std::size_t>(p.row * cols_ + p.col); }
  Position position_of(std::size_t index) const {
    return {static_cast<int>(index) / cols_, static_cast<int>(index) % cols_};
  }

  Position initial_position() const { return start_; }
  double termination_prob() const { return termination_prob_; }
  double transition_noise() const { return transition_noise_; }
  std::uint64_t seed() const { return seed_; }

  GridWorld with_dynamics(double termination_prob, double transition_noise) const;

  bool operator==(const GridWorld&) const = default;

 private:
  int rows_;
  int cols_;
  std::vector<Cell> cells_;
  Position start_;
  double termination_prob_;
  double transition_noise_;
  std::uint64_t seed_;
};

/// Samples a 20x20 world: every cell drawn independently from `probs`, the
/// center forced empty. Worlds whose start has no open neighbour are
/// resampled from a derived seed; gives up with std::runtime_error after 100 tries.
GridWorld sample_gridworld(std::uint64_t seed, const ObjectProbs& probs = {},
                           double termination_prob = kDefaultTerminationProb,
                           double transition_noise = kDefaultTransitionNoise);

// ---------------------------------------------------------------------------
// Observations

inline constexpr int kViewRadius = 4;
inline constexpr int kViewSize = 2 * kViewRadius + 1;
inline constexpr int kViewCells = kViewSize * kViewSize;

enum class CellCode : std::uint8_t {
  OutOfBounds = 0,
  Wall = 1,
  Empty = 2,
  // 3..8: objectives in kRewardValues order.
};

std::uint8_t cell_code(const Cell& cell);
char code_char(std::uint8_t code);
std::optional<std::uint8_t> char_code(char c);

using ObsKey = std::array<std::uint8_t, kViewCells>;

struct ObsKeyHash {
  std::size_t operator()(const ObsKey& key) const noexcept;
};

std::string key_to_string(const ObsKey& key);
/// Inverse of key_to_string; throws std::invalid_argument on malformed input.
ObsKey key_from_string(std::string_view text);

/// 9x9 egocentric view; row-major, window[4][4] is the agent's own cell.
struct Observation {
  ObsKey window{};
  std::uint8_t at(int row, int col) const { return window[row * kViewSize + col]; }
  const ObsKey& key() const { return window; }
};

Observation observe(const GridWorld& world, Position position);

// ---------------------------------------------------------------------------
// Dynamics

enum class DoneCause : std::uint8_t { None, Terminal, RandomTermination };

struct StepOutcome {
  Position next_position;
  double reward = 0.0;
  bool done = false;
  DoneCause done_cause = DoneCause::None;
  Action executed = Action::Up;
};

/// One environment transition. Consumes exactly three draws from `rng`
/// (noise coin, replacement action, termination coin) so streams stay
/// aligned regardless of outcome.
StepOutcome step(const GridWorld& world, Position position, Action action, Rng& rng);

// ---------------------------------------------------------------------------
// Tabular state space

using StateId = std::int32_t;
inline constexpr StateId kNoState = -1;

/// Interns observation keys to dense ids. Built from a world it holds the id
/// of every non-wall position, so lookups during rollouts are array reads.
class StateSpace {
 public:
  StateSpace() = default;
  explicit StateSpace(const GridWorld& world);

  StateId at(Position p) const { return position_ids_[static_cast<std::size_t>(p.row * cols_ + p.col)]; }
  StateId intern(const ObsKey& key);
  std::optional<StateId> find(const ObsKey& key) const;
  const ObsKey& key(StateId id) const { return keys_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return keys_.size(); }

 private:
  int cols_ = 0;
  std::vector<StateId> position_ids_;
  std::vector<ObsKey> keys_;
  std::unordered_map<ObsKey, StateId, ObsKeyHash> index_;
};

}  // namespace softprior
