#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "softprior/env.hpp"

namespace softprior {

/// Tabular parameters: one fixed-width row per observation state.
///
/// Rows for states never written read as `default_value` in every slot.
/// Storage is dense over StateId, which a StateSpace hands out densely.
template <std::size_t Width>
class ParamTable {
 public:
  using Row = std::array<double, Width>;
  static constexpr std::size_t width = Width;

  explicit ParamTable(std::size_t n_states = 0, double default_value = 0.0) : default_value_(default_value) {
    default_row_.fill(default_value);
    rows_.assign(n_states, default_row_);
    present_.assign(n_states, 0);
  }

  const Row& operator[](StateId id) const {
    const auto i = static_cast<std::size_t>(id);
    return i < rows_.size() ? rows_[i] : default_row_;
  }

  /// Writable row; marks the state present.
  Row& at(StateId id) {
    const auto i = static_cast<std::size_t>(id);
    if (i >= rows_.size()) {
      rows_.resize(i + 1, default_row_);
      present_.resize(i + 1, 0);
    }
    present_[i] = 1;
    return rows_[i];
  }

  bool contains(StateId id) const {
    const auto i = static_cast<std::size_t>(id);
    return i < present_.size() && present_[i] != 0;
  }

  std::vector<StateId> states() const {
    std::vector<StateId> out;
    for (std::size_t i = 0; i < present_.size(); ++i)
      if (present_[i]) out.push_back(static_cast<StateId>(i));
    return out;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (auto p : present_) n += p;
    return n;
  }

  double default_value() const { return default_value_; }

  bool operator==(const ParamTable&) const = default;

 private:
  double default_value_;
  Row default_row_;
  std::vector<Row> rows_;
  std::vector<std::uint8_t> present_;
};

using QTable = ParamTable<kNumActions>;

}  // namespace softprior
