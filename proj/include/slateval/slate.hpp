#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace slateval {

/// Opaque context identifier. Slate math never looks inside it.
class ContextId {
 public:
  ContextId() = default;
  explicit ContextId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }
  auto operator<=>(const ContextId&) const = default;

 private:
  std::string value_;
};

struct ContextIdHash {
  std::size_t operator()(const ContextId& id) const { return std::hash<std::string>{}(id.str()); }
};

template <typename T>
using ContextMap = std::unordered_map<ContextId, T, ContextIdHash>;

/// Slot-indexed action ids; actions are dense integers 0..m_j-1.
struct Slate {
  std::vector<int> actions;

  std::size_t size() const { return actions.size(); }
  int operator[](std::size_t slot) const { return actions[slot]; }
  auto operator<=>(const Slate&) const = default;
};

std::string format_slate(const Slate& slate);  // "1,0,2"
Slate parse_slate(std::string_view text);

enum class SpaceKind { CartesianProduct, Ranking };

/// Structure of valid slates: a Cartesian product of per-slot action sets, or
/// duplicate-free rankings drawn from one shared action set.
class SlateSpace {
 public:
  static SlateSpace cartesian(std::vector<int> actions_per_slot);
  static SlateSpace ranking(int num_actions, int num_slots);
  /// Accepts "ranking:m=4,l=2" or "cartesian:3,3".
  static SlateSpace parse(std::string_view text);

  SpaceKind kind() const { return kind_; }
  int num_slots() const { return static_cast<int>(actions_per_slot_.size()); }
  int num_actions(int slot) const { return actions_per_slot_[slot]; }
  const std::vector<int>& actions_per_slot() const { return actions_per_slot_; }

  /// Indicator dimension, sum of m_j. Coordinates are slot-major, action-minor.
  int dim() const { return dim_; }
  int offset(int slot) const { return offsets_[slot]; }
  int coord(int slot, int action) const { return offsets_[slot] + action; }

  /// |S| as a double (exact up to 2^53).
  double cardinality() const;
  /// |S| when it does not exceed cap.
  std::optional<std::size_t> count_up_to(std::size_t cap) const;

  bool contains(const Slate& slate) const;
  /// Throws ValidationError describing the first defect.
  void validate(const Slate& slate) const;

  /// All valid slates in lexicographic order. Throws ValidationError if |S| > cap.
  std::vector<Slate> enumerate(std::size_t cap = 100'000) const;

  std::string describe() const;
  bool operator==(const SlateSpace& other) const {
    return kind_ == other.kind_ && actions_per_slot_ == other.actions_per_slot_;
  }

 private:
  SlateSpace(SpaceKind kind, std::vector<int> actions_per_slot);

  SpaceKind kind_;
  std::vector<int> actions_per_slot_;
  std::vector<int> offsets_;
  int dim_ = 0;
};

/// Per-context slate spaces: a default plus overrides (pools may shrink per context).
class SlateSpaces {
 public:
  SlateSpaces(SlateSpace fallback) : fallback_(std::move(fallback)) {}  // NOLINT: implicit by intent

  void set(const ContextId& context, SlateSpace space) { overrides_.insert_or_assign(context, std::move(space)); }
  const SlateSpace& at(const ContextId& context) const {
    auto it = overrides_.find(context);
    return it == overrides_.end() ? fallback_ : it->second;
  }

 private:
  SlateSpace fallback_;
  ContextMap<SlateSpace> overrides_;
};

using IndicatorVector = Eigen::VectorXd;

/// 1_s: one 1 per slot block at the chosen action.
IndicatorVector indicator(const Slate& slate, const SlateSpace& space);
/// Coordinates of the nonzero entries of 1_s, one per slot.
std::vector<int> indicator_coords(const Slate& slate, const SlateSpace& space);
/// v^T 1_s without materializing 1_s. Slate must be valid.
double dot_indicator(const Eigen::VectorXd& v, const Slate& slate, const SlateSpace& space);

struct LoggedExample {
  ContextId context;
  Slate slate;
  double reward = 0.0;
};

/// Throws ValidationError unless reward lies in [-1, 1] and the slate is valid.
void validate_example(const LoggedExample& example, const SlateSpace& space);

/// Empirical marginal reward r * 1_s.
Eigen::VectorXd marginal_reward(const LoggedExample& example, const SlateSpace& space);

/// Distinct contexts in first-appearance order.
std::vector<ContextId> distinct_contexts(std::span<const LoggedExample> data);

}  // namespace slateval
