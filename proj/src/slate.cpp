#include "slateval/slate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include "slateval/error.hpp"

namespace slateval {

namespace {

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ParseError("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string format_slate(const Slate& slate) {
  std::string out;
  for (std::size_t j = 0; j < slate.size(); ++j) {
    if (j) out += ',';
    out += std::to_string(slate[j]);
  }
  return out;
}

Slate parse_slate(std::string_view text) {
  Slate slate;
  if (text.empty()) throw ParseError("empty slate");
  for (auto part : split(text, ',')) slate.actions.push_back(parse_int(part, "action id"));
  return slate;
}

SlateSpace::SlateSpace(SpaceKind kind, std::vector<int> actions_per_slot)
    : kind_(kind), actions_per_slot_(std::move(actions_per_slot)) {
  offsets_.reserve(actions_per_slot_.size());
  for (int m : actions_per_slot_) {
    offsets_.push_back(dim_);
    dim_ += m;
  }
}

SlateSpace SlateSpace::cartesian(std::vector<int> actions_per_slot) {
  if (actions_per_slot.empty()) throw ValidationError("cartesian space needs at least one slot");
  for (int m : actions_per_slot) {
    if (m < 1) throw ValidationError("every slot needs at least one action");
  }
  return SlateSpace(SpaceKind::CartesianProduct, std::move(actions_per_slot));
}

SlateSpace SlateSpace::ranking(int num_actions, int num_slots) {
  if (num_slots < 1) throw ValidationError("ranking space needs at least one slot");
  if (num_actions < num_slots) {
    throw ValidationError("ranking space needs m >= l (m=" + std::to_string(num_actions) +
                          ", l=" + std::to_string(num_slots) + ")");
  }
  return SlateSpace(SpaceKind::Ranking, std::vector<int>(num_slots, num_actions));
}

SlateSpace SlateSpace::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ParseError("space must look like ranking:m=4,l=2 or cartesian:3,3");
  auto kind = text.substr(0, colon);
  auto rest = text.substr(colon + 1);
  if (kind == "cartesian") {
    std::vector<int> sizes;
    for (auto part : split(rest, ',')) sizes.push_back(parse_int(part, "slot size"));
    return cartesian(std::move(sizes));
  }
  if (kind == "ranking") {
    int m = -1, l = -1;
    for (auto part : split(rest, ',')) {
      auto eq = part.find('=');
      if (eq == std::string_view::npos) throw ParseError("ranking space expects m=<int>,l=<int>");
      auto key = part.substr(0, eq);
      int value = parse_int(part.substr(eq + 1), key);
      if (key == "m") {
        m = value;
      } else if (key == "l") {
        l = value;
      } else {
        throw ParseError("unknown ranking key '" + std::string(key) + "'");
      }
    }
    if (m < 0 || l < 0) throw ParseError("ranking space needs both m and l");
    return ranking(m, l);
  }
  throw ParseError("unknown space kind '" + std::string(kind) + "'");
}

double SlateSpace::cardinality() const {
  double count = 1.0;
  if (kind_ == SpaceKind::CartesianProduct) {
    for (int m : actions_per_slot_) count *= m;
  } else {
    const int m = actions_per_slot_[0];
    for (int j = 0; j < num_slots(); ++j) count *= m - j;
  }
  return count;
}

std::optional<std::size_t> SlateSpace::count_up_to(std::size_t cap) const {
  std::size_t count = 1;
  for (int j = 0; j < num_slots(); ++j) {
    const std::size_t factor =
        kind_ == SpaceKind::CartesianProduct ? actions_per_slot_[j] : actions_per_slot_[0] - j;
    if (count > cap / factor) return std::nullopt;
    count *= factor;
  }
  if (count > cap) return std::nullopt;
  return count;
}

bool SlateSpace::contains(const Slate& slate) const {
  if (slate.size() != actions_per_slot_.size()) return false;
  for (std::size_t j = 0; j < slate.size(); ++j) {
    if (slate[j] < 0 || slate[j] >= actions_per_slot_[j]) return false;
  }
  if (kind_ == SpaceKind::Ranking) {
    std::vector<int> sorted = slate.actions;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  }
  return true;
}

void SlateSpace::validate(const Slate& slate) const {
  if (slate.size() != actions_per_slot_.size()) {
    throw ValidationError("slate (" + format_slate(slate) + ") has " + std::to_string(slate.size()) +
                          " slots, space " + describe() + " has " + std::to_string(num_slots()));
  }
  for (std::size_t j = 0; j < slate.size(); ++j) {
    if (slate[j] < 0 || slate[j] >= actions_per_slot_[j]) {
      throw ValidationError("slate (" + format_slate(slate) + "): action " + std::to_string(slate[j]) +
                            " out of range in slot " + std::to_string(j));
    }
  }
  if (!contains(slate)) throw ValidationError("slate (" + format_slate(slate) + ") repeats an action in a ranking");
}

std::vector<Slate> SlateSpace::enumerate(std::size_t cap) const {
  auto count = count_up_to(cap);
  if (!count) throw ValidationError("space " + describe() + " exceeds the enumeration cap");
  std::vector<Slate> out;
  out.reserve(*count);
  const int slots = num_slots();
  Slate current{std::vector<int>(slots, 0)};
  std::vector<char> used(kind_ == SpaceKind::Ranking ? actions_per_slot_[0] : 0, 0);
  // Depth-first over slots yields lexicographic order.
  auto recurse = [&](auto&& self, int j) -> void {
    if (j == slots) {
      out.push_back(current);
      return;
    }
    for (int a = 0; a < actions_per_slot_[j]; ++a) {
      if (kind_ == SpaceKind::Ranking) {
        if (used[a]) continue;
        used[a] = 1;
      }
      current.actions[j] = a;
      self(self, j + 1);
      if (kind_ == SpaceKind::Ranking) used[a] = 0;
    }
  };
  recurse(recurse, 0);
  return out;
}

std::string SlateSpace::describe() const {
  if (kind_ == SpaceKind::Ranking) {
    return "ranking:m=" + std::to_string(actions_per_slot_[0]) + ",l=" + std::to_string(num_slots());
  }
  std::string out = "cartesian:";
  for (std::size_t j = 0; j < actions_per_slot_.size(); ++j) {
    if (j) out += ',';
    out += std::to_string(actions_per_slot_[j]);
  }
  return out;
}

IndicatorVector indicator(const Slate& slate, const SlateSpace& space) {
  space.validate(slate);
  IndicatorVector v = IndicatorVector::Zero(space.dim());
  for (int j = 0; j < space.num_slots(); ++j) v[space.coord(j, slate[j])] = 1.0;
  return v;
}

std::vector<int> indicator_coords(const Slate& slate, const SlateSpace& space) {
  space.validate(slate);
  std::vector<int> coords(slate.size());
  for (int j = 0; j < space.num_slots(); ++j) coords[j] = space.coord(j, slate[j]);
  return coords;
}

double dot_indicator(const Eigen::VectorXd& v, const Slate& slate, const SlateSpace& space) {
  double total = 0.0;
  for (int j = 0; j < space.num_slots(); ++j) total += v[space.coord(j, slate[j])];
  return total;
}

void validate_example(const LoggedExample& example, const SlateSpace& space) {
  if (!(example.reward >= -1.0 && example.reward <= 1.0)) {
    throw ValidationError("reward " + std::to_string(example.reward) + " outside [-1, 1] for context '" +
                          example.context.str() + "'");
  }
  space.validate(example.slate);
}

Eigen::VectorXd marginal_reward(const LoggedExample& example, const SlateSpace& space) {
  return example.reward * indicator(example.slate, space);
}

std::vector<ContextId> distinct_contexts(std::span<const LoggedExample> data) {
  std::vector<ContextId> out;
  std::unordered_set<ContextId, ContextIdHash> seen;
  for (const auto& ex : data) {
    if (seen.insert(ex.context).second) out.push_back(ex.context);
  }
  return out;
}

}  // namespace slateval
