#include "slateval/policy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "slateval/error.hpp"

namespace slateval {

struct Policy::State {
  PolicyKind kind = PolicyKind::Uniform;
  ExplicitTable table;
  ContextMap<std::map<Slate, double>> table_index;
  ContextMap<Slate> choices;
  ContextMap<std::vector<double>> scores;
  double alpha = 0.0;
  std::optional<Policy> base;
  double kappa = 0.0;
};

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kRenormalizeTolerance = 1e-6;

template <typename T>
const T& lookup(const ContextMap<T>& map, const ContextId& context, const char* what) {
  auto it = map.find(context);
  if (it == map.end()) throw LookupError(std::string(what) + " policy has no entry for context '" + context.str() + "'");
  return it->second;
}

std::vector<double> softmax(std::span<const double> scores, double alpha) {
  std::vector<double> p(scores.size());
  if (scores.empty()) return p;
  double top = alpha * scores[0];
  for (double s : scores) top = std::max(top, alpha * s);
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(alpha * scores[i] - top);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

void check_score_length(const std::vector<double>& scores, const SlateSpace& space, const ContextId& context) {
  const std::size_t expected =
      space.kind() == SpaceKind::Ranking ? static_cast<std::size_t>(space.num_actions(0)) : space.dim();
  if (scores.size() != expected) {
    throw ValidationError("multinomial policy for context '" + context.str() + "' has " +
                          std::to_string(scores.size()) + " scores, space " + space.describe() + " needs " +
                          std::to_string(expected));
  }
}

double multinomial_prob(const std::vector<double>& scores, double alpha, const Slate& slate,
                        const SlateSpace& space) {
  if (space.kind() == SpaceKind::CartesianProduct) {
    double prob = 1.0;
    for (int j = 0; j < space.num_slots(); ++j) {
      auto block = std::span<const double>(scores).subspan(space.offset(j), space.num_actions(j));
      prob *= softmax(block, alpha)[slate[j]];
    }
    return prob;
  }
  const auto p = softmax(scores, alpha);
  std::vector<char> used(p.size(), 0);
  double prob = 1.0;
  for (int j = 0; j < space.num_slots(); ++j) {
    double remaining = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
      if (!used[a]) remaining += p[a];
    }
    if (p[slate[j]] == 0.0) return 0.0;
    prob *= p[slate[j]] / remaining;
    used[slate[j]] = 1;
  }
  return prob;
}

int sample_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = static_cast<int>(i);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

Slate sample_uniform(const SlateSpace& space, Rng& rng) {
  Slate slate{std::vector<int>(space.num_slots())};
  if (space.kind() == SpaceKind::CartesianProduct) {
    for (int j = 0; j < space.num_slots(); ++j) {
      slate.actions[j] = static_cast<int>(uniform_index(rng, space.num_actions(j)));
    }
    return slate;
  }
  const int m = space.num_actions(0);
  std::vector<int> pool(m);
  for (int a = 0; a < m; ++a) pool[a] = a;
  for (int j = 0; j < space.num_slots(); ++j) {
    const auto pick = j + static_cast<int>(uniform_index(rng, m - j));
    std::swap(pool[j], pool[pick]);
    slate.actions[j] = pool[j];
  }
  return slate;
}

Slate sample_multinomial(const std::vector<double>& scores, double alpha, const SlateSpace& space, Rng& rng) {
  Slate slate{std::vector<int>(space.num_slots())};
  if (space.kind() == SpaceKind::CartesianProduct) {
    for (int j = 0; j < space.num_slots(); ++j) {
      auto block = std::span<const double>(scores).subspan(space.offset(j), space.num_actions(j));
      slate.actions[j] = sample_categorical(softmax(block, alpha), rng);
    }
    return slate;
  }
  auto p = softmax(scores, alpha);
  for (int j = 0; j < space.num_slots(); ++j) {
    const int a = sample_categorical(p, rng);
    slate.actions[j] = a;
    p[a] = 0.0;
  }
  return slate;
}

void add_outer(const Slate& slate, const SlateSpace& space, double weight, Eigen::VectorXd& mean,
               Eigen::MatrixXd* second) {
  const int slots = space.num_slots();
  for (int j = 0; j < slots; ++j) {
    const int cj = space.coord(j, slate[j]);
    mean[cj] += weight;
    if (!second) continue;
    for (int k = 0; k < slots; ++k) (*second)(cj, space.coord(k, slate[k])) += weight;
  }
}

SlateMoments uniform_moments(const SlateSpace& space, bool want_second) {
  SlateMoments out;
  out.source = MomentSource::ClosedFormUniform;
  const int dim = space.dim();
  out.mean.resize(dim);
  for (int j = 0; j < space.num_slots(); ++j) {
    out.mean.segment(space.offset(j), space.num_actions(j)).setConstant(1.0 / space.num_actions(j));
  }
  if (!want_second) return out;
  out.second = Eigen::MatrixXd::Zero(dim, dim);
  const bool ranking = space.kind() == SpaceKind::Ranking;
  for (int j = 0; j < space.num_slots(); ++j) {
    const int mj = space.num_actions(j);
    for (int a = 0; a < mj; ++a) {
      const int row = space.coord(j, a);
      out.second(row, row) = 1.0 / mj;
      for (int k = 0; k < space.num_slots(); ++k) {
        if (k == j) continue;
        const int mk = space.num_actions(k);
        for (int b = 0; b < mk; ++b) {
          if (ranking) {
            out.second(row, space.coord(k, b)) = a == b ? 0.0 : 1.0 / (double(mj) * (mj - 1));
          } else {
            out.second(row, space.coord(k, b)) = 1.0 / (double(mj) * mk);
          }
        }
      }
    }
  }
  return out;
}

SlateMoments moments_impl(const Policy& policy, const ContextId& context, const SlateSpace& space,
                          const MomentOptions& options, bool want_second) {
  if (policy.is_uniform()) return uniform_moments(space, want_second);

  const int dim = space.dim();
  if (auto support = policy.exact_support(context, space, options.enumeration_cap)) {
    SlateMoments out;
    out.source = MomentSource::Enumerated;
    out.mean = Eigen::VectorXd::Zero(dim);
    if (want_second) out.second = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& ws : *support) add_outer(ws.slate, space, ws.probability, out.mean, want_second ? &out.second : nullptr);
    return out;
  }

  if (const Policy* base = policy.mixture_base(); base && policy.mixing_weight() > 0.0) {
    // Only the base needs sampling; the uniform share is exact.
    const double kappa = policy.mixing_weight();
    SlateMoments out = moments_impl(*base, context, space, options, want_second);
    const SlateMoments uni = uniform_moments(space, want_second);
    out.mean = kappa * uni.mean + (1.0 - kappa) * out.mean;
    if (want_second) out.second = kappa * uni.second + (1.0 - kappa) * out.second;
    return out;
  }

  const std::size_t samples = want_second ? options.gamma_samples : options.indicator_samples;
  if (samples == 0) throw ConfigError("Monte Carlo moments requested with zero samples");
  Rng rng(context_seed(options, context, want_second ? 2 : 1));
  SlateMoments out;
  out.source = MomentSource::MonteCarlo;
  out.sample_count = samples;
  Eigen::VectorXd mean_counts = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd second_counts;
  if (want_second) second_counts = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < samples; ++i) {
    const Slate slate = policy.sample(context, space, rng);
    add_outer(slate, space, 1.0, mean_counts, want_second ? &second_counts : nullptr);
  }
  out.mean = mean_counts / static_cast<double>(samples);
  if (want_second) out.second = second_counts / static_cast<double>(samples);
  return out;
}

}  // namespace

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Uniform: return "uniform";
    case PolicyKind::Explicit: return "explicit";
    case PolicyKind::Deterministic: return "deterministic";
    case PolicyKind::MultinomialWithoutReplacement: return "multinomial";
    case PolicyKind::UniformMixture: return "uniform_mixture";
  }
  return "unknown";
}

Policy Policy::uniform() {
  auto state = std::make_shared<State>();
  state->kind = PolicyKind::Uniform;
  return Policy(std::move(state));
}

Policy Policy::explicit_table(ExplicitTable table) {
  auto state = std::make_shared<State>();
  state->kind = PolicyKind::Explicit;
  for (auto& [context, entries] : table) {
    if (entries.empty()) throw ValidationError("explicit policy has no slates for context '" + context.str() + "'");
    double total = 0.0;
    auto& index = state->table_index[context];
    for (const auto& entry : entries) {
      if (!(entry.probability >= 0.0)) {
        throw ValidationError("negative probability for context '" + context.str() + "'");
      }
      if (!index.emplace(entry.slate, entry.probability).second) {
        throw ValidationError("duplicate slate (" + format_slate(entry.slate) + ") for context '" + context.str() + "'");
      }
      total += entry.probability;
    }
    const double drift = std::abs(total - 1.0);
    if (drift > kRenormalizeTolerance) {
      throw ValidationError("probabilities for context '" + context.str() + "' sum to " + std::to_string(total));
    }
    if (drift > kSumTolerance) {
      for (auto& entry : entries) entry.probability /= total;
      for (auto& [slate, p] : index) p /= total;
    }
  }
  state->table = std::move(table);
  return Policy(std::move(state));
}

Policy Policy::deterministic(ContextMap<Slate> choices) {
  auto state = std::make_shared<State>();
  state->kind = PolicyKind::Deterministic;
  state->choices = std::move(choices);
  return Policy(std::move(state));
}

Policy Policy::multinomial(ContextMap<std::vector<double>> scores, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be a finite nonnegative real");
  for (const auto& [context, s] : scores) {
    for (double v : s) {
      if (!std::isfinite(v)) throw ValidationError("non-finite score for context '" + context.str() + "'");
    }
  }
  auto state = std::make_shared<State>();
  state->kind = PolicyKind::MultinomialWithoutReplacement;
  state->scores = std::move(scores);
  state->alpha = alpha;
  return Policy(std::move(state));
}

Policy Policy::uniform_mixture(Policy base, double kappa) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw ValidationError("mixing weight must lie in [0, 1]");
  auto state = std::make_shared<State>();
  state->kind = PolicyKind::UniformMixture;
  state->base = std::move(base);
  state->kappa = kappa;
  return Policy(std::move(state));
}

PolicyKind Policy::kind() const { return state_->kind; }

bool Policy::is_uniform() const {
  switch (state_->kind) {
    case PolicyKind::Uniform: return true;
    case PolicyKind::MultinomialWithoutReplacement: return state_->alpha == 0.0;
    case PolicyKind::UniformMixture: return state_->kappa == 1.0 || state_->base->is_uniform();
    default: return false;
  }
}

double Policy::mixing_weight() const {
  if (state_->kind == PolicyKind::Uniform) return 1.0;
  return state_->kind == PolicyKind::UniformMixture ? state_->kappa : 0.0;
}

const Policy* Policy::mixture_base() const {
  return state_->kind == PolicyKind::UniformMixture ? &*state_->base : nullptr;
}

double Policy::slate_prob(const ContextId& context, const Slate& slate, const SlateSpace& space) const {
  space.validate(slate);
  const State& s = *state_;
  switch (s.kind) {
    case PolicyKind::Uniform: return 1.0 / space.cardinality();
    case PolicyKind::Explicit: {
      const auto& index = lookup(s.table_index, context, "explicit");
      auto it = index.find(slate);
      return it == index.end() ? 0.0 : it->second;
    }
    case PolicyKind::Deterministic: return lookup(s.choices, context, "deterministic") == slate ? 1.0 : 0.0;
    case PolicyKind::MultinomialWithoutReplacement: {
      const auto& scores = lookup(s.scores, context, "multinomial");
      check_score_length(scores, space, context);
      return multinomial_prob(scores, s.alpha, slate, space);
    }
    case PolicyKind::UniformMixture:
      return s.kappa / space.cardinality() + (1.0 - s.kappa) * s.base->slate_prob(context, slate, space);
  }
  return 0.0;
}

Slate Policy::sample(const ContextId& context, const SlateSpace& space, Rng& rng) const {
  const State& s = *state_;
  switch (s.kind) {
    case PolicyKind::Uniform: return sample_uniform(space, rng);
    case PolicyKind::Explicit: {
      const auto& entries = lookup(s.table, context, "explicit");
      const double u = uniform01(rng);
      double acc = 0.0;
      const Slate* last = nullptr;
      for (const auto& entry : entries) {
        if (entry.probability <= 0.0) continue;
        acc += entry.probability;
        last = &entry.slate;
        if (u < acc) return entry.slate;
      }
      return *last;
    }
    case PolicyKind::Deterministic: return lookup(s.choices, context, "deterministic");
    case PolicyKind::MultinomialWithoutReplacement: {
      const auto& scores = lookup(s.scores, context, "multinomial");
      check_score_length(scores, space, context);
      return sample_multinomial(scores, s.alpha, space, rng);
    }
    case PolicyKind::UniformMixture:
      if (uniform01(rng) < s.kappa) return sample_uniform(space, rng);
      return s.base->sample(context, space, rng);
  }
  return {};
}

std::optional<std::vector<WeightedSlate>> Policy::exact_support(const ContextId& context, const SlateSpace& space,
                                                                std::size_t cap) const {
  const State& s = *state_;
  std::vector<WeightedSlate> out;
  switch (s.kind) {
    case PolicyKind::Explicit: {
      for (const auto& entry : lookup(s.table, context, "explicit")) {
        space.validate(entry.slate);
        if (entry.probability > 0.0) out.push_back(entry);
      }
      return out;
    }
    case PolicyKind::Deterministic: {
      const Slate& slate = lookup(s.choices, context, "deterministic");
      space.validate(slate);
      out.push_back({slate, 1.0});
      return out;
    }
    case PolicyKind::UniformMixture:
      if (s.kappa == 0.0) return s.base->exact_support(context, space, cap);
      [[fallthrough]];
    case PolicyKind::Uniform:
    case PolicyKind::MultinomialWithoutReplacement: {
      if (!space.count_up_to(cap)) return std::nullopt;
      if (s.kind == PolicyKind::UniformMixture && !s.base->exact_support(context, space, cap)) return std::nullopt;
      for (auto& slate : space.enumerate(cap)) {
        const double p = slate_prob(context, slate, space);
        if (p > 0.0) out.push_back({std::move(slate), p});
      }
      return out;
    }
  }
  return std::nullopt;
}

std::vector<ContextId> Policy::known_contexts() const {
  const State& s = *state_;
  std::vector<ContextId> out;
  switch (s.kind) {
    case PolicyKind::Uniform: break;
    case PolicyKind::Explicit:
      for (const auto& [c, _] : s.table) out.push_back(c);
      break;
    case PolicyKind::Deterministic:
      for (const auto& [c, _] : s.choices) out.push_back(c);
      break;
    case PolicyKind::MultinomialWithoutReplacement:
      for (const auto& [c, _] : s.scores) out.push_back(c);
      break;
    case PolicyKind::UniformMixture: return s.base->known_contexts();
  }
  std::sort(out.begin(), out.end());
  return out;
}

SlateMoments slate_moments(const Policy& policy, const ContextId& context, const SlateSpace& space,
                           const MomentOptions& options) {
  return moments_impl(policy, context, space, options, true);
}

Eigen::VectorXd mean_indicator(const Policy& policy, const ContextId& context, const SlateSpace& space,
                               const MomentOptions& options) {
  return moments_impl(policy, context, space, options, false).mean;
}

double marginal_prob(const Policy& policy, const ContextId& context, const SlateSpace& space, int slot, int action,
                     const MomentOptions& options) {
  if (slot < 0 || slot >= space.num_slots() || action < 0 || action >= space.num_actions(slot)) {
    throw ValidationError("slot/action index out of range");
  }
  return mean_indicator(policy, context, space, options)[space.coord(slot, action)];
}

double pairwise_prob(const Policy& policy, const ContextId& context, const SlateSpace& space, int slot, int action,
                     int other_slot, int other_action, const MomentOptions& options) {
  for (auto [j, a] : {std::pair{slot, action}, std::pair{other_slot, other_action}}) {
    if (j < 0 || j >= space.num_slots() || a < 0 || a >= space.num_actions(j)) {
      throw ValidationError("slot/action index out of range");
    }
  }
  if (slot == other_slot && action != other_action) return 0.0;
  const auto m = slate_moments(policy, context, space, options);
  return m.second(space.coord(slot, action), space.coord(other_slot, other_action));
}

std::vector<Slate> support_slates(const Policy& policy, const ContextId& context, const SlateSpace& space,
                                  const MomentOptions& options) {
  std::vector<Slate> out;
  if (auto support = policy.exact_support(context, space, options.enumeration_cap)) {
    out.reserve(support->size());
    for (auto& ws : *support) out.push_back(std::move(ws.slate));
    return out;
  }
  if (options.support_samples == 0) throw ConfigError("support sampling requested with zero samples");
  Rng rng(context_seed(options, context, 3));
  std::set<Slate> seen;
  for (std::size_t draw = 0; draw < 4 * options.support_samples && out.size() < options.support_samples; ++draw) {
    Slate slate = policy.sample(context, space, rng);
    if (seen.insert(slate).second) out.push_back(std::move(slate));
  }
  return out;
}

std::uint64_t context_seed(const MomentOptions& options, const ContextId& context, std::uint64_t salt) {
  return derive_seed(options.seed, fnv1a(context.str()), salt);
}

}  // namespace slateval
