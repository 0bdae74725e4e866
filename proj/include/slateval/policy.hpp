#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "slateval/rng.hpp"
#include "slateval/slate.hpp"

namespace slateval {

struct WeightedSlate {
  Slate slate;
  double probability = 0.0;
};

/// slate -> probability table for each context.
using ExplicitTable = ContextMap<std::vector<WeightedSlate>>;

/// Controls exact enumeration versus Monte Carlo when computing slate moments.
struct MomentOptions {
  std::size_t enumeration_cap = 100'000;
  /// Draws used for a Monte Carlo second-moment matrix.
  std::size_t gamma_samples = 100'000;
  /// Draws used for a Monte Carlo mean indicator q.
  std::size_t indicator_samples = 10'000;
  /// Distinct slates drawn when the support must be sampled.
  std::size_t support_samples = 10'000;
  /// Base seed; each context derives its own stream from it.
  std::uint64_t seed = 0x5eed;
};

enum class PolicyKind { Uniform, Explicit, Deterministic, MultinomialWithoutReplacement, UniformMixture };

const char* to_string(PolicyKind kind);

/// Conditional distribution over slates given a context. Immutable; copies share state.
class Policy {
 public:
  /// Uniform over S(x), whatever the space.
  static Policy uniform();
  /// Table policy. Per context, probabilities summing to 1 within 1e-6 are
  /// renormalized; larger drift, negative entries or duplicate slates are rejected.
  static Policy explicit_table(ExplicitTable table);
  static Policy deterministic(ContextMap<Slate> choices);
  /// Slot-by-slot sampling without replacement with p(a|x) ∝ exp(alpha * score(x, a)).
  /// Ranking spaces take m scores; Cartesian spaces take dim scores (softmax per slot block).
  static Policy multinomial(ContextMap<std::vector<double>> scores, double alpha);
  /// kappa * uniform + (1 - kappa) * base.
  static Policy uniform_mixture(Policy base, double kappa);

  PolicyKind kind() const;
  /// True when the policy is exactly uniform over every space (closed-form Γ† applies).
  bool is_uniform() const;
  /// For mixtures: the mixing weight. Otherwise 0 (or 1 for Uniform).
  double mixing_weight() const;
  /// Base policy of a UniformMixture, nullptr otherwise.
  const Policy* mixture_base() const;

  double slate_prob(const ContextId& context, const Slate& slate, const SlateSpace& space) const;
  Slate sample(const ContextId& context, const SlateSpace& space, Rng& rng) const;

  /// Exact support with probabilities when it has at most cap elements (zero-probability
  /// slates omitted). nullopt when the support would have to be sampled.
  std::optional<std::vector<WeightedSlate>> exact_support(const ContextId& context, const SlateSpace& space,
                                                          std::size_t cap) const;

  /// Contexts named by the policy's tables (empty for Uniform).
  std::vector<ContextId> known_contexts() const;

  struct State;

 private:
  explicit Policy(std::shared_ptr<const State> state) : state_(std::move(state)) {}
  std::shared_ptr<const State> state_;
};

enum class MomentSource { Enumerated, MonteCarlo, ClosedFormUniform };

/// First and second moments of the slate indicator: q = E[1_s], Γ = E[1_s 1_s^T].
struct SlateMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd second;
  MomentSource source = MomentSource::Enumerated;
  std::size_t sample_count = 0;
};

/// Full moments (q and Γ). Exact when the support is enumerable under the cap,
/// closed-form for uniform, Monte Carlo with options.gamma_samples otherwise.
SlateMoments slate_moments(const Policy& policy, const ContextId& context, const SlateSpace& space,
                           const MomentOptions& options = {});

/// q_π(x); Monte Carlo uses options.indicator_samples.
Eigen::VectorXd mean_indicator(const Policy& policy, const ContextId& context, const SlateSpace& space,
                               const MomentOptions& options = {});

double marginal_prob(const Policy& policy, const ContextId& context, const SlateSpace& space, int slot,
                     int action, const MomentOptions& options = {});
/// μ(s_j=a, s_k=a'|x). Equal slots give the marginal when a == a' and 0 otherwise.
double pairwise_prob(const Policy& policy, const ContextId& context, const SlateSpace& space, int slot,
                     int action, int other_slot, int other_action, const MomentOptions& options = {});

/// Supported slates: exact support under the cap, otherwise up to
/// options.support_samples distinct draws from the policy.
std::vector<Slate> support_slates(const Policy& policy, const ContextId& context, const SlateSpace& space,
                                  const MomentOptions& options = {});

/// Stream seed used for Monte Carlo moments of one context.
std::uint64_t context_seed(const MomentOptions& options, const ContextId& context, std::uint64_t salt = 0);

}  // namespace slateval
