#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "slateval/policy.hpp"
#include "slateval/ridge.hpp"
#include "slateval/slate.hpp"

namespace slateval {

enum class EstimatorKind { PI, IPS, WIPS, DM, OnPolicy, SB, WSB };

const char* to_string(EstimatorKind kind);
/// Accepts pi, ips, wips, dm, onpolicy, sb, wsb (case-insensitive).
EstimatorKind parse_estimator_kind(std::string_view name);

struct ReportDiagnostics {
  double sigma_sq = 0.0;
  double rho = 0.0;
  double bound = 0.0;
  double delta = 0.0;
};

struct EstimatorReport {
  EstimatorKind kind = EstimatorKind::PI;
  double estimate = 0.0;
  std::size_t n = 0;
  std::optional<ReportDiagnostics> diagnostics;

  /// One line: "estimator=pi n=100 estimate=... sigma_sq=... rho=... bound=... delta=..."
  std::string key_value() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Feature vectors f(x, a) for an action shown in a slot.
class FeatureTable {
 public:
  virtual ~FeatureTable() = default;
  virtual std::size_t dim() const = 0;
  virtual std::span<const double> features(const ContextId& context, int slot, int action) const = 0;
};

/// Features keyed by (context, action); the slot is ignored.
class MapFeatureTable final : public FeatureTable {
 public:
  explicit MapFeatureTable(std::size_t dim) : dim_(dim) {}
  void set(const ContextId& context, int action, std::vector<double> values);
  std::size_t dim() const override { return dim_; }
  std::span<const double> features(const ContextId& context, int slot, int action) const override;

 private:
  std::size_t dim_;
  ContextMap<std::vector<std::vector<double>>> rows_;
};

/// A simulated environment: context distribution, per-context spaces and a reward oracle.
class BanditEnvironment {
 public:
  virtual ~BanditEnvironment() = default;
  virtual ContextId sample_context(Rng& rng) const = 0;
  virtual const SlateSpace& space(const ContextId& context) const = 0;
  virtual double reward(const ContextId& context, const Slate& slate, Rng& rng) const = 0;
};

struct PiOptions {
  MomentOptions moments;
  /// When set, the report carries σ², ρ and the deviation bound at this δ.
  std::optional<double> delta;
  std::size_t threads = 1;
};

/// Pseudoinverse estimator with per-context quantities cached:
/// weights = Γ†_{μ,x} q_π(x) and σ-term = q_π(x)ᵀ Γ† q_π(x).
class PseudoinverseEstimator {
 public:
  struct ContextTerms {
    Eigen::VectorXd weights;
    double sigma_term = 0.0;
    bool closed_form = false;
  };

  PseudoinverseEstimator(Policy logging, Policy target, SlateSpaces spaces, PiOptions options = {});

  /// Precomputes terms for the given contexts (parallel over contexts).
  void prepare(std::span<const ContextId> contexts);
  /// Terms for a context; computed on demand (not cached) when not prepared.
  ContextTerms terms(const ContextId& context) const;

  /// (1/n) Σ r_i q_π(x_i)ᵀ Γ† 1_{s_i}. Throws ValidationError on empty data or invalid
  /// slates, AbsoluteContinuityError when π(s_i|x_i) > 0 = μ(s_i|x_i).
  EstimatorReport estimate(std::span<const LoggedExample> data) const;

  const SlateSpaces& spaces() const { return spaces_; }

 private:
  Policy logging_;
  Policy target_;
  SlateSpaces spaces_;
  PiOptions options_;
  ContextMap<ContextTerms> cache_;
};

EstimatorReport estimate_pi(std::span<const LoggedExample> data, const Policy& logging, const Policy& target,
                            const SlateSpaces& spaces, const PiOptions& options = {});

/// (1/n) Σ r_i π(s_i|x_i)/μ(s_i|x_i).
EstimatorReport estimate_ips(std::span<const LoggedExample> data, const Policy& logging, const Policy& target,
                             const SlateSpaces& spaces);
/// Σ r_i w_i / Σ w_i. Throws UndefinedEstimateError when every weight is zero.
EstimatorReport estimate_wips(std::span<const LoggedExample> data, const Policy& logging, const Policy& target,
                              const SlateSpaces& spaces);

/// Ridge regression from concatenated per-slot features to slate reward.
struct RewardModel {
  LinearModel model;
  int num_slots = 0;
  std::size_t feature_dim = 0;

  std::vector<double> slate_features(const ContextId& context, const Slate& slate, const FeatureTable& features) const;
  /// Prediction clamped to [-1, 1].
  double predict(const ContextId& context, const Slate& slate, const FeatureTable& features) const;
};

RewardModel fit_dm(std::span<const LoggedExample> train, const FeatureTable& features, double lambda = 1.0);

/// (1/n') Σ_i Σ_s r̂(x_i, s) π(s|x_i); the inner sum is exact under the enumeration cap and
/// a Monte Carlo average over options.indicator_samples draws from π otherwise.
EstimatorReport estimate_dm(const RewardModel& model, std::span<const LoggedExample> eval, const Policy& target,
                            const SlateSpaces& spaces, const FeatureTable& features, const MomentOptions& options = {});

/// Mean reward of n slates drawn from the target in the environment.
EstimatorReport estimate_onpolicy(const Policy& target, const BanditEnvironment& env, std::size_t n, Rng& rng);

/// First n/2 examples (training) and the rest (evaluation), in log order.
std::pair<std::span<const LoggedExample>, std::span<const LoggedExample>> split_half(
    std::span<const LoggedExample> data);

}  // namespace slateval
