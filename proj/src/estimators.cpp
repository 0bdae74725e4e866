#include "slateval/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "slateval/diagnostics.hpp"
#include "slateval/error.hpp"
#include "slateval/linalg.hpp"
#include "slateval/numeric.hpp"

namespace slateval {

namespace {

std::string fmt(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", v);
  return buffer;
}

void require_nonempty(std::span<const LoggedExample> data) {
  if (data.empty()) throw ValidationError("estimator needs at least one logged example");
}

double logging_propensity(const Policy& logging, const LoggedExample& ex, const SlateSpace& space) {
  const double p = logging.slate_prob(ex.context, ex.slate, space);
  if (!(p > 0.0)) {
    throw AbsoluteContinuityError("logged slate (" + format_slate(ex.slate) + ") for context '" + ex.context.str() +
                                  "' has zero logging probability");
  }
  return p;
}

std::vector<double> importance_weights(std::span<const LoggedExample> data, const Policy& logging,
                                       const Policy& target, const SlateSpaces& spaces) {
  std::vector<double> weights(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& ex = data[i];
    const SlateSpace& space = spaces.at(ex.context);
    validate_example(ex, space);
    weights[i] = target.slate_prob(ex.context, ex.slate, space) / logging_propensity(logging, ex, space);
  }
  return weights;
}

}  // namespace

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::PI: return "pi";
    case EstimatorKind::IPS: return "ips";
    case EstimatorKind::WIPS: return "wips";
    case EstimatorKind::DM: return "dm";
    case EstimatorKind::OnPolicy: return "onpolicy";
    case EstimatorKind::SB: return "sb";
    case EstimatorKind::WSB: return "wsb";
  }
  return "unknown";
}

EstimatorKind parse_estimator_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (auto kind : {EstimatorKind::PI, EstimatorKind::IPS, EstimatorKind::WIPS, EstimatorKind::DM,
                    EstimatorKind::OnPolicy, EstimatorKind::SB, EstimatorKind::WSB}) {
    if (lower == to_string(kind)) return kind;
  }
  throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

std::string EstimatorReport::key_value() const {
  std::string out = std::string("estimator=") + to_string(kind) + " n=" + std::to_string(n) + " estimate=" + fmt(estimate);
  if (diagnostics) {
    out += " sigma_sq=" + fmt(diagnostics->sigma_sq) + " rho=" + fmt(diagnostics->rho) +
           " bound=" + fmt(diagnostics->bound) + " delta=" + fmt(diagnostics->delta);
  }
  return out;
}

std::string EstimatorReport::csv_header() { return "estimator,n,estimate,sigma_sq,rho,bound,delta"; }

std::string EstimatorReport::csv_row() const {
  std::string out = std::string(to_string(kind)) + ',' + std::to_string(n) + ',' + format_double(estimate);
  if (diagnostics) {
    out += ',' + format_double(diagnostics->sigma_sq) + ',' + format_double(diagnostics->rho) + ',' +
           format_double(diagnostics->bound) + ',' + format_double(diagnostics->delta);
  } else {
    out += ",,,,";
  }
  return out;
}

void MapFeatureTable::set(const ContextId& context, int action, std::vector<double> values) {
  if (values.size() != dim_) throw ValidationError("feature vector has the wrong dimension");
  auto& rows = rows_[context];
  if (rows.size() <= static_cast<std::size_t>(action)) rows.resize(action + 1);
  rows[action] = std::move(values);
}

std::span<const double> MapFeatureTable::features(const ContextId& context, int /*slot*/, int action) const {
  auto it = rows_.find(context);
  if (it == rows_.end() || action < 0 || static_cast<std::size_t>(action) >= it->second.size() ||
      it->second[action].size() != dim_) {
    throw LookupError("no features for context '" + context.str() + "' action " + std::to_string(action));
  }
  return it->second[action];
}

PseudoinverseEstimator::PseudoinverseEstimator(Policy logging, Policy target, SlateSpaces spaces, PiOptions options)
    : logging_(std::move(logging)), target_(std::move(target)), spaces_(std::move(spaces)), options_(options) {}

PseudoinverseEstimator::ContextTerms PseudoinverseEstimator::terms(const ContextId& context) const {
  if (auto it = cache_.find(context); it != cache_.end()) return it->second;
  const SlateSpace& space = spaces_.at(context);
  const Eigen::VectorXd q = mean_indicator(target_, context, space, options_.moments);
  const PseudoInverse pinv = pseudo_inverse_for(logging_, context, space, options_.moments);
  ContextTerms out;
  out.weights = pinv.entries * q;
  out.sigma_term = q.dot(out.weights);
  out.closed_form = logging_.is_uniform();
  return out;
}

void PseudoinverseEstimator::prepare(std::span<const ContextId> contexts) {
  std::vector<ContextId> missing;
  for (const auto& c : contexts) {
    if (!cache_.count(c)) missing.push_back(c);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  std::vector<ContextTerms> computed(missing.size());
  parallel_for(missing.size(), options_.threads, [&](std::size_t i) { computed[i] = terms(missing[i]); });
  for (std::size_t i = 0; i < missing.size(); ++i) cache_.emplace(missing[i], std::move(computed[i]));
}

EstimatorReport PseudoinverseEstimator::estimate(std::span<const LoggedExample> data) const {
  require_nonempty(data);
  ContextMap<ContextTerms> local;
  auto lookup = [&](const ContextId& context) -> const ContextTerms& {
    if (auto it = cache_.find(context); it != cache_.end()) return it->second;
    auto it = local.find(context);
    if (it == local.end()) it = local.emplace(context, terms(context)).first;
    return it->second;
  };

  const std::size_t n = data.size();
  std::vector<double> values(n);
  std::vector<double> sigma_terms(options_.delta ? n : 0);
  double rho = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ex = data[i];
    const SlateSpace& space = spaces_.at(ex.context);
    validate_example(ex, space);
    if (target_.slate_prob(ex.context, ex.slate, space) > 0.0) logging_propensity(logging_, ex, space);
    const ContextTerms& t = lookup(ex.context);
    const double coefficient = dot_indicator(t.weights, ex.slate, space);
    values[i] = ex.reward * coefficient;
    if (options_.delta) {
      sigma_terms[i] = t.sigma_term;
      rho = std::max(rho, std::abs(coefficient));
    }
  }

  EstimatorReport report;
  report.kind = EstimatorKind::PI;
  report.n = n;
  report.estimate = mean_of(values);
  if (options_.delta) {
    ReportDiagnostics d;
    d.sigma_sq = mean_of(sigma_terms);
    d.rho = rho;
    d.delta = *options_.delta;
    d.bound = bernstein_bound(d.sigma_sq, d.rho, n, d.delta);
    report.diagnostics = d;
  }
  return report;
}

EstimatorReport estimate_pi(std::span<const LoggedExample> data, const Policy& logging, const Policy& target,
                            const SlateSpaces& spaces, const PiOptions& options) {
  require_nonempty(data);
  PseudoinverseEstimator estimator(logging, target, spaces, options);
  const auto contexts = distinct_contexts(data);
  estimator.prepare(contexts);
  return estimator.estimate(data);
}

EstimatorReport estimate_ips(std::span<const LoggedExample> data, const Policy& logging, const Policy& target,
                             const SlateSpaces& spaces) {
  require_nonempty(data);
  auto weights = importance_weights(data, logging, target, spaces);
  for (std::size_t i = 0; i < data.size(); ++i) weights[i] *= data[i].reward;
  EstimatorReport report;
  report.kind = EstimatorKind::IPS;
  report.n = data.size();
  report.estimate = mean_of(weights);
  return report;
}

EstimatorReport estimate_wips(std::span<const LoggedExample> data, const Policy& logging, const Policy& target,
                              const SlateSpaces& spaces) {
  require_nonempty(data);
  const auto weights = importance_weights(data, logging, target, spaces);
  std::vector<double> weighted(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) weighted[i] = weights[i] * data[i].reward;
  const double total_weight = pairwise_sum(weights);
  if (!(total_weight > 0.0)) throw UndefinedEstimateError("wIPS undefined: every importance weight is zero");
  EstimatorReport report;
  report.kind = EstimatorKind::WIPS;
  report.n = data.size();
  report.estimate = pairwise_sum(weighted) / total_weight;
  return report;
}

std::vector<double> RewardModel::slate_features(const ContextId& context, const Slate& slate,
                                                const FeatureTable& features) const {
  std::vector<double> x;
  x.reserve(num_slots * feature_dim);
  for (int j = 0; j < num_slots; ++j) {
    const auto f = features.features(context, j, slate[j]);
    x.insert(x.end(), f.begin(), f.end());
  }
  return x;
}

double RewardModel::predict(const ContextId& context, const Slate& slate, const FeatureTable& features) const {
  return std::clamp(model.predict(std::span<const double>(slate_features(context, slate, features))), -1.0, 1.0);
}

RewardModel fit_dm(std::span<const LoggedExample> train, const FeatureTable& features, double lambda) {
  require_nonempty(train);
  RewardModel rm;
  rm.num_slots = static_cast<int>(train.front().slate.size());
  rm.feature_dim = features.dim();
  RidgeAccumulator acc(rm.num_slots * rm.feature_dim, 1);
  for (const auto& ex : train) {
    if (static_cast<int>(ex.slate.size()) != rm.num_slots) throw ValidationError("DM training slates differ in length");
    acc.add(rm.slate_features(ex.context, ex.slate, features), ex.reward);
  }
  rm.model = acc.fit(std::max(lambda, kMinRidge));
  return rm;
}

EstimatorReport estimate_dm(const RewardModel& model, std::span<const LoggedExample> eval, const Policy& target,
                            const SlateSpaces& spaces, const FeatureTable& features, const MomentOptions& options) {
  require_nonempty(eval);
  // Per-context value is shared by every example of that context.
  ContextMap<double> value_cache;
  std::vector<double> values(eval.size());
  for (std::size_t i = 0; i < eval.size(); ++i) {
    const ContextId& context = eval[i].context;
    auto it = value_cache.find(context);
    if (it == value_cache.end()) {
      const SlateSpace& space = spaces.at(context);
      double value = 0.0;
      if (auto support = target.exact_support(context, space, options.enumeration_cap)) {
        std::vector<double> parts;
        parts.reserve(support->size());
        for (const auto& ws : *support) parts.push_back(ws.probability * model.predict(context, ws.slate, features));
        value = pairwise_sum(parts);
      } else {
        if (options.indicator_samples == 0) throw ConfigError("DM Monte Carlo requested with zero samples");
        Rng rng(context_seed(options, context, 4));
        std::vector<double> parts(options.indicator_samples);
        for (auto& p : parts) p = model.predict(context, target.sample(context, space, rng), features);
        value = mean_of(parts);
      }
      it = value_cache.emplace(context, value).first;
    }
    values[i] = it->second;
  }
  EstimatorReport report;
  report.kind = EstimatorKind::DM;
  report.n = eval.size();
  report.estimate = mean_of(values);
  return report;
}

EstimatorReport estimate_onpolicy(const Policy& target, const BanditEnvironment& env, std::size_t n, Rng& rng) {
  if (n == 0) throw ConfigError("on-policy estimate needs n >= 1");
  std::vector<double> rewards(n);
  for (auto& r : rewards) {
    const ContextId context = env.sample_context(rng);
    const Slate slate = target.sample(context, env.space(context), rng);
    r = env.reward(context, slate, rng);
  }
  EstimatorReport report;
  report.kind = EstimatorKind::OnPolicy;
  report.n = n;
  report.estimate = mean_of(rewards);
  return report;
}

std::pair<std::span<const LoggedExample>, std::span<const LoggedExample>> split_half(
    std::span<const LoggedExample> data) {
  const std::size_t half = data.size() / 2;
  return {data.first(half), data.subspan(half)};
}

}  // namespace slateval
