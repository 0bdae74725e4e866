#include "slateval/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slateval/error.hpp"
#include "slateval/linalg.hpp"
#include "slateval/numeric.hpp"

namespace slateval {

namespace {

constexpr double kTranslationTolerance = 1e-8;

std::string fmt(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", v);
  return buffer;
}

}  // namespace

double bernstein_bound(double sigma_sq, double rho, std::size_t n, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (n == 0) throw ConfigError("bound needs n >= 1");
  const double log_term = std::log(2.0 / delta);
  const double nd = static_cast<double>(n);
  return std::sqrt(2.0 * sigma_sq * log_term / nd) + 2.0 * (rho + 1.0) * log_term / (3.0 * nd);
}

std::string OverlapProfile::key_value_block() const {
  std::ostringstream out;
  out << "sigma_sq=" << fmt(sigma_sq) << "\nrho=" << fmt(rho) << "\nrho_bar=" << fmt(rho_bar) << '\n';
  if (kappa) out << "kappa=" << fmt(*kappa) << '\n';
  return out.str();
}

std::string OverlapProfile::csv_header() { return "sigma_sq,rho,rho_bar,kappa"; }

std::string OverlapProfile::csv_row() const {
  return format_double(sigma_sq) + ',' + format_double(rho) + ',' + format_double(rho_bar) + ',' +
         (kappa ? format_double(*kappa) : std::string());
}

double compute_sigma_sq(std::span<const ContextId> contexts, const Policy& logging, const Policy& target,
                        const SlateSpaces& spaces, const MomentOptions& options) {
  if (contexts.empty()) throw ValidationError("sigma_sq needs at least one context");
  std::vector<double> terms;
  terms.reserve(contexts.size());
  for (const auto& context : contexts) {
    const SlateSpace& space = spaces.at(context);
    const Eigen::VectorXd q = mean_indicator(target, context, space, options);
    const PseudoInverse pinv = pseudo_inverse_for(logging, context, space, options);
    terms.push_back(q.dot(pinv.entries * q));
  }
  return mean_of(terms);
}

double compute_rho(std::span<const ContextId> contexts, const Policy& logging, const Policy& target,
                   const SlateSpaces& spaces, const MomentOptions& options) {
  double rho = 0.0;
  for (const auto& context : contexts) {
    const SlateSpace& space = spaces.at(context);
    const Eigen::VectorXd q = mean_indicator(target, context, space, options);
    const Eigen::VectorXd weights = pseudo_inverse_for(logging, context, space, options).entries * q;
    for (const Slate& slate : support_slates(logging, context, space, options)) {
      rho = std::max(rho, std::abs(dot_indicator(weights, slate, space)));
    }
  }
  return rho;
}

double compute_rho_bar(const Policy& logging, const ContextId& context, const SlateSpace& space,
                       const MomentOptions& options) {
  const PseudoInverse pinv = pseudo_inverse_for(logging, context, space, options);
  double best = 0.0;
  for (const Slate& slate : support_slates(logging, context, space, options)) {
    const auto coords = indicator_coords(slate, space);
    double value = 0.0;
    for (int a : coords) {
      for (int b : coords) value += pinv.entries(a, b);
    }
    best = std::max(best, value);
  }
  return best;
}

double kappa_of(const Policy& logging, const ContextId& context, const SlateSpace& space,
                const std::optional<Policy>& reference, const MomentOptions& options) {
  const Policy ref = reference ? *reference : Policy::uniform();
  const Eigen::MatrixXd mine = slate_moments(logging, context, space, options).second;
  const Eigen::MatrixXd theirs = slate_moments(ref, context, space, options).second;
  double kappa = 1.0;
  for (Eigen::Index i = 0; i < mine.rows(); ++i) {
    for (Eigen::Index j = 0; j < mine.cols(); ++j) {
      if (theirs(i, j) > 0.0) kappa = std::min(kappa, mine(i, j) / theirs(i, j));
    }
  }
  return std::max(kappa, 0.0);
}

TranslationCheck check_translation(const Policy& logging, const Policy& reference, const ContextId& context,
                                   const SlateSpace& space, const MomentOptions& options) {
  for (const Slate& slate : support_slates(logging, context, space, options)) {
    if (reference.slate_prob(context, slate, space) <= 0.0) {
      throw ValidationError("logging policy is not absolutely continuous with respect to the reference at slate (" +
                            format_slate(slate) + ")");
    }
  }
  TranslationCheck check;
  check.kappa = kappa_of(logging, context, space, reference, options);
  check.lhs = check.kappa * compute_rho_bar(logging, context, space, options);
  check.rhs = compute_rho_bar(reference, context, space, options);
  check.holds = check.lhs <= check.rhs + kTranslationTolerance * std::max(1.0, check.rhs);
  return check;
}

OverlapProfile overlap_profile(std::span<const ContextId> contexts, const Policy& logging, const Policy& target,
                               const SlateSpaces& spaces, const MomentOptions& options) {
  OverlapProfile profile;
  profile.sigma_sq = compute_sigma_sq(contexts, logging, target, spaces, options);
  profile.rho = compute_rho(contexts, logging, target, spaces, options);
  double kappa = 1.0;
  for (const auto& context : contexts) {
    const SlateSpace& space = spaces.at(context);
    profile.rho_bar = std::max(profile.rho_bar, compute_rho_bar(logging, context, space, options));
    kappa = std::min(kappa, kappa_of(logging, context, space, std::nullopt, options));
  }
  profile.kappa = kappa;
  return profile;
}

}  // namespace slateval
