#pragma once

#include <cstddef>
#include <iosfwd>

#include <Eigen/Core>

#include "slateval/policy.hpp"
#include "slateval/slate.hpp"

namespace slateval {

enum class GammaProvenance { Enumerated, MonteCarlo, ClosedFormUniformCartesian, ClosedFormUniformRanking };

const char* to_string(GammaProvenance provenance);

/// Second-moment matrix Γ_{μ,x} = E_μ[1_s 1_s^T | x].
struct GammaMatrix {
  Eigen::MatrixXd entries;
  GammaProvenance provenance = GammaProvenance::Enumerated;
  std::size_t sample_count = 0;

  int dim() const { return static_cast<int>(entries.rows()); }
};

struct PseudoInverse {
  Eigen::MatrixXd entries;
  int rank = 0;
  double singular_cutoff = 0.0;
};

/// Relative cutoff: eigenvalues below this times λ_max are treated as zero.
inline constexpr double kRelativeSingularCutoff = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-8;

/// Γ for one context. Monte Carlo estimates are symmetrized and clipped to PSD.
GammaMatrix build_gamma(const Policy& policy, const ContextId& context, const SlateSpace& space,
                        const MomentOptions& options = {});

/// Moore–Penrose pseudoinverse of a symmetric PSD matrix via symmetric eigendecomposition.
/// Throws ValidationError when the input is asymmetric beyond 1e-8.
PseudoInverse pinv_numeric(const Eigen::MatrixXd& matrix, double relative_cutoff = kRelativeSingularCutoff);
PseudoInverse pinv_numeric(const GammaMatrix& gamma, double relative_cutoff = kRelativeSingularCutoff);

/// Closed-form Γ† of the uniform policy on a Cartesian product space.
PseudoInverse pinv_uniform_cartesian(const SlateSpace& space);
/// Closed-form Γ† of the uniform policy on a ranking space (separate l < m and l = m forms).
PseudoInverse pinv_uniform_ranking(const SlateSpace& space);

/// Γ† for a policy/context: closed form when the policy is uniform, numeric otherwise.
PseudoInverse pseudo_inverse_for(const Policy& policy, const ContextId& context, const SlateSpace& space,
                                 const MomentOptions& options = {});

/// Row-major text: "<rows> <cols>" header then one row per line, 17 significant digits.
void write_matrix(std::ostream& out, const Eigen::MatrixXd& matrix);
Eigen::MatrixXd read_matrix(std::istream& in);

}  // namespace slateval
