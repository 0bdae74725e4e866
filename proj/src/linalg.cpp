#include "slateval/linalg.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "slateval/error.hpp"

namespace slateval {

const char* to_string(GammaProvenance provenance) {
  switch (provenance) {
    case GammaProvenance::Enumerated: return "enumerated";
    case GammaProvenance::MonteCarlo: return "monte_carlo";
    case GammaProvenance::ClosedFormUniformCartesian: return "closed_form_uniform_cartesian";
    case GammaProvenance::ClosedFormUniformRanking: return "closed_form_uniform_ranking";
  }
  return "unknown";
}

GammaMatrix build_gamma(const Policy& policy, const ContextId& context, const SlateSpace& space,
                        const MomentOptions& options) {
  SlateMoments moments = slate_moments(policy, context, space, options);
  GammaMatrix gamma;
  gamma.sample_count = moments.sample_count;
  switch (moments.source) {
    case MomentSource::Enumerated: gamma.provenance = GammaProvenance::Enumerated; break;
    case MomentSource::ClosedFormUniform:
      gamma.provenance = space.kind() == SpaceKind::Ranking ? GammaProvenance::ClosedFormUniformRanking
                                                            : GammaProvenance::ClosedFormUniformCartesian;
      break;
    case MomentSource::MonteCarlo: {
      gamma.provenance = GammaProvenance::MonteCarlo;
      Eigen::MatrixXd sym = 0.5 * (moments.second + moments.second.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
      Eigen::VectorXd values = eig.eigenvalues().cwiseMax(0.0);
      const Eigen::MatrixXd psd = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
      moments.second = 0.5 * (psd + psd.transpose());
      break;
    }
  }
  gamma.entries = std::move(moments.second);
  return gamma;
}

PseudoInverse pinv_numeric(const Eigen::MatrixXd& matrix, double relative_cutoff) {
  if (matrix.rows() != matrix.cols()) throw ValidationError("pseudoinverse input must be square");
  const double asymmetry = matrix.rows() ? (matrix - matrix.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asymmetry > kSymmetryTolerance) {
    throw ValidationError("pseudoinverse input is not symmetric (max asymmetry " + std::to_string(asymmetry) + ")");
  }
  PseudoInverse out;
  const Eigen::Index n = matrix.rows();
  out.entries = Eigen::MatrixXd::Zero(n, n);
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (matrix + matrix.transpose()));
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double top = values.maxCoeff();
  if (top <= 0.0) return out;
  out.singular_cutoff = relative_cutoff * top;
  Eigen::VectorXd inverted = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (values[i] > out.singular_cutoff) {
      inverted[i] = 1.0 / values[i];
      ++out.rank;
    }
  }
  const Eigen::MatrixXd& vectors = eig.eigenvectors();
  const Eigen::MatrixXd raw = vectors * inverted.asDiagonal() * vectors.transpose();
  out.entries = 0.5 * (raw + raw.transpose());
  return out;
}

PseudoInverse pinv_numeric(const GammaMatrix& gamma, double relative_cutoff) {
  return pinv_numeric(gamma.entries, relative_cutoff);
}

PseudoInverse pinv_uniform_cartesian(const SlateSpace& space) {
  if (space.kind() != SpaceKind::CartesianProduct) throw ValidationError("pinv_uniform_cartesian needs a Cartesian space");
  const int dim = space.dim();
  const int slots = space.num_slots();
  double inv_sum = 0.0;
  for (int j = 0; j < slots; ++j) inv_sum += 1.0 / space.num_actions(j);
  const double scale = 1.0 / (inv_sum * inv_sum);

  PseudoInverse out;
  out.entries.resize(dim, dim);
  out.rank = 1;
  for (int j = 0; j < slots; ++j) {
    const int mj = space.num_actions(j);
    out.rank += mj - 1;
    for (int a = 0; a < mj; ++a) {
      for (int k = 0; k < slots; ++k) {
        const int mk = space.num_actions(k);
        for (int b = 0; b < mk; ++b) {
          double value = scale / (double(mj) * mk);
          if (j == k) value += (a == b ? mj : 0) - 1.0;
          out.entries(space.coord(j, a), space.coord(k, b)) = value;
        }
      }
    }
  }
  return out;
}

PseudoInverse pinv_uniform_ranking(const SlateSpace& space) {
  if (space.kind() != SpaceKind::Ranking) throw ValidationError("pinv_uniform_ranking needs a ranking space");
  const int slots = space.num_slots();
  const int m = space.num_actions(0);
  const double md = m;
  const double ld = slots;
  const int dim = space.dim();

  PseudoInverse out;
  out.entries.resize(dim, dim);
  if (slots < m) {
    // (1/l² − (m−1)/(m(m−l))) 11ᵀ + (m−1) I − ((m−1)/m) Σ_j 1_j1_jᵀ + ((m−1)/(m−l)) Σ_a 1_a1_aᵀ
    const double all = 1.0 / (ld * ld) - (md - 1.0) / (md * (md - ld));
    const double same_slot = -(md - 1.0) / md;
    const double same_action = (md - 1.0) / (md - ld);
    for (int j = 0; j < slots; ++j) {
      for (int a = 0; a < m; ++a) {
        for (int k = 0; k < slots; ++k) {
          for (int b = 0; b < m; ++b) {
            double value = all;
            if (j == k) value += same_slot;
            if (a == b) value += same_action;
            if (j == k && a == b) value += md - 1.0;
            out.entries(space.coord(j, a), space.coord(k, b)) = value;
          }
        }
      }
    }
    out.rank = slots * (m - 1) + 1;
  } else {
    // (1/m) 11ᵀ + (m−1) I − ((m−1)/m) Σ_j 1_j1_jᵀ − ((m−1)/m) Σ_a 1_a1_aᵀ
    const double all = 1.0 / md;
    const double shared = -(md - 1.0) / md;
    for (int j = 0; j < slots; ++j) {
      for (int a = 0; a < m; ++a) {
        for (int k = 0; k < slots; ++k) {
          for (int b = 0; b < m; ++b) {
            double value = all;
            if (j == k) value += shared;
            if (a == b) value += shared;
            if (j == k && a == b) value += md - 1.0;
            out.entries(space.coord(j, a), space.coord(k, b)) = value;
          }
        }
      }
    }
    out.rank = (m - 1) * (m - 1) + 1;
  }
  return out;
}

PseudoInverse pseudo_inverse_for(const Policy& policy, const ContextId& context, const SlateSpace& space,
                                 const MomentOptions& options) {
  if (policy.is_uniform()) {
    return space.kind() == SpaceKind::Ranking ? pinv_uniform_ranking(space) : pinv_uniform_cartesian(space);
  }
  return pinv_numeric(build_gamma(policy, context, space, options));
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& matrix) {
  out << matrix.rows() << ' ' << matrix.cols() << '\n';
  char buffer[32];
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      std::snprintf(buffer, sizeof buffer, "%.17g", matrix(i, j));
      if (j) out << ' ';
      out << buffer;
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix(std::istream& in) {
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) throw ParseError("bad matrix header");
  Eigen::MatrixXd matrix(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> matrix(i, j))) throw ParseError("matrix truncated at row " + std::to_string(i), i + 2);
    }
  }
  return matrix;
}

}  // namespace slateval
