#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace slateval {

/// Smallest ridge strength ever used; singular systems escalate from here.
inline constexpr double kMinRidge = 1e-6;
/// Default cross-validation grid for ridge strength.
inline const std::vector<double> kRidgeGrid = {0.01, 0.1, 1.0, 10.0};

/// Linear model y ≈ intercept + weights·x.
struct LinearModel {
  double intercept = 0.0;
  Eigen::VectorXd weights;
  double lambda = 0.0;

  double predict(std::span<const double> x) const;
  double predict(const Eigen::VectorXd& x) const { return intercept + weights.dot(x); }
};

/// Sufficient statistics of a least-squares problem with an intercept column,
/// split into folds. Fold of a row = row index mod folds.
class RidgeAccumulator {
 public:
  RidgeAccumulator(std::size_t num_features, std::size_t num_folds = 5);

  std::size_t num_features() const { return num_features_; }
  std::size_t num_folds() const { return folds_.size(); }
  std::size_t rows() const { return rows_; }

  /// Adds the next row (fold chosen by running row index).
  void add(std::span<const double> x, double y);
  /// Adds `count` identical feature rows with targets summing to sum_y
  /// (and squares summing to sum_yy) into a given fold.
  void add_aggregate(std::span<const double> x, std::size_t fold, double count, double sum_y, double sum_yy);
  /// Counts a row index as consumed without contributing data.
  void skip_row() { ++rows_; }

  /// Ridge fit on all folds; intercept unpenalized. Raises lambda ×10 from
  /// max(lambda, kMinRidge) until the system solves.
  LinearModel fit(double lambda) const;
  /// Chooses lambda by k-fold cross-validated squared error (ties to the earlier
  /// grid entry), then refits on all rows.
  LinearModel fit_cv(std::span<const double> grid) const;

  struct Fold {
    Eigen::MatrixXd xtx;  // augmented with leading intercept column
    Eigen::VectorXd xty;
    double yty = 0.0;
    double count = 0.0;
  };

 private:
  static LinearModel solve(const Fold& stats, double lambda);
  static double squared_error(const Fold& stats, const LinearModel& model);

  std::size_t num_features_;
  std::vector<Fold> folds_;
  std::size_t rows_ = 0;
  Eigen::VectorXd scratch_;
};

}  // namespace slateval
