#include "slateval/ridge.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "slateval/error.hpp"

namespace slateval {

double LinearModel::predict(std::span<const double> x) const {
  double y = intercept;
  for (std::size_t i = 0; i < x.size(); ++i) y += weights[static_cast<Eigen::Index>(i)] * x[i];
  return y;
}

RidgeAccumulator::RidgeAccumulator(std::size_t num_features, std::size_t num_folds)
    : num_features_(num_features), folds_(num_folds == 0 ? 1 : num_folds), scratch_(num_features + 1) {
  const auto p = static_cast<Eigen::Index>(num_features + 1);
  for (auto& fold : folds_) {
    fold.xtx = Eigen::MatrixXd::Zero(p, p);
    fold.xty = Eigen::VectorXd::Zero(p);
  }
}

void RidgeAccumulator::add(std::span<const double> x, double y) {
  add_aggregate(x, rows_ % folds_.size(), 1.0, y, y * y);
  ++rows_;
}

void RidgeAccumulator::add_aggregate(std::span<const double> x, std::size_t fold, double count, double sum_y,
                                     double sum_yy) {
  if (x.size() != num_features_) throw ValidationError("ridge row has the wrong number of features");
  scratch_[0] = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) scratch_[static_cast<Eigen::Index>(i + 1)] = x[i];
  Fold& f = folds_[fold % folds_.size()];
  f.xtx.selfadjointView<Eigen::Lower>().rankUpdate(scratch_, count);
  f.xty += sum_y * scratch_;
  f.yty += sum_yy;
  f.count += count;
}

LinearModel RidgeAccumulator::solve(const Fold& stats, double lambda) {
  if (stats.count <= 0.0) throw ValidationError("ridge regression needs at least one row");
  const Eigen::Index p = stats.xtx.rows();
  Eigen::MatrixXd gram = stats.xtx.selfadjointView<Eigen::Lower>();
  double strength = std::max(lambda, kMinRidge);
  for (int attempt = 0; attempt < 40; ++attempt, strength *= 10.0) {
    Eigen::MatrixXd system = gram;
    system.diagonal().tail(p - 1).array() += strength;
    Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() != Eigen::Success) continue;
    Eigen::VectorXd beta = llt.solve(stats.xty);
    if (!beta.allFinite()) continue;
    LinearModel model;
    model.intercept = beta[0];
    model.weights = beta.tail(p - 1);
    model.lambda = strength;
    return model;
  }
  throw std::runtime_error("ridge normal equations could not be solved");
}

double RidgeAccumulator::squared_error(const Fold& stats, const LinearModel& model) {
  const Eigen::Index p = stats.xtx.rows();
  Eigen::VectorXd beta(p);
  beta[0] = model.intercept;
  beta.tail(p - 1) = model.weights;
  const Eigen::MatrixXd gram = stats.xtx.selfadjointView<Eigen::Lower>();
  return stats.yty - 2.0 * beta.dot(stats.xty) + beta.dot(gram * beta);
}

LinearModel RidgeAccumulator::fit(double lambda) const {
  Fold total = folds_[0];
  for (std::size_t k = 1; k < folds_.size(); ++k) {
    total.xtx += folds_[k].xtx;
    total.xty += folds_[k].xty;
    total.yty += folds_[k].yty;
    total.count += folds_[k].count;
  }
  return solve(total, lambda);
}

LinearModel RidgeAccumulator::fit_cv(std::span<const double> grid) const {
  if (grid.empty()) throw ConfigError("ridge grid is empty");
  Fold total = folds_[0];
  for (std::size_t k = 1; k < folds_.size(); ++k) {
    total.xtx += folds_[k].xtx;
    total.xty += folds_[k].xty;
    total.yty += folds_[k].yty;
    total.count += folds_[k].count;
  }
  double best_lambda = grid[0];
  double best_error = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    double error = 0.0;
    bool usable = true;
    for (const Fold& held : folds_) {
      if (held.count <= 0.0) continue;
      Fold train = total;
      train.xtx -= held.xtx;
      train.xty -= held.xty;
      train.yty -= held.yty;
      train.count -= held.count;
      if (train.count <= 0.0) {
        usable = false;
        break;
      }
      error += squared_error(held, solve(train, lambda));
    }
    if (usable && error < best_error) {
      best_error = error;
      best_lambda = lambda;
    }
  }
  return solve(total, best_lambda);
}

}  // namespace slateval
