#include <algorithm>
#include <cmath>
#include <ostream>

#include "slateval/error.hpp"
#include "slateval/numeric.hpp"
#include "slateval/semisynth.hpp"

namespace slateval {

namespace {

std::vector<LoggedExample> draw_logs(const BanditInstance& instance, std::size_t n, Rng& rng) {
  std::vector<LoggedExample> logs;
  logs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ContextId ctx = instance.sample_context(rng);
    Slate slate = instance.logging().sample(ctx, instance.space(ctx), rng);
    const double r = instance.reward(ctx, slate, rng);
    logs.push_back({std::move(ctx), std::move(slate), r});
  }
  return logs;
}

}  // namespace

SweepResult run_rmse_sweep(const BanditInstance& instance, const ExperimentConfig& config) {
  if (config.runs == 0) throw ConfigError("runs must be at least 1");
  if (config.n_grid.empty()) throw ConfigError("n_grid is empty");
  for (std::size_t n : config.n_grid) {
    if (n == 0) throw ConfigError("n_grid entries must be positive");
  }

  SweepResult result;
  result.true_value = instance.target_value();

  const bool wants_pi =
      std::find(config.estimators.begin(), config.estimators.end(), EstimatorKind::PI) != config.estimators.end();
  PiOptions pi_options;
  pi_options.moments = config.moments;
  pi_options.threads = config.threads;
  PseudoinverseEstimator pi(instance.logging(), instance.target(), instance.spaces(), pi_options);
  if (wants_pi) pi.prepare(instance.contexts());

  const IntrinsicOracle intrinsics = [&instance](const ContextId& ctx, int slot, int action) {
    return instance.intrinsic(ctx, slot, action);
  };

  const std::size_t tasks = config.n_grid.size() * config.runs;
  std::vector<std::vector<SweepRow>> slots(tasks);
  parallel_for(tasks, config.threads, [&](std::size_t task) {
    const std::size_t n = config.n_grid[task / config.runs];
    const std::size_t run = task % config.runs;
    Rng rng(derive_seed(config.seed, run, n));
    const auto logs = draw_logs(instance, n, rng);
    auto& out = slots[task];
    for (EstimatorKind kind : config.estimators) {
      SweepRow row{kind, n, run, 0.0, 0.0, false};
      try {
        switch (kind) {
          case EstimatorKind::PI:
            row.estimate = pi.estimate(logs).estimate;
            break;
          case EstimatorKind::IPS:
            row.estimate = estimate_ips(logs, instance.logging(), instance.target(), instance.spaces()).estimate;
            break;
          case EstimatorKind::WIPS:
            row.estimate = estimate_wips(logs, instance.logging(), instance.target(), instance.spaces()).estimate;
            break;
          case EstimatorKind::DM: {
            auto [train, eval] = split_half(logs);
            if (train.empty() || eval.empty()) throw ConfigError("DM needs n >= 2");
            const RewardModel model = fit_dm(train, instance, config.dm_lambda);
            row.estimate =
                estimate_dm(model, eval, instance.target(), instance.spaces(), instance, config.moments).estimate;
            break;
          }
          case EstimatorKind::OnPolicy: {
            Rng on_rng(derive_seed(config.seed, run, n, 7));
            row.estimate = estimate_onpolicy(instance.target(), instance, n, on_rng).estimate;
            break;
          }
          case EstimatorKind::SB:
            row.estimate = estimate_sb(logs, intrinsics, instance.logging(), instance.target(), instance.spaces(),
                                       config.moments)
                               .estimate;
            break;
          case EstimatorKind::WSB:
            row.estimate = estimate_wsb(logs, intrinsics, instance.logging(), instance.target(), instance.spaces(),
                                        config.moments)
                               .estimate;
            break;
        }
      } catch (const UndefinedEstimateError&) {
        row.estimate = 0.0;
        row.undefined = true;
      }
      const double err = row.estimate - result.true_value;
      row.squared_error = err * err;
      out.push_back(row);
    }
  });

  for (auto& task_rows : slots) {
    for (auto& row : task_rows) result.rows.push_back(row);
  }
  return result;
}

std::vector<AggregateRow> SweepResult::aggregate() const {
  std::vector<EstimatorKind> kinds;
  std::vector<std::size_t> ns;
  for (const auto& row : rows) {
    if (std::find(kinds.begin(), kinds.end(), row.estimator) == kinds.end()) kinds.push_back(row.estimator);
    if (std::find(ns.begin(), ns.end(), row.n) == ns.end()) ns.push_back(row.n);
  }
  std::vector<AggregateRow> out;
  for (EstimatorKind kind : kinds) {
    for (std::size_t n : ns) {
      std::vector<double> errors;
      for (const auto& row : rows) {
        if (row.estimator == kind && row.n == n) errors.push_back(row.squared_error);
      }
      if (errors.empty()) continue;
      const double mse = mean_of(errors);
      const double rmse = std::sqrt(mse);
      double stderr_rmse = 0.0;
      if (errors.size() > 1 && rmse > 0.0) {
        std::vector<double> dev;
        for (double e : errors) dev.push_back((e - mse) * (e - mse));
        const double var = pairwise_sum(dev) / static_cast<double>(errors.size() - 1);
        stderr_rmse = std::sqrt(var / static_cast<double>(errors.size())) / (2.0 * rmse);
      }
      out.push_back({kind, n, rmse, stderr_rmse});
    }
  }
  return out;
}

double SweepResult::rmse(EstimatorKind estimator, std::size_t n) const {
  for (const auto& row : aggregate()) {
    if (row.estimator == estimator && row.n == n) return row.rmse;
  }
  throw LookupError(std::string("no sweep rows for ") + to_string(estimator) + " at n=" + std::to_string(n));
}

void write_runs_csv(std::ostream& out, const SweepResult& result) {
  out << "estimator,n,run,estimate,squared_error,undefined\n";
  for (const auto& row : result.rows) {
    out << to_string(row.estimator) << ',' << row.n << ',' << row.run << ',' << format_double(row.estimate) << ','
        << format_double(row.squared_error) << ',' << (row.undefined ? 1 : 0) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows) {
  out << "estimator,n,rmse,stderr\n";
  for (const auto& row : rows) {
    out << to_string(row.estimator) << ',' << row.n << ',' << format_double(row.rmse) << ','
        << format_double(row.stderr_rmse) << '\n';
  }
}

namespace {

std::vector<EstimatorKind> kinds_in_order(std::span<const AggregateRow> rows) {
  std::vector<EstimatorKind> kinds;
  for (const auto& row : rows) {
    if (std::find(kinds.begin(), kinds.end(), row.estimator) == kinds.end()) kinds.push_back(row.estimator);
  }
  return kinds;
}

}  // namespace

void write_rmse_plot_data(std::ostream& out, std::span<const AggregateRow> rows) {
  bool first = true;
  for (EstimatorKind kind : kinds_in_order(rows)) {
    if (!first) out << "\n\n";
    first = false;
    out << "# " << to_string(kind) << "\n";
    for (const auto& row : rows) {
      if (row.estimator == kind) out << row.n << ' ' << format_double(row.rmse) << ' ' << format_double(row.stderr_rmse) << '\n';
    }
  }
}

void write_rmse_plot_script(std::ostream& out, std::span<const AggregateRow> rows, const std::string& data_file) {
  out << "set logscale xy\n"
      << "set xlabel 'number of logged examples n'\n"
      << "set ylabel 'RMSE'\n"
      << "set key top right\n"
      << "set terminal pngcairo size 800,600\n"
      << "set output 'rmse.png'\n"
      << "plot ";
  const auto kinds = kinds_in_order(rows);
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (i) out << ", \\\n     ";
    out << "'" << data_file << "' index " << i << " using 1:2:3 with yerrorlines title '" << to_string(kinds[i]) << "'";
  }
  out << '\n';
}

}  // namespace slateval
