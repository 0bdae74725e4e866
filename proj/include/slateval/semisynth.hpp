#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "slateval/estimators.hpp"
#include "slateval/policy.hpp"
#include "slateval/ridge.hpp"
#include "slateval/slate.hpp"

namespace slateval {

// ---------------------------------------------------------------------------
// Learning-to-rank data

struct RankedDocument {
  std::string doc_id;
  int relevance = 0;
  std::vector<double> features;
  /// Text after '#', kept verbatim for serialization.
  std::string comment;
};

struct RankedQuery {
  std::string query_id;
  std::vector<RankedDocument> documents;
};

struct RankingDataset {
  std::vector<RankedQuery> queries;
  std::size_t feature_dim = 0;

  std::size_t num_documents() const;
};

/// Parses `<rel> qid:<id> <k>:<v> ... # <comment>` lines (features 1-indexed in the file).
/// Documents are grouped by qid in order of first appearance. The doc id is the value
/// after "docid =" in the comment, else the whole comment, else "<qid>#<ordinal>".
RankingDataset parse_letor(std::istream& in);
RankingDataset load_letor(const std::string& path);
/// Canonical dense form; parse_letor(write_letor(d)) == d.
void write_letor(std::ostream& out, const RankingDataset& dataset);

struct SyntheticConfig {
  std::size_t num_queries = 300;
  std::size_t min_docs = 20;
  std::size_t max_docs = 40;
  std::size_t num_features = 40;
  /// Std-dev of the noise added to the planted linear relevance score.
  double label_noise = 0.5;
  std::uint64_t seed = 1;
};

/// Random Gaussian features with relevance thresholded from a planted linear score.
RankingDataset generate_synthetic(const SyntheticConfig& config);

// ---------------------------------------------------------------------------
// Score models

/// Half-open feature index range [begin, end).
struct FeatureBlock {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

/// Title block defaults to the first 20 features, body to the remainder.
struct FeatureBlocks {
  FeatureBlock title{0, 20};
  FeatureBlock body{20, 0};  // end 0 = feature_dim

  FeatureBlocks resolved(std::size_t feature_dim) const;
};

/// Linear relevance predictor over one feature block.
struct ScoreModel {
  FeatureBlock block;
  LinearModel model;

  double score(std::span<const double> features) const;
};

/// Ridge on the block to relevance; strength by 5-fold CV over kRidgeGrid.
ScoreModel fit_score_model(const RankingDataset& dataset, FeatureBlock block);

// ---------------------------------------------------------------------------
// Bandit instance

struct InstanceConfig {
  int m = 10;
  int l = 3;
  double alpha = 0.0;
  /// Replace the NDCG reward with a Bernoulli(NDCG) draw.
  bool reward_jitter = false;
};

/// Semi-synthetic ranking bandit: per query a candidate pool (top-m by title score),
/// α-multinomial logging over the pool and a deterministic body-score target.
class BanditInstance final : public BanditEnvironment, public FeatureTable {
 public:
  struct Pool {
    ContextId context;
    std::vector<std::string> doc_ids;  // by action id
    std::vector<int> relevance;
    std::vector<std::vector<double>> features;
    std::vector<double> title_scores;
    Slate target_slate;
    double ideal_dcg = 0.0;
  };

  BanditInstance(std::vector<Pool> pools, int num_slots, InstanceConfig config, std::size_t dropped_queries);

  const std::vector<ContextId>& contexts() const { return contexts_; }
  const Pool& pool(const ContextId& context) const;
  const SlateSpaces& spaces() const { return spaces_; }
  const Policy& logging() const { return logging_; }
  const Policy& target() const { return target_; }
  int num_slots() const { return num_slots_; }
  const InstanceConfig& config() const { return config_; }
  /// Queries skipped because they had fewer than l documents.
  std::size_t dropped_queries() const { return dropped_; }

  /// Intrinsic value (2^rel − 1) / (log2(j+2) DCG*) for zero-based slot j; 0 when DCG* = 0.
  double intrinsic(const ContextId& context, int slot, int action) const;
  /// DCG/DCG*, 0 when every pool relevance is 0.
  double ndcg(const ContextId& context, const Slate& slate) const;

  /// V(π) of the deterministic target, averaged uniformly over queries.
  double target_value() const;
  /// V(policy) = mean over queries of q_policyᵀ φ_x.
  double policy_value(const Policy& policy, const MomentOptions& options = {}) const;

  ContextId sample_context(Rng& rng) const override;
  const SlateSpace& space(const ContextId& context) const override { return spaces_.at(context); }
  double reward(const ContextId& context, const Slate& slate, Rng& rng) const override;

  std::size_t dim() const override { return feature_dim_; }
  std::span<const double> features(const ContextId& context, int slot, int action) const override;

 private:
  std::vector<Pool> pools_;
  std::vector<ContextId> contexts_;
  ContextMap<std::size_t> index_;
  SlateSpaces spaces_;
  Policy logging_;
  Policy target_;
  int num_slots_;
  InstanceConfig config_;
  std::size_t feature_dim_ = 0;
  std::size_t dropped_;
};

/// Standalone NDCG for a pool's relevances.
double ndcg_reward(const BanditInstance& instance, const ContextId& query, const Slate& slate);

BanditInstance build_instance(const RankingDataset& dataset, const ScoreModel& title, const ScoreModel& body,
                              const InstanceConfig& config);

// ---------------------------------------------------------------------------
// Semi-bandit baselines

using IntrinsicOracle = std::function<double(const ContextId&, int slot, int action)>;

/// Σ_j (1/n) Σ_i φ(j, s_ij) π(s_ij|x_i)/μ(s_ij|x_i).
EstimatorReport estimate_sb(std::span<const LoggedExample> data, const IntrinsicOracle& intrinsics,
                            const Policy& logging, const Policy& target, const SlateSpaces& spaces,
                            const MomentOptions& options = {});
/// Per-slot self-normalized version. Throws UndefinedEstimateError when a slot's weights are all zero.
EstimatorReport estimate_wsb(std::span<const LoggedExample> data, const IntrinsicOracle& intrinsics,
                             const Policy& logging, const Policy& target, const SlateSpaces& spaces,
                             const MomentOptions& options = {});

// ---------------------------------------------------------------------------
// RMSE sweep

struct ExperimentConfig {
  InstanceConfig instance;
  std::vector<std::size_t> n_grid = {1000, 3000, 10000};
  std::size_t runs = 20;
  std::uint64_t seed = 1;
  std::vector<EstimatorKind> estimators = {EstimatorKind::PI, EstimatorKind::WIPS, EstimatorKind::DM,
                                           EstimatorKind::OnPolicy};
  std::size_t threads = 1;
  double dm_lambda = 1.0;
  MomentOptions moments;
};

struct SweepRow {
  EstimatorKind estimator;
  std::size_t n;
  std::size_t run;
  double estimate;
  double squared_error;
  /// The estimator was undefined (0/0) and the estimate fell back to 0.
  bool undefined = false;
};

struct AggregateRow {
  EstimatorKind estimator;
  std::size_t n;
  double rmse;
  /// Delta-method standard error of the RMSE across runs.
  double stderr_rmse;
};

struct SweepResult {
  double true_value = 0.0;
  std::vector<SweepRow> rows;

  std::vector<AggregateRow> aggregate() const;
  double rmse(EstimatorKind estimator, std::size_t n) const;
};

/// For every n and run draws n logs from μ with a stream seeded by (seed, run, n),
/// and records each estimator's squared error against the exact V(π).
/// Bitwise identical for any thread count.
SweepResult run_rmse_sweep(const BanditInstance& instance, const ExperimentConfig& config);

void write_runs_csv(std::ostream& out, const SweepResult& result);
void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows);
/// gnuplot data: one index block per estimator with "n rmse stderr" rows.
void write_rmse_plot_data(std::ostream& out, std::span<const AggregateRow> rows);
/// gnuplot script drawing log-log RMSE curves from the data file.
void write_rmse_plot_script(std::ostream& out, std::span<const AggregateRow> rows, const std::string& data_file);

}  // namespace slateval
