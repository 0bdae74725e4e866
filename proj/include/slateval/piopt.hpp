#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "slateval/estimators.hpp"
#include "slateval/policy.hpp"
#include "slateval/ridge.hpp"
#include "slateval/semisynth.hpp"
#include "slateval/slate.hpp"

namespace slateval {

/// Per logged example, phi = r Γ†_{μ,x} 1_s over the slot-major coordinates of its space.
struct DecomposedTargets {
  struct Entry {
    ContextId context;
    Eigen::VectorXd phi;
  };
  std::vector<Entry> entries;
};

DecomposedTargets decompose(std::span<const LoggedExample> data, const Policy& logging, const SlateSpaces& spaces,
                            const MomentOptions& options = {}, std::size_t threads = 1);

/// Linear model on (one-hot slot ⊕ action features), optionally followed by one
/// slot-masked copy of the features per slot so slots can weight features differently.
struct PointwiseScorer {
  LinearModel model;
  int num_slots = 0;
  std::size_t feature_dim = 0;
  bool slot_interactions = true;

  std::size_t encoded_dim() const { return num_slots + feature_dim * (1 + (slot_interactions ? num_slots : 0)); }
  std::vector<double> encode(int slot, std::span<const double> features) const;
  double predict(int slot, std::span<const double> features) const;
};

/// Ridge on the decomposed targets, strength by 5-fold CV over kRidgeGrid.
/// Row i*dim + k (example i, coordinate k) goes to fold (i*dim + k) mod 5.
PointwiseScorer fit_scorer(const DecomposedTargets& targets, const SlateSpaces& spaces, const FeatureTable& features);

/// Supervised baseline: regress each pool document, in every slot, on 2^rel − 1 (gain)
/// or on rel.
enum class SupervisedTarget { Gain, Relevance };
PointwiseScorer fit_supervised(const BanditInstance& instance, SupervisedTarget target);

void write_scorer(std::ostream& out, const PointwiseScorer& scorer);
PointwiseScorer read_scorer(std::istream& in);

class SlateScorer {
 public:
  virtual ~SlateScorer() = default;
  virtual double score(const ContextId& context, int slot, int action) const = 0;
};

class FeatureScorer final : public SlateScorer {
 public:
  FeatureScorer(const PointwiseScorer& scorer, const FeatureTable& features) : scorer_(scorer), features_(features) {}
  double score(const ContextId& context, int slot, int action) const override {
    return scorer_.predict(slot, features_.features(context, slot, action));
  }

 private:
  const PointwiseScorer& scorer_;
  const FeatureTable& features_;
};

class OracleScorer final : public SlateScorer {
 public:
  explicit OracleScorer(IntrinsicOracle oracle) : oracle_(std::move(oracle)) {}
  double score(const ContextId& context, int slot, int action) const override { return oracle_(context, slot, action); }

 private:
  IntrinsicOracle oracle_;
};

/// Repeatedly takes the best available (slot, action); ties to the lower slot, then the lower action.
/// Ranking spaces also retire the chosen action.
Slate greedy_slate(const SlateScorer& scorer, const ContextId& context, const SlateSpace& space);

/// Mean NDCG of greedy slates over the instance's queries.
double evaluate_learned(const SlateScorer& scorer, const BanditInstance& instance);

struct OptimizeConfig {
  InstanceConfig instance{20, 5, 0.0, false};
  FeatureBlocks blocks;
  std::size_t n_logs = 100'000;
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  bool sup_rel = true;
  MomentOptions moments;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_queries = 0;
  std::size_t test_queries = 0;
  double logger = 0.0;
  double sup_rel = 0.0;
  double sup_gain = 0.0;
  double pi_opt = 0.0;
  PointwiseScorer scorer;
};

/// Queries go to fold (index mod folds). For each fold: score models and n_logs bandit logs
/// come from the other folds, and every method is scored by test-fold NDCG.
/// folds == 1 trains and tests on all queries.
std::vector<FoldResult> run_optimization(const RankingDataset& dataset, const OptimizeConfig& config);

/// "fold,logger,sup_rel,sup_gain,pi_opt" rows plus a final "avg" row.
void write_fold_csv(std::ostream& out, std::span<const FoldResult> folds, bool with_sup_rel);

}  // namespace slateval
