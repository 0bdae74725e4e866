#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "slateval/error.hpp"
#include "slateval/linalg.hpp"
#include "slateval/numeric.hpp"
#include "slateval/piopt.hpp"

namespace slateval {

namespace {

constexpr std::size_t kFolds = 5;

struct CellStats {
  double count = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

double gain(int relevance) { return std::exp2(relevance) - 1.0; }

}  // namespace

DecomposedTargets decompose(std::span<const LoggedExample> data, const Policy& logging, const SlateSpaces& spaces,
                            const MomentOptions& options, std::size_t threads) {
  const auto contexts = distinct_contexts(data);
  std::vector<Eigen::MatrixXd> pinvs(contexts.size());
  parallel_for(contexts.size(), threads, [&](std::size_t c) {
    pinvs[c] = pseudo_inverse_for(logging, contexts[c], spaces.at(contexts[c]), options).entries;
  });
  ContextMap<const Eigen::MatrixXd*> lookup;
  for (std::size_t c = 0; c < contexts.size(); ++c) lookup.emplace(contexts[c], &pinvs[c]);

  DecomposedTargets out;
  out.entries.resize(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    const auto& ex = data[i];
    const SlateSpace& space = spaces.at(ex.context);
    validate_example(ex, space);
    const Eigen::MatrixXd& pinv = *lookup.at(ex.context);
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(space.dim());
    for (int c : indicator_coords(ex.slate, space)) phi += pinv.col(c);
    out.entries[i] = {ex.context, ex.reward * phi};
  });
  return out;
}

std::vector<double> PointwiseScorer::encode(int slot, std::span<const double> features) const {
  if (slot < 0 || slot >= num_slots) throw ValidationError("slot " + std::to_string(slot) + " outside the scorer");
  if (features.size() != feature_dim) throw ValidationError("feature dimension does not match the scorer");
  std::vector<double> x(encoded_dim(), 0.0);
  x[slot] = 1.0;
  std::copy(features.begin(), features.end(), x.begin() + num_slots);
  if (slot_interactions) std::copy(features.begin(), features.end(), x.begin() + num_slots + feature_dim * (1 + slot));
  return x;
}

double PointwiseScorer::predict(int slot, std::span<const double> features) const {
  return model.predict(encode(slot, features));
}

PointwiseScorer fit_scorer(const DecomposedTargets& targets, const SlateSpaces& spaces, const FeatureTable& features) {
  if (targets.entries.empty()) throw ValidationError("no decomposed targets to fit");
  PointwiseScorer scorer;
  scorer.num_slots = spaces.at(targets.entries.front().context).num_slots();
  scorer.feature_dim = features.dim();

  // Identical (context, coordinate) rows are pooled per fold before touching the normal equations.
  std::vector<ContextId> order;
  ContextMap<std::vector<CellStats>> cells;
  std::size_t row = 0;
  for (const auto& entry : targets.entries) {
    const std::size_t dim = entry.phi.size();
    auto [it, inserted] = cells.try_emplace(entry.context);
    if (inserted) {
      it->second.resize(dim * kFolds);
      order.push_back(entry.context);
    }
    if (it->second.size() != dim * kFolds) throw ValidationError("context dimension changed between examples");
    for (std::size_t k = 0; k < dim; ++k, ++row) {
      auto& cell = it->second[k * kFolds + row % kFolds];
      const double y = entry.phi[k];
      cell.count += 1.0;
      cell.sum += y;
      cell.sum_sq += y * y;
    }
  }

  RidgeAccumulator acc(scorer.encoded_dim(), kFolds);
  for (const auto& ctx : order) {
    const SlateSpace& space = spaces.at(ctx);
    const auto& stats = cells.at(ctx);
    for (int j = 0; j < space.num_slots(); ++j) {
      for (int a = 0; a < space.num_actions(j); ++a) {
        const auto x = scorer.encode(j, features.features(ctx, j, a));
        const std::size_t k = space.coord(j, a);
        for (std::size_t f = 0; f < kFolds; ++f) {
          const auto& cell = stats[k * kFolds + f];
          if (cell.count > 0.0) acc.add_aggregate(x, f, cell.count, cell.sum, cell.sum_sq);
        }
      }
    }
  }
  scorer.model = acc.fit_cv(kRidgeGrid);
  return scorer;
}

PointwiseScorer fit_supervised(const BanditInstance& instance, SupervisedTarget target) {
  PointwiseScorer scorer;
  scorer.num_slots = instance.num_slots();
  scorer.feature_dim = instance.dim();
  // Labels do not depend on the slot.
  scorer.slot_interactions = false;
  RidgeAccumulator acc(scorer.encoded_dim(), kFolds);
  for (const auto& ctx : instance.contexts()) {
    const auto& pool = instance.pool(ctx);
    for (std::size_t a = 0; a < pool.relevance.size(); ++a) {
      const double y = target == SupervisedTarget::Gain ? gain(pool.relevance[a]) : pool.relevance[a];
      for (int j = 0; j < scorer.num_slots; ++j) acc.add(scorer.encode(j, pool.features[a]), y);
    }
  }
  scorer.model = acc.fit_cv(kRidgeGrid);
  return scorer;
}

void write_scorer(std::ostream& out, const PointwiseScorer& scorer) {
  out << "pointwise-scorer 1\n";
  out << "slots " << scorer.num_slots << '\n';
  out << "features " << scorer.feature_dim << '\n';
  out << "interactions " << (scorer.slot_interactions ? 1 : 0) << '\n';
  out << "lambda " << format_double(scorer.model.lambda) << '\n';
  out << "intercept " << format_double(scorer.model.intercept) << '\n';
  out << "weights";
  for (Eigen::Index i = 0; i < scorer.model.weights.size(); ++i) out << ' ' << format_double(scorer.model.weights[i]);
  out << '\n';
}

PointwiseScorer read_scorer(std::istream& in) {
  auto expect = [&](const std::string& key, std::size_t line) {
    std::string word;
    if (!(in >> word) || word != key) throw ParseError("expected '" + key + "'", line);
  };
  PointwiseScorer scorer;
  int version = 0;
  expect("pointwise-scorer", 1);
  if (!(in >> version) || version != 1) throw ParseError("unsupported scorer version", 1);
  expect("slots", 2);
  if (!(in >> scorer.num_slots) || scorer.num_slots < 1) throw ParseError("bad slot count", 2);
  expect("features", 3);
  if (!(in >> scorer.feature_dim)) throw ParseError("bad feature count", 3);
  expect("interactions", 4);
  int interactions = -1;
  if (!(in >> interactions) || (interactions != 0 && interactions != 1)) throw ParseError("bad interactions flag", 4);
  scorer.slot_interactions = interactions == 1;
  expect("lambda", 5);
  if (!(in >> scorer.model.lambda)) throw ParseError("bad lambda", 5);
  expect("intercept", 6);
  if (!(in >> scorer.model.intercept)) throw ParseError("bad intercept", 6);
  expect("weights", 7);
  scorer.model.weights.resize(scorer.encoded_dim());
  for (Eigen::Index i = 0; i < scorer.model.weights.size(); ++i) {
    if (!(in >> scorer.model.weights[i])) throw ParseError("expected " + std::to_string(scorer.model.weights.size()) + " weights", 7);
  }
  return scorer;
}

Slate greedy_slate(const SlateScorer& scorer, const ContextId& context, const SlateSpace& space) {
  const int slots = space.num_slots();
  std::vector<std::vector<double>> scores(slots);
  for (int j = 0; j < slots; ++j) {
    for (int a = 0; a < space.num_actions(j); ++a) scores[j].push_back(scorer.score(context, j, a));
  }
  const bool ranking = space.kind() == SpaceKind::Ranking;
  std::vector<bool> slot_used(slots, false);
  std::vector<bool> action_used(ranking ? space.num_actions(0) : 0, false);
  Slate slate;
  slate.actions.assign(slots, -1);
  for (int round = 0; round < slots; ++round) {
    int best_j = -1, best_a = -1;
    double best = 0.0;
    for (int j = 0; j < slots; ++j) {
      if (slot_used[j]) continue;
      for (int a = 0; a < space.num_actions(j); ++a) {
        if (ranking && action_used[a]) continue;
        if (best_j < 0 || scores[j][a] > best) {
          best = scores[j][a];
          best_j = j;
          best_a = a;
        }
      }
    }
    slot_used[best_j] = true;
    if (ranking) action_used[best_a] = true;
    slate.actions[best_j] = best_a;
  }
  return slate;
}

double evaluate_learned(const SlateScorer& scorer, const BanditInstance& instance) {
  std::vector<double> values;
  values.reserve(instance.contexts().size());
  for (const auto& ctx : instance.contexts()) {
    values.push_back(instance.ndcg(ctx, greedy_slate(scorer, ctx, instance.space(ctx))));
  }
  return mean_of(values);
}

namespace {

RankingDataset subset(const RankingDataset& dataset, std::size_t folds, std::size_t fold, bool test) {
  RankingDataset out;
  out.feature_dim = dataset.feature_dim;
  for (std::size_t q = 0; q < dataset.queries.size(); ++q) {
    const bool in_test = folds == 1 || q % folds == fold;
    const bool in_train = folds == 1 || q % folds != fold;
    if (test ? in_test : in_train) out.queries.push_back(dataset.queries[q]);
  }
  return out;
}

}  // namespace

std::vector<FoldResult> run_optimization(const RankingDataset& dataset, const OptimizeConfig& config) {
  if (config.folds == 0) throw ConfigError("folds must be at least 1");
  if (config.n_logs == 0) throw ConfigError("n_logs must be positive");
  if (dataset.queries.size() < config.folds) throw ConfigError("fewer queries than folds");
  const FeatureBlocks blocks = config.blocks.resolved(dataset.feature_dim);

  std::vector<FoldResult> results;
  for (std::size_t fold = 0; fold < config.folds; ++fold) {
    const RankingDataset train_data = subset(dataset, config.folds, fold, false);
    const RankingDataset test_data = subset(dataset, config.folds, fold, true);
    const ScoreModel title = fit_score_model(train_data, blocks.title);
    const ScoreModel body = fit_score_model(train_data, blocks.body);
    const BanditInstance train = build_instance(train_data, title, body, config.instance);
    const BanditInstance test = build_instance(test_data, title, body, config.instance);

    Rng rng(derive_seed(config.seed, fold));
    std::vector<LoggedExample> logs;
    logs.reserve(config.n_logs);
    for (std::size_t i = 0; i < config.n_logs; ++i) {
      ContextId ctx = train.sample_context(rng);
      Slate slate = train.logging().sample(ctx, train.space(ctx), rng);
      const double r = train.reward(ctx, slate, rng);
      logs.push_back({std::move(ctx), std::move(slate), r});
    }

    FoldResult result;
    result.fold = fold;
    result.train_queries = train.contexts().size();
    result.test_queries = test.contexts().size();
    const DecomposedTargets targets = decompose(logs, train.logging(), train.spaces(), config.moments, config.threads);
    result.scorer = fit_scorer(targets, train.spaces(), train);
    result.pi_opt = evaluate_learned(FeatureScorer(result.scorer, test), test);

    const PointwiseScorer gain_scorer = fit_supervised(train, SupervisedTarget::Gain);
    result.sup_gain = evaluate_learned(FeatureScorer(gain_scorer, test), test);
    if (config.sup_rel) {
      const PointwiseScorer rel_scorer = fit_supervised(train, SupervisedTarget::Relevance);
      result.sup_rel = evaluate_learned(FeatureScorer(rel_scorer, test), test);
    }
    result.logger = test.policy_value(test.logging(), config.moments);
    results.push_back(std::move(result));
  }
  return results;
}

void write_fold_csv(std::ostream& out, std::span<const FoldResult> folds, bool with_sup_rel) {
  out << "fold,logger," << (with_sup_rel ? "sup_rel," : "") << "sup_gain,pi_opt\n";
  std::array<std::vector<double>, 4> columns;
  for (const auto& f : folds) {
    out << (f.fold + 1) << ',' << format_double(f.logger) << ',';
    if (with_sup_rel) out << format_double(f.sup_rel) << ',';
    out << format_double(f.sup_gain) << ',' << format_double(f.pi_opt) << '\n';
    columns[0].push_back(f.logger);
    columns[1].push_back(f.sup_rel);
    columns[2].push_back(f.sup_gain);
    columns[3].push_back(f.pi_opt);
  }
  out << "avg," << format_double(mean_of(columns[0])) << ',';
  if (with_sup_rel) out << format_double(mean_of(columns[1])) << ',';
  out << format_double(mean_of(columns[2])) << ',' << format_double(mean_of(columns[3])) << '\n';
}

}  // namespace slateval
