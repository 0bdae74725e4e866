#include <algorithm>
#include <cmath>
#include <numeric>

#include "slateval/error.hpp"
#include "slateval/numeric.hpp"
#include "slateval/semisynth.hpp"

namespace slateval {

namespace {

double gain(int relevance) { return std::exp2(relevance) - 1.0; }
double discount(int slot) { return 1.0 / std::log2(slot + 2.0); }

Policy make_logging(const std::vector<BanditInstance::Pool>& pools, double alpha) {
  ContextMap<std::vector<double>> scores;
  for (const auto& p : pools) scores.emplace(p.context, p.title_scores);
  return Policy::multinomial(std::move(scores), alpha);
}

Policy make_target(const std::vector<BanditInstance::Pool>& pools) {
  ContextMap<Slate> choices;
  for (const auto& p : pools) choices.emplace(p.context, p.target_slate);
  return Policy::deterministic(std::move(choices));
}

SlateSpace pool_space(const BanditInstance::Pool& pool, int num_slots) {
  return SlateSpace::ranking(static_cast<int>(pool.relevance.size()), num_slots);
}

}  // namespace

FeatureBlocks FeatureBlocks::resolved(std::size_t feature_dim) const {
  FeatureBlocks out = *this;
  if (out.title.end == 0) out.title.end = feature_dim;
  if (out.body.end == 0) out.body.end = feature_dim;
  for (const auto* block : {&out.title, &out.body}) {
    if (block->begin >= block->end || block->end > feature_dim) {
      throw ConfigError("feature block [" + std::to_string(block->begin) + ", " + std::to_string(block->end) +
                        ") is empty or exceeds the feature dimension " + std::to_string(feature_dim));
    }
  }
  return out;
}

double ScoreModel::score(std::span<const double> features) const {
  return model.predict(features.subspan(block.begin, block.size()));
}

ScoreModel fit_score_model(const RankingDataset& dataset, FeatureBlock block) {
  if (block.end > dataset.feature_dim || block.begin >= block.end) throw ConfigError("score model block out of range");
  RidgeAccumulator acc(block.size(), 5);
  for (const auto& query : dataset.queries) {
    for (const auto& doc : query.documents) {
      acc.add(std::span<const double>(doc.features).subspan(block.begin, block.size()), doc.relevance);
    }
  }
  return ScoreModel{block, acc.fit_cv(kRidgeGrid)};
}

BanditInstance::BanditInstance(std::vector<Pool> pools, int num_slots, InstanceConfig config,
                               std::size_t dropped_queries)
    : pools_(std::move(pools)),
      spaces_(pools_.empty() ? SlateSpace::ranking(num_slots, num_slots) : pool_space(pools_.front(), num_slots)),
      logging_(make_logging(pools_, config.alpha)),
      target_(make_target(pools_)),
      num_slots_(num_slots),
      config_(config),
      dropped_(dropped_queries) {
  if (pools_.empty()) throw ValidationError("bandit instance has no usable queries");
  feature_dim_ = pools_.front().features.empty() ? 0 : pools_.front().features.front().size();
  for (std::size_t i = 0; i < pools_.size(); ++i) {
    const auto& p = pools_[i];
    if (!index_.emplace(p.context, i).second) throw ValidationError("duplicate query '" + p.context.str() + "'");
    contexts_.push_back(p.context);
    spaces_.set(p.context, pool_space(p, num_slots));
  }
}

const BanditInstance::Pool& BanditInstance::pool(const ContextId& context) const {
  auto it = index_.find(context);
  if (it == index_.end()) throw LookupError("unknown query '" + context.str() + "'");
  return pools_[it->second];
}

double BanditInstance::intrinsic(const ContextId& context, int slot, int action) const {
  const Pool& p = pool(context);
  if (p.ideal_dcg <= 0.0) return 0.0;
  return gain(p.relevance[action]) * discount(slot) / p.ideal_dcg;
}

double BanditInstance::ndcg(const ContextId& context, const Slate& slate) const {
  const Pool& p = pool(context);
  if (p.ideal_dcg <= 0.0) return 0.0;
  double dcg = 0.0;
  for (int j = 0; j < static_cast<int>(slate.size()); ++j) dcg += gain(p.relevance[slate[j]]) * discount(j);
  return dcg / p.ideal_dcg;
}

double BanditInstance::target_value() const {
  std::vector<double> values;
  values.reserve(pools_.size());
  for (const auto& p : pools_) values.push_back(ndcg(p.context, p.target_slate));
  return mean_of(values);
}

double BanditInstance::policy_value(const Policy& policy, const MomentOptions& options) const {
  std::vector<double> values;
  values.reserve(pools_.size());
  for (const auto& p : pools_) {
    const SlateSpace& space = spaces_.at(p.context);
    const Eigen::VectorXd q = mean_indicator(policy, p.context, space, options);
    double v = 0.0;
    for (int j = 0; j < space.num_slots(); ++j) {
      for (int a = 0; a < space.num_actions(j); ++a) v += q[space.coord(j, a)] * intrinsic(p.context, j, a);
    }
    values.push_back(v);
  }
  return mean_of(values);
}

ContextId BanditInstance::sample_context(Rng& rng) const { return contexts_[uniform_index(rng, contexts_.size())]; }

double BanditInstance::reward(const ContextId& context, const Slate& slate, Rng& rng) const {
  const double value = ndcg(context, slate);
  if (!config_.reward_jitter) return value;
  return uniform01(rng) < value ? 1.0 : 0.0;
}

std::span<const double> BanditInstance::features(const ContextId& context, int /*slot*/, int action) const {
  const Pool& p = pool(context);
  if (action < 0 || static_cast<std::size_t>(action) >= p.features.size()) {
    throw LookupError("action " + std::to_string(action) + " outside the pool of query '" + context.str() + "'");
  }
  return p.features[action];
}

double ndcg_reward(const BanditInstance& instance, const ContextId& query, const Slate& slate) {
  instance.space(query).validate(slate);
  return instance.ndcg(query, slate);
}

BanditInstance build_instance(const RankingDataset& dataset, const ScoreModel& title, const ScoreModel& body,
                              const InstanceConfig& config) {
  if (config.l < 1 || config.m < config.l) throw ConfigError("instance needs 1 <= l <= m");
  if (!(config.alpha >= 0.0) || !std::isfinite(config.alpha)) throw ConfigError("alpha must be a nonnegative real");
  std::vector<BanditInstance::Pool> pools;
  std::size_t dropped = 0;
  for (const auto& query : dataset.queries) {
    const auto& docs = query.documents;
    if (docs.size() < static_cast<std::size_t>(config.l)) {
      ++dropped;
      continue;
    }
    std::vector<double> title_scores(docs.size());
    std::vector<double> body_scores(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
      title_scores[d] = title.score(docs[d].features);
      body_scores[d] = body.score(docs[d].features);
    }
    std::vector<std::size_t> order(docs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (title_scores[a] != title_scores[b]) return title_scores[a] > title_scores[b];
      return docs[a].doc_id < docs[b].doc_id;
    });
    order.resize(std::min<std::size_t>(order.size(), config.m));

    BanditInstance::Pool pool;
    pool.context = ContextId(query.query_id);
    for (std::size_t d : order) {
      pool.doc_ids.push_back(docs[d].doc_id);
      pool.relevance.push_back(docs[d].relevance);
      pool.features.push_back(docs[d].features);
      pool.title_scores.push_back(title_scores[d]);
    }

    std::vector<int> by_body(order.size());
    std::iota(by_body.begin(), by_body.end(), 0);
    std::sort(by_body.begin(), by_body.end(), [&](int a, int b) {
      const double sa = body_scores[order[a]], sb = body_scores[order[b]];
      if (sa != sb) return sa > sb;
      return pool.doc_ids[a] < pool.doc_ids[b];
    });
    pool.target_slate.actions.assign(by_body.begin(), by_body.begin() + config.l);

    std::vector<double> gains;
    for (int r : pool.relevance) gains.push_back(gain(r));
    std::sort(gains.begin(), gains.end(), std::greater<>());
    for (int j = 0; j < config.l; ++j) pool.ideal_dcg += gains[j] * discount(j);
    pools.push_back(std::move(pool));
  }
  return BanditInstance(std::move(pools), config.l, config, dropped);
}

namespace {

struct SlotTerms {
  std::vector<std::vector<double>> weighted;  // per slot: φ·w
  std::vector<std::vector<double>> weights;   // per slot: w
};

SlotTerms semi_bandit_terms(std::span<const LoggedExample> data, const IntrinsicOracle& intrinsics,
                            const Policy& logging, const Policy& target, const SlateSpaces& spaces,
                            const MomentOptions& options) {
  if (data.empty()) throw ValidationError("estimator needs at least one logged example");
  const int slots = static_cast<int>(data.front().slate.size());
  SlotTerms t;
  t.weighted.assign(slots, std::vector<double>(data.size()));
  t.weights.assign(slots, std::vector<double>(data.size()));
  ContextMap<std::pair<Eigen::VectorXd, Eigen::VectorXd>> marginals;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& ex = data[i];
    const SlateSpace& space = spaces.at(ex.context);
    space.validate(ex.slate);
    if (static_cast<int>(ex.slate.size()) != slots) throw ValidationError("semi-bandit slates differ in length");
    auto it = marginals.find(ex.context);
    if (it == marginals.end()) {
      it = marginals
               .emplace(ex.context, std::pair{mean_indicator(logging, ex.context, space, options),
                                              mean_indicator(target, ex.context, space, options)})
               .first;
    }
    const auto& [q_log, q_target] = it->second;
    for (int j = 0; j < slots; ++j) {
      const int c = space.coord(j, ex.slate[j]);
      if (!(q_log[c] > 0.0)) {
        throw AbsoluteContinuityError("zero logging marginal for action " + std::to_string(ex.slate[j]) + " in slot " +
                                      std::to_string(j) + " of context '" + ex.context.str() + "'");
      }
      const double w = q_target[c] / q_log[c];
      t.weights[j][i] = w;
      t.weighted[j][i] = w * intrinsics(ex.context, j, ex.slate[j]);
    }
  }
  return t;
}

}  // namespace

EstimatorReport estimate_sb(std::span<const LoggedExample> data, const IntrinsicOracle& intrinsics,
                            const Policy& logging, const Policy& target, const SlateSpaces& spaces,
                            const MomentOptions& options) {
  const SlotTerms t = semi_bandit_terms(data, intrinsics, logging, target, spaces, options);
  std::vector<double> per_slot;
  for (const auto& v : t.weighted) per_slot.push_back(mean_of(v));
  EstimatorReport report;
  report.kind = EstimatorKind::SB;
  report.n = data.size();
  report.estimate = pairwise_sum(per_slot);
  return report;
}

EstimatorReport estimate_wsb(std::span<const LoggedExample> data, const IntrinsicOracle& intrinsics,
                             const Policy& logging, const Policy& target, const SlateSpaces& spaces,
                             const MomentOptions& options) {
  const SlotTerms t = semi_bandit_terms(data, intrinsics, logging, target, spaces, options);
  std::vector<double> per_slot;
  for (std::size_t j = 0; j < t.weights.size(); ++j) {
    const double total = pairwise_sum(t.weights[j]);
    if (!(total > 0.0)) {
      throw UndefinedEstimateError("wSB undefined: every weight in slot " + std::to_string(j) + " is zero");
    }
    per_slot.push_back(pairwise_sum(t.weighted[j]) / total);
  }
  EstimatorReport report;
  report.kind = EstimatorKind::WSB;
  report.n = data.size();
  report.estimate = pairwise_sum(per_slot);
  return report;
}

}  // namespace slateval
