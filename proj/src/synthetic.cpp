#include <cmath>
#include <cstdio>
#include <numbers>

#include "slateval/error.hpp"
#include "slateval/rng.hpp"
#include "slateval/semisynth.hpp"

namespace slateval {

namespace {

// Box–Muller on the portable uniform; std::normal_distribution differs across standard libraries.
double gaussian(Rng& rng) {
  double u = uniform01(rng);
  while (u <= 0.0) u = uniform01(rng);
  const double v = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

// Relevance thresholds on the standardized planted score.
constexpr double kRelevantCut = 1.0;
constexpr double kHighlyRelevantCut = 1.8;

}  // namespace

RankingDataset generate_synthetic(const SyntheticConfig& config) {
  if (config.num_features == 0) throw ConfigError("synthetic.features must be positive");
  if (config.min_docs == 0 || config.max_docs < config.min_docs) throw ConfigError("synthetic docs range is empty");
  Rng rng(derive_seed(config.seed, 0x5e7));

  std::vector<double> planted(config.num_features);
  double norm = 0.0;
  for (double& w : planted) {
    w = gaussian(rng);
    norm += w * w;
  }
  norm = std::sqrt(norm);
  for (double& w : planted) w /= norm;
  const double scale = std::sqrt(1.0 + config.label_noise * config.label_noise);

  RankingDataset dataset;
  dataset.feature_dim = config.num_features;
  dataset.queries.reserve(config.num_queries);
  for (std::size_t q = 0; q < config.num_queries; ++q) {
    RankedQuery query;
    char qid[32];
    std::snprintf(qid, sizeof qid, "%zu", 10000 + q);
    query.query_id = qid;
    const std::size_t docs = config.min_docs + uniform_index(rng, config.max_docs - config.min_docs + 1);
    // A per-query shift makes some queries richer in relevant documents than others.
    const double shift = 0.5 * gaussian(rng);
    for (std::size_t d = 0; d < docs; ++d) {
      RankedDocument doc;
      doc.features.resize(config.num_features);
      double latent = 0.0;
      for (std::size_t k = 0; k < config.num_features; ++k) {
        doc.features[k] = gaussian(rng);
        latent += planted[k] * doc.features[k];
      }
      latent = (latent + config.label_noise * gaussian(rng)) / scale + shift;
      doc.relevance = latent > kHighlyRelevantCut ? 2 : latent > kRelevantCut ? 1 : 0;
      char id[48];
      std::snprintf(id, sizeof id, "q%zu-d%03zu", q, d);
      doc.doc_id = id;
      doc.comment = std::string("docid = ") + id;
      query.documents.push_back(std::move(doc));
    }
    dataset.queries.push_back(std::move(query));
  }
  return dataset;
}

}  // namespace slateval
