#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "slateval/policy.hpp"
#include "slateval/slate.hpp"

namespace testing {

using namespace slateval;

/// Γ and q by brute force over space.enumerate() with slate_prob.
inline Eigen::MatrixXd oracle_gamma(const Policy& policy, const ContextId& ctx, const SlateSpace& space) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(space.dim(), space.dim());
  for (const auto& s : space.enumerate()) {
    const double p = policy.slate_prob(ctx, s, space);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(space.dim());
    for (int j = 0; j < space.num_slots(); ++j) v[space.offset(j) + s[j]] = 1.0;
    g += p * v * v.transpose();
  }
  return g;
}

inline Eigen::VectorXd oracle_mean(const Policy& policy, const ContextId& ctx, const SlateSpace& space) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(space.dim());
  for (const auto& s : space.enumerate()) {
    const double p = policy.slate_prob(ctx, s, space);
    for (int j = 0; j < space.num_slots(); ++j) q[space.offset(j) + s[j]] += p;
  }
  return q;
}

/// SVD pseudoinverse with a relative cutoff.
inline Eigen::MatrixXd oracle_pinv(const Eigen::MatrixXd& m, double rel = 1e-10) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = sv.size() ? sv[0] * rel : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cut) inv[i] = 1.0 / sv[i];
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

inline Eigen::VectorXd indicator_of(const Slate& s, const SlateSpace& space) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(space.dim());
  for (int j = 0; j < space.num_slots(); ++j) v[space.offset(j) + s[j]] = 1.0;
  return v;
}

/// Random explicit policy over a random subset of the space (at least one slate).
inline ExplicitTable random_table(const ContextId& ctx, const SlateSpace& space, std::mt19937_64& gen,
                                  double keep = 0.6) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto slates = space.enumerate();
  std::vector<WeightedSlate> rows;
  double total = 0.0;
  for (auto& s : slates) {
    if (u(gen) < keep) {
      const double w = 0.05 + u(gen);
      rows.push_back({s, w});
      total += w;
    }
  }
  if (rows.empty()) {
    rows.push_back({slates[gen() % slates.size()], 1.0});
    total = 1.0;
  }
  for (auto& r : rows) r.probability /= total;
  ExplicitTable t;
  t.emplace(ctx, std::move(rows));
  return t;
}

/// Small random space: Cartesian with 1-3 slots of 1-4 actions or ranking with m <= 4.
inline SlateSpace random_space(std::mt19937_64& gen) {
  if (gen() % 2 == 0) {
    std::vector<int> m(1 + gen() % 3);
    for (int& x : m) x = 1 + static_cast<int>(gen() % 4);
    return SlateSpace::cartesian(m);
  }
  const int m = 1 + static_cast<int>(gen() % 4);
  const int l = 1 + static_cast<int>(gen() % m);
  return SlateSpace::ranking(m, l);
}

inline Slate random_slate(const SlateSpace& space, std::mt19937_64& gen) {
  const auto all = space.enumerate();
  return all[gen() % all.size()];
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("slateval-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
