#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "slateval/policy.hpp"
#include "slateval/slate.hpp"

namespace slateval {

/// √(2σ² ln(2/δ)/n) + 2(ρ+1) ln(2/δ)/(3n). Throws ConfigError unless δ ∈ (0,1) and n ≥ 1.
double bernstein_bound(double sigma_sq, double rho, std::size_t n, double delta);

/// Overlap between logging and target. Suprema are empirical: taken over the supplied contexts.
struct OverlapProfile {
  double sigma_sq = 0.0;
  double rho = 0.0;
  double rho_bar = 0.0;
  std::optional<double> kappa;

  std::string key_value_block() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Mean over contexts of q_πᵀ Γ†_μ q_π.
double compute_sigma_sq(std::span<const ContextId> contexts, const Policy& logging, const Policy& target,
                        const SlateSpaces& spaces, const MomentOptions& options = {});
/// Max over contexts and μ-supported slates of |q_πᵀ Γ†_μ 1_s|.
double compute_rho(std::span<const ContextId> contexts, const Policy& logging, const Policy& target,
                   const SlateSpaces& spaces, const MomentOptions& options = {});
/// sup over μ-supported slates of 1_sᵀ Γ†_μ 1_s at one context.
double compute_rho_bar(const Policy& logging, const ContextId& context, const SlateSpace& space,
                       const MomentOptions& options = {});

/// min μ-pairwise / ν-pairwise over entries where the reference is positive, clipped at 1.
/// The default reference is the uniform policy.
double kappa_of(const Policy& logging, const ContextId& context, const SlateSpace& space,
                const std::optional<Policy>& reference = std::nullopt, const MomentOptions& options = {});

struct TranslationCheck {
  double kappa = 0.0;
  double lhs = 0.0;  // κ ρ̄_μ
  double rhs = 0.0;  // ρ̄_ν
  bool holds = false;
};

/// κ ρ̄_{μ,x} ≤ ρ̄_{ν,x}. Throws ValidationError if μ puts mass on a slate ν does not support.
TranslationCheck check_translation(const Policy& logging, const Policy& reference, const ContextId& context,
                                   const SlateSpace& space, const MomentOptions& options = {});

/// σ², ρ, sup_x ρ̄ and min_x κ over the supplied contexts.
OverlapProfile overlap_profile(std::span<const ContextId> contexts, const Policy& logging, const Policy& target,
                               const SlateSpaces& spaces, const MomentOptions& options = {});

}  // namespace slateval
