#pragma once

#include "smfm/fm.hpp"
#include "smfm/rng.hpp"
#include "smfm/sparse.hpp"

#include <cstddef>
#include <string>
#include <string_view>

namespace smfm {

// Generalization-bound calculators for the second-order part of the FM
// (bias kept, linear term dropped). The linear representation theta^T u of
// the pairwise term lives in R^{d^2 m^2}; nothing here materializes it.
// Every quadratic form reduces to per-example pairwise scores q(x).

struct BoundInputs {
  double gamma = 0.0;  // capacity: sum of squared embedding entries
  std::size_t d = 1;
  std::size_t tau = 1;  // max nonzeros per example
  std::size_t n = 1;
  double delta = 0.05;

  void validate() const;
};

enum class BoundVariant { fm, mixfm };
std::string_view to_string(BoundVariant v) noexcept;

struct BoundReport {
  BoundVariant variant = BoundVariant::fm;
  BoundInputs inputs;
  double empirical_risk = 0.0;
  double rademacher_term = 0.0;  // 2 * Rademacher complexity bound
  double confidence_term = 0.0;  // 3 * sqrt(ln(2/delta) / (2n))
  double total_gap = 0.0;        // rademacher_term + confidence_term
};

/// sum_{i,k} v_ik^2, the smallest capacity admitting the model.
double gamma_of(const FmParams& params);

/// sqrt(gamma^2 d tau (tau-1) / (2n)). Throws for tau = 0.
double rademacher_bound(const BoundInputs& in);

/// 3 * sqrt(ln(2/delta) / (2n)).
double confidence_term(const BoundInputs& in);

/// Norm-ball FM bound: 2 * rademacher_bound + confidence term.
BoundReport fm_generalization_gap(const BoundInputs& in, double empirical_risk = 0.0);

/// Regularizer-ball MixFM bound with constraint value gamma_tilde:
/// 2 * sqrt((1+e)^2 gamma_tilde tau (tau-1) / (2 e n)) + confidence term.
/// `in.gamma` is ignored in favour of gamma_tilde.
BoundReport mixfm_generalization_gap(double gamma_tilde, const BoundInputs& in, double empirical_risk = 0.0);

/// (1+e)^2 / (e d): the capacity above which the MixFM bound is tighter.
double gamma_threshold(std::size_t d);

/// Per-example pairwise term q(x) = predict - bias - linear.
double pairwise_score(const FmParams& params, const SparseVector& x);

/// theta^T Sigma_u theta = (1/n) sum_i q(x^i)^2 (raw), or with u centered,
/// the population variance of q over the dataset. O(n d tau).
double interaction_energy(const FmParams& params, const Dataset& data, bool centered = false);

/// Monte-Carlo E[((1 - l)/l)^4] with l drawn from the mixture
/// alpha/(alpha+beta) Beta(alpha+1, beta) + beta/(alpha+beta) Beta(beta+1, alpha).
/// `clamped` folds l to max(l, 1-l), which bounds the ratio by 1.
/// Requires samples >= 10^4.
double lambda_ratio_moment(double alpha, double beta, bool clamped, std::size_t samples, Rng& rng);

/// Mean of sigma(f)(1 - sigma(f)) over the dataset with f = w0 + q(x).
double mean_logistic_curvature(const FmParams& params, const Dataset& data);

/// Data-dependent Mixup regularizer:
/// mean_logistic_curvature * moment * interaction_energy.
double mixup_regularizer(const FmParams& params, const Dataset& data, double moment, bool centered = false);
double mixup_regularizer(const FmParams& params, const Dataset& data, double alpha, double beta,
                         std::size_t samples, Rng& rng, bool centered = false);

/// Empirical stand-in for the regularizer-ball constraint
/// E_u[sigma(f)(1-sigma(f)) theta^T Sigma_u theta], using Sigma_u-hat.
double gamma_tilde_estimate(const FmParams& params, const Dataset& data);

struct BoundComparison {
  BoundReport fm;
  BoundReport mixfm;
  double threshold = 0.0;
  bool mixfm_tighter = false;  // gamma >= threshold
  std::string caveat;
};

/// Literal comparison of the two bounds at the same capacity value.
/// The verdict is "mixfm-tighter" iff gamma >= gamma_threshold(d).
BoundComparison compare_bounds(const BoundInputs& in, double empirical_risk = 0.0);

}  // namespace smfm
