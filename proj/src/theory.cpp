#include "smfm/theory.hpp"

#include "smfm/augment.hpp"
#include "smfm/error.hpp"

#include <cmath>
#include <numbers>

namespace smfm {

void BoundInputs::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be finite and >= 0");
  if (d < 1) throw ValidationError("d must be >= 1");
  if (tau < 1) throw ValidationError("tau must be >= 1");
  if (n < 1) throw ValidationError("n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
}

std::string_view to_string(BoundVariant v) noexcept { return v == BoundVariant::fm ? "fm" : "mixfm"; }

double gamma_of(const FmParams& params) {
  long double s = 0;
  for (double v : params.V) s += static_cast<long double>(v) * v;
  return static_cast<double>(s);
}

double rademacher_bound(const BoundInputs& in) {
  if (in.tau == 0) throw ValidationError("rademacher_bound: tau must be >= 1");
  if (in.n == 0) throw ValidationError("rademacher_bound: n must be >= 1");
  const double tau = static_cast<double>(in.tau);
  return std::sqrt(in.gamma * in.gamma * static_cast<double>(in.d) * tau * (tau - 1.0) /
                   (2.0 * static_cast<double>(in.n)));
}

double confidence_term(const BoundInputs& in) {
  if (!(in.delta > 0.0 && in.delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  return 3.0 * std::sqrt(std::log(2.0 / in.delta) / (2.0 * static_cast<double>(in.n)));
}

BoundReport fm_generalization_gap(const BoundInputs& in, double empirical_risk) {
  in.validate();
  BoundReport r;
  r.variant = BoundVariant::fm;
  r.inputs = in;
  r.empirical_risk = empirical_risk;
  r.rademacher_term = 2.0 * rademacher_bound(in);
  r.confidence_term = confidence_term(in);
  r.total_gap = r.rademacher_term + r.confidence_term;
  return r;
}

BoundReport mixfm_generalization_gap(double gamma_tilde, const BoundInputs& in, double empirical_risk) {
  BoundInputs adj = in;
  adj.gamma = gamma_tilde;
  adj.validate();
  constexpr double e = std::numbers::e;
  const double tau = static_cast<double>(in.tau);
  BoundReport r;
  r.variant = BoundVariant::mixfm;
  r.inputs = adj;
  r.empirical_risk = empirical_risk;
  r.rademacher_term =
      2.0 * std::sqrt((1.0 + e) * (1.0 + e) * gamma_tilde * tau * (tau - 1.0) / (2.0 * e * static_cast<double>(in.n)));
  r.confidence_term = confidence_term(adj);
  r.total_gap = r.rademacher_term + r.confidence_term;
  return r;
}

double gamma_threshold(std::size_t d) {
  if (d < 1) throw ValidationError("gamma_threshold: d must be >= 1");
  constexpr double e = std::numbers::e;
  return (1.0 + e) * (1.0 + e) / (e * static_cast<double>(d));
}

double pairwise_score(const FmParams& params, const SparseVector& x) { return score_parts(params, x).pairwise; }

double interaction_energy(const FmParams& params, const Dataset& data, bool centered) {
  if (data.empty()) throw ValidationError("interaction_energy: empty dataset");
  const auto n = static_cast<long double>(data.size());
  long double sum = 0, sum_sq = 0;
  for (const auto& ex : data) {
    const long double q = pairwise_score(params, ex.x);
    sum += q;
    sum_sq += q * q;
  }
  if (!centered) return static_cast<double>(sum_sq / n);
  long double mean = sum / n;
  long double var = 0;
  for (const auto& ex : data) {
    const long double q = pairwise_score(params, ex.x) - mean;
    var += q * q;
  }
  return static_cast<double>(var / n);
}

double lambda_ratio_moment(double alpha, double beta, bool clamped, std::size_t samples, Rng& rng) {
  if (!(alpha > 0.0 && beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
    throw ValidationError("lambda_ratio_moment: shapes must be positive");
  if (samples < 10000) throw ValidationError("lambda_ratio_moment: need at least 10^4 samples");
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  const double w_first = alpha / (alpha + beta);
  long double sum = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    double lam = pick(rng) < w_first ? sample_beta(alpha + 1.0, beta, rng) : sample_beta(beta + 1.0, alpha, rng);
    if (clamped) lam = std::max(lam, 1.0 - lam);
    const long double ratio = (1.0L - lam) / lam;
    sum += ratio * ratio * ratio * ratio;
  }
  const double out = static_cast<double>(sum / static_cast<long double>(samples));
  if (!std::isfinite(out)) throw NumericalError("lambda_ratio_moment diverged (try the clamped distribution)");
  return out;
}

double mean_logistic_curvature(const FmParams& params, const Dataset& data) {
  if (data.empty()) throw ValidationError("mean_logistic_curvature: empty dataset");
  long double sum = 0;
  for (const auto& ex : data) {
    const double s = sigmoid(params.w0 + pairwise_score(params, ex.x));
    sum += s * (1.0 - s);
  }
  return static_cast<double>(sum / static_cast<long double>(data.size()));
}

double mixup_regularizer(const FmParams& params, const Dataset& data, double moment, bool centered) {
  return mean_logistic_curvature(params, data) * moment * interaction_energy(params, data, centered);
}

double mixup_regularizer(const FmParams& params, const Dataset& data, double alpha, double beta,
                         std::size_t samples, Rng& rng, bool centered) {
  const double moment = lambda_ratio_moment(alpha, beta, true, samples, rng);
  return mixup_regularizer(params, data, moment, centered);
}

double gamma_tilde_estimate(const FmParams& params, const Dataset& data) {
  return mean_logistic_curvature(params, data) * interaction_energy(params, data);
}

BoundComparison compare_bounds(const BoundInputs& in, double empirical_risk) {
  BoundComparison c;
  c.fm = fm_generalization_gap(in, empirical_risk);
  c.mixfm = mixfm_generalization_gap(in.gamma, in, empirical_risk);
  c.threshold = gamma_threshold(in.d);
  c.mixfm_tighter = in.gamma >= c.threshold;
  c.caveat =
      "the FM bound constrains the embedding norm while the MixFM bound constrains the Mixup regularizer; "
      "the verdict compares both at the same numeric gamma";
  return c;
}

}  // namespace smfm
