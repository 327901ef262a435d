#pragma once

#include "smfm/fm.hpp"
#include "smfm/sparse.hpp"

#include <cstddef>
#include <span>

namespace smfm {

struct EvalReport {
  double auc = 0.0;
  double logloss = 0.0;
  std::size_t n_examples = 0;
  std::size_t n_positive = 0;
};

/// Mann-Whitney AUC: P(s+ > s-) + 0.5 P(s+ = s-) over all positive/negative
/// pairs, in O(n log n). Labels must be 0 or 1; throws ValidationError on
/// length mismatch or when only one class is present.
double auc(std::span<const double> scores, std::span<const double> labels);

/// Mean logistic loss of raw scores against labels in [0,1].
double logloss(std::span<const double> scores, std::span<const double> labels);

EvalReport evaluate(const FmParams& params, const Dataset& data);

struct TTestResult {
  enum class Verdict {
    tested,          // t and p are meaningful
    identical,       // every difference is exactly zero
    constant_shift,  // differences are constant and nonzero
  };
  Verdict verdict = Verdict::tested;
  double t = 0.0;        // +-inf for constant_shift, 0 for identical
  double p_value = 1.0;  // two-sided
  double mean_diff = 0.0;
  std::size_t dof = 0;
};

/// Paired two-sided Student t-test on a - b. Throws ValidationError on
/// mismatched lengths or n < 2.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b), accurate to about 1e-12 via the
/// continued-fraction expansion.
double incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

}  // namespace smfm
