#include "smfm/metrics.hpp"

#include "smfm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace smfm {

double auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw ValidationError("auc: scores and labels differ in length");
  std::size_t n_pos = 0;
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) throw ValidationError("auc: labels must be 0 or 1");
    n_pos += y == 1.0;
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("auc: need at least one positive and one negative");
  for (double s : scores)
    if (std::isnan(s)) throw NumericalError("auc: NaN score");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Walk groups of tied scores in ascending order. Each positive beats every
  // negative below its group and ties with the negatives inside it.
  double wins = 0.0;
  std::size_t neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos_in = 0, neg_in = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1.0 ? pos_in : neg_in) += 1;
      ++j;
    }
    wins += static_cast<double>(pos_in) * static_cast<double>(neg_below) +
            0.5 * static_cast<double>(pos_in) * static_cast<double>(neg_in);
    neg_below += neg_in;
    i = j;
  }
  return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double logloss(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw ValidationError("logloss: scores and labels differ in length");
  if (scores.empty()) throw ValidationError("logloss: empty input");
  long double sum = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) sum += logistic_loss(scores[i], labels[i]);
  return static_cast<double>(sum / static_cast<long double>(scores.size()));
}

EvalReport evaluate(const FmParams& params, const Dataset& data) {
  const auto scores = predict_all(params, data);
  const auto labels = data.labels();
  EvalReport r;
  r.auc = auc(scores, labels);
  r.logloss = logloss(scores, labels);
  r.n_examples = data.size();
  r.n_positive = data.count_positive();
  return r;
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) throw ValidationError("incomplete_beta: shapes must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("incomplete_beta: x outside [0,1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // use the expansion that converges fastest, via the symmetry relation
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0)) throw ValidationError("student_t_cdf: dof must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
  return t > 0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("paired_t_test: samples differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw ValidationError("paired_t_test: need at least two pairs");

  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : diff) ss += (x - mean) * (x - mean);

  TTestResult r;
  r.mean_diff = mean;
  r.dof = n - 1;
  const bool constant = std::all_of(diff.begin(), diff.end(), [&](double x) { return x == diff[0]; });
  if (constant) {
    if (diff[0] == 0.0) {
      r.verdict = TTestResult::Verdict::identical;
      r.t = 0.0;
      r.p_value = 1.0;
    } else {
      r.verdict = TTestResult::Verdict::constant_shift;
      r.t = diff[0] > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const double dof = static_cast<double>(n - 1);
  r.p_value = std::min(1.0, 2.0 * student_t_cdf(-std::fabs(r.t), dof));
  return r;
}

}  // namespace smfm
