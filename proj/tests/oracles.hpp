#pragma once

#include "smfm/fm.hpp"
#include "smfm/sparse.hpp"

#include <cstddef>
#include <vector>

namespace smfm::testing {

// O(n^2) AUC over all positive/negative pairs; ties count one half.
inline double pairwise_auc(const std::vector<double>& s, const std::vector<double>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1.0) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0.0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Explicit lifted representation: u and theta in R^{d^2 m^2}. Only the
// leading d*m(m-1)/2 coordinates of u are nonzero.
inline std::vector<double> lift_u(const SparseVector& x, std::size_t d) {
  const std::size_t m = x.dim();
  std::vector<double> u(d * d * m * m, 0.0);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t k = 0; k < d; ++k)
        u[pos++] = x.at(static_cast<FeatureIndex>(i)) * x.at(static_cast<FeatureIndex>(j));
  return u;
}

inline std::vector<double> lift_theta(const FmParams& p) {
  const std::size_t m = p.m, d = p.d;
  std::vector<double> t;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t k = 0; k < d; ++k) t.push_back(p.v(i)[k] * p.v(j)[k]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l)
          if (l != k) t.push_back(p.v(i)[k] * p.v(j)[l]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l) t.push_back(p.v(i)[k] * p.v(j)[l]);
  return t;
}

// theta^T Sigma theta with Sigma the (optionally centered) second moment of
// the lifted inputs, materialized in full.
inline double quadratic_form(const FmParams& p, const Dataset& data, bool centered) {
  const auto theta = lift_theta(p);
  const std::size_t D = theta.size();
  std::vector<std::vector<double>> us;
  std::vector<double> mean(D, 0.0);
  for (const auto& ex : data) {
    us.push_back(lift_u(ex.x, p.d));
    for (std::size_t a = 0; a < D; ++a) mean[a] += us.back()[a] / data.size();
  }
  std::vector<double> sigma(D * D, 0.0);
  for (const auto& u : us)
    for (std::size_t a = 0; a < D; ++a)
      for (std::size_t b = 0; b < D; ++b) {
        const double ua = centered ? u[a] - mean[a] : u[a];
        const double ub = centered ? u[b] - mean[b] : u[b];
        sigma[a * D + b] += ua * ub / data.size();
      }
  double q = 0.0;
  for (std::size_t a = 0; a < D; ++a)
    for (std::size_t b = 0; b < D; ++b) q += theta[a] * sigma[a * D + b] * theta[b];
  return q;
}

}  // namespace smfm::testing
