#pragma once

#include "smfm/rng.hpp"
#include "smfm/sparse.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace smfm {

/// Parameters of a 2-way factorization machine over m features with
/// embedding size d. V is stored row-major: row i is the embedding v_i.
struct FmParams {
  std::size_t m = 0;
  std::size_t d = 0;
  double w0 = 0.0;
  std::vector<double> w;  // m
  std::vector<double> V;  // m * d

  FmParams() = default;
  FmParams(std::size_t m, std::size_t d) : m(m), d(d), w(m, 0.0), V(m * d, 0.0) {}

  std::span<double> v(std::size_t i) { return {V.data() + i * d, d}; }
  std::span<const double> v(std::size_t i) const { return {V.data() + i * d, d}; }

  bool all_finite() const;

  friend bool operator==(const FmParams&, const FmParams&) = default;
};

/// w = 0, w0 = 0, V ~ Normal(0, init_std^2).
FmParams init_params(std::size_t m, std::size_t d, Rng& rng, double init_std = 0.01);

/// Score split into its three terms. The pairwise term uses the O(d·nnz)
/// reformulation: 0.5 * sum_k [(sum_i v_ik x_i)^2 - sum_i v_ik^2 x_i^2].
struct ScoreParts {
  double bias = 0.0;
  double linear = 0.0;
  double pairwise = 0.0;

  double total() const noexcept { return bias + linear + pairwise; }
};

ScoreParts score_parts(const FmParams& params, const SparseVector& x);
double predict(const FmParams& params, const SparseVector& x);

/// Direct double loop over pairs i < j. O(d·nnz^2); test oracle.
double predict_naive(const FmParams& params, const SparseVector& x);

double sigmoid(double z) noexcept;

/// log(1 + exp(score)) - y * score, stable for large |score|; y may be soft.
double logistic_loss(double score, double y) noexcept;

/// Accumulator type for gradient sums.
using GradAccum = long double;

/// Mean batch gradient, shaped like FmParams. Entries for features absent
/// from the batch are exactly zero; `touched` lists the present ones.
struct Gradients {
  std::size_t m = 0;
  std::size_t d = 0;
  GradAccum w0 = 0;
  std::vector<GradAccum> w;
  std::vector<GradAccum> V;
  std::vector<FeatureIndex> touched;  // sorted, unique

  Gradients() = default;
  Gradients(std::size_t m, std::size_t d) : m(m), d(d), w(m, 0), V(m * d, 0) {}

  /// Zeroes only the touched entries.
  void clear();
};

/// Mean gradient of the logistic loss over the batch. Throws
/// ValidationError on an empty batch or dimension mismatch.
Gradients gradients(const FmParams& params, std::span<const LabeledExample> batch);
Gradients gradients(const FmParams& params, std::span<const LabeledExample* const> batch);

/// In-place variant reusing `out`'s storage; returns the summed batch loss
/// evaluated at the current parameters.
double accumulate_gradients(const FmParams& params, std::span<const LabeledExample* const> batch, Gradients& out);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  double m_w0 = 0.0;
  double v_w0 = 0.0;
  std::vector<double> m_w, v_w;
  std::vector<double> m_V, v_V;

  AdamState() = default;
  AdamState(const FmParams& shape, double lr);
};

/// One bias-corrected Adam update over every parameter. `l2` adds
/// l2 * param to the linear and embedding gradients. Throws NumericalError
/// naming the block ("w0", "w" or "V") when a gradient is not finite.
void adam_step(AdamState& state, FmParams& params, const Gradients& grads, double l2 = 0.0);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  std::size_t d = 8;
  double l2 = 0.0;
  double init_std = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochStats {
  double mean_loss = 0.0;  // loss of each example at the moment it was used
  std::size_t examples = 0;
  std::size_t steps = 0;
};

/// One pass over a seeded shuffle of `data` in minibatches.
EpochStats train_epoch(FmParams& params, AdamState& state, std::span<const LabeledExample* const> data,
                       const TrainConfig& cfg, Rng& rng);
EpochStats train_epoch(FmParams& params, AdamState& state, const Dataset& data, const TrainConfig& cfg, Rng& rng);

/// Scores of every example, in order.
std::vector<double> predict_all(const FmParams& params, const Dataset& data);

}  // namespace smfm
