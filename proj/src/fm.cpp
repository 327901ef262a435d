#include "smfm/fm.hpp"

#include "smfm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace smfm {

namespace {

void check_dim(const FmParams& params, const SparseVector& x) {
  if (x.dim() != params.m)
    throw ValidationError("dimension mismatch: example has dim " + std::to_string(x.dim()) + ", model has m = " +
                          std::to_string(params.m));
}

template <class T>
bool finite_all(const std::vector<T>& v) {
  return std::all_of(v.begin(), v.end(), [](T x) { return std::isfinite(x); });
}

}  // namespace

bool FmParams::all_finite() const {
  return std::isfinite(w0) && finite_all(w) && finite_all(V);
}

FmParams init_params(std::size_t m, std::size_t d, Rng& rng, double init_std) {
  if (d == 0) throw ValidationError("embedding size must be >= 1");
  FmParams p(m, d);
  std::normal_distribution<double> normal(0.0, init_std);
  for (auto& v : p.V) v = normal(rng);
  return p;
}

ScoreParts score_parts(const FmParams& params, const SparseVector& x) {
  check_dim(params, x);
  ScoreParts s;
  s.bias = params.w0;
  for (const auto& e : x.entries()) s.linear += params.w[e.index] * e.value;

  double pair = 0.0;
  for (std::size_t k = 0; k < params.d; ++k) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& e : x.entries()) {
      const double t = params.V[e.index * params.d + k] * e.value;
      sum += t;
      sum_sq += t * t;
    }
    pair += sum * sum - sum_sq;
  }
  s.pairwise = 0.5 * pair;
  return s;
}

double predict(const FmParams& params, const SparseVector& x) { return score_parts(params, x).total(); }

double predict_naive(const FmParams& params, const SparseVector& x) {
  check_dim(params, x);
  double f = params.w0;
  const auto entries = x.entries();
  for (const auto& e : entries) f += params.w[e.index] * e.value;
  for (std::size_t a = 0; a < entries.size(); ++a) {
    for (std::size_t b = a + 1; b < entries.size(); ++b) {
      const auto vi = params.v(entries[a].index);
      const auto vj = params.v(entries[b].index);
      double dot = 0.0;
      for (std::size_t k = 0; k < params.d; ++k) dot += vi[k] * vj[k];
      f += dot * entries[a].value * entries[b].value;
    }
  }
  return f;
}

double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_loss(double score, double y) noexcept {
  // log(1 + e^s) = max(s, 0) + log1p(e^{-|s|})
  return std::max(score, 0.0) + std::log1p(std::exp(-std::fabs(score))) - y * score;
}

void Gradients::clear() {
  w0 = 0;
  for (auto i : touched) {
    w[i] = 0;
    std::fill_n(V.begin() + static_cast<std::ptrdiff_t>(i * d), d, GradAccum{0});
  }
  touched.clear();
}

double accumulate_gradients(const FmParams& params, std::span<const LabeledExample* const> batch, Gradients& out) {
  if (batch.empty()) throw ValidationError("gradients: empty batch");
  if (out.m != params.m || out.d != params.d) out = Gradients(params.m, params.d);
  out.clear();

  const std::size_t d = params.d;
  std::vector<double> sums(d);
  double loss_sum = 0.0;
  for (const LabeledExample* ex : batch) {
    check_dim(params, ex->x);
    const auto entries = ex->x.entries();
    std::fill(sums.begin(), sums.end(), 0.0);
    double linear = 0.0;
    double pair = 0.0;
    for (const auto& e : entries) linear += params.w[e.index] * e.value;
    for (std::size_t k = 0; k < d; ++k) {
      double sq = 0.0;
      for (const auto& e : entries) {
        const double t = params.V[e.index * d + k] * e.value;
        sums[k] += t;
        sq += t * t;
      }
      pair += sums[k] * sums[k] - sq;
    }
    const double f = params.w0 + linear + 0.5 * pair;
    loss_sum += logistic_loss(f, ex->y);

    const GradAccum g = sigmoid(f) - ex->y;
    out.w0 += g;
    for (const auto& e : entries) {
      out.touched.push_back(e.index);
      out.w[e.index] += g * e.value;
      const double x2 = e.value * e.value;
      for (std::size_t k = 0; k < d; ++k) {
        const double vik = params.V[e.index * d + k];
        out.V[e.index * d + k] += g * (e.value * sums[k] - vik * x2);
      }
    }
  }

  std::sort(out.touched.begin(), out.touched.end());
  out.touched.erase(std::unique(out.touched.begin(), out.touched.end()), out.touched.end());
  const GradAccum inv = GradAccum{1} / static_cast<GradAccum>(batch.size());
  out.w0 *= inv;
  for (auto i : out.touched) {
    out.w[i] *= inv;
    for (std::size_t k = 0; k < d; ++k) out.V[i * d + k] *= inv;
  }
  return loss_sum;
}

Gradients gradients(const FmParams& params, std::span<const LabeledExample* const> batch) {
  Gradients g(params.m, params.d);
  accumulate_gradients(params, batch, g);
  return g;
}

Gradients gradients(const FmParams& params, std::span<const LabeledExample> batch) {
  std::vector<const LabeledExample*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& ex : batch) ptrs.push_back(&ex);
  return gradients(params, std::span<const LabeledExample* const>(ptrs));
}

AdamState::AdamState(const FmParams& shape, double lr)
    : lr(lr), m_w(shape.m, 0.0), v_w(shape.m, 0.0), m_V(shape.V.size(), 0.0), v_V(shape.V.size(), 0.0) {}

void adam_step(AdamState& s, FmParams& params, const Gradients& grads, double l2) {
  if (grads.m != params.m || grads.d != params.d || s.m_w.size() != params.m || s.m_V.size() != params.V.size())
    throw ValidationError("adam_step: shape mismatch");
  if (!std::isfinite(static_cast<double>(grads.w0))) throw NumericalError("non-finite gradient in block w0");
  if (!finite_all(grads.w)) throw NumericalError("non-finite gradient in block w");
  if (!finite_all(grads.V)) throw NumericalError("non-finite gradient in block V");

  ++s.t;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  auto update = [&](double& p, double& m, double& v, double g) {
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g * g;
    p -= s.lr * (m / c1) / (std::sqrt(v / c2) + s.eps);
  };

  update(params.w0, s.m_w0, s.v_w0, static_cast<double>(grads.w0));
  for (std::size_t i = 0; i < params.m; ++i)
    update(params.w[i], s.m_w[i], s.v_w[i], static_cast<double>(grads.w[i]) + l2 * params.w[i]);
  for (std::size_t i = 0; i < params.V.size(); ++i)
    update(params.V[i], s.m_V[i], s.v_V[i], static_cast<double>(grads.V[i]) + l2 * params.V[i]);

  if (!params.all_finite()) throw NumericalError("adam_step produced non-finite parameters");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ValidationError("learning rate must be finite and non-negative");
  if (d < 1) throw ValidationError("embedding size must be >= 1");
  if (!(l2 >= 0.0)) throw ValidationError("l2 must be non-negative");
}

EpochStats train_epoch(FmParams& params, AdamState& state, std::span<const LabeledExample* const> data,
                       const TrainConfig& cfg, Rng& rng) {
  if (data.empty()) throw ValidationError("train_epoch: empty dataset");
  if (cfg.batch_size < 1) throw ValidationError("batch size must be >= 1");

  std::vector<const LabeledExample*> order(data.begin(), data.end());
  std::shuffle(order.begin(), order.end(), rng);

  Gradients grads(params.m, params.d);
  EpochStats stats;
  double loss = 0.0;
  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t len = std::min(cfg.batch_size, order.size() - start);
    std::span<const LabeledExample* const> batch(order.data() + start, len);
    loss += accumulate_gradients(params, batch, grads);
    adam_step(state, params, grads, cfg.l2);
    ++stats.steps;
  }
  stats.examples = order.size();
  stats.mean_loss = loss / static_cast<double>(order.size());
  return stats;
}

EpochStats train_epoch(FmParams& params, AdamState& state, const Dataset& data, const TrainConfig& cfg, Rng& rng) {
  std::vector<const LabeledExample*> ptrs;
  ptrs.reserve(data.size());
  for (const auto& ex : data) ptrs.push_back(&ex);
  return train_epoch(params, state, std::span<const LabeledExample* const>(ptrs), cfg, rng);
}

std::vector<double> predict_all(const FmParams& params, const Dataset& data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& ex : data) out.push_back(predict(params, ex.x));
  return out;
}

}  // namespace smfm
