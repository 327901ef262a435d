#include "smfm/augment.hpp"

#include "smfm/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace smfm {

std::string_view to_string(AugmentMode mode) noexcept {
  switch (mode) {
    case AugmentMode::none: return "none";
    case AugmentMode::copy: return "copy";
    case AugmentMode::mix: return "mix";
    case AugmentMode::saliency: return "saliency";
  }
  return "unknown";
}

AugmentMode parse_augment_mode(std::string_view text) {
  if (text == "none" || text == "fm") return AugmentMode::none;
  if (text == "copy" || text == "copyfm") return AugmentMode::copy;
  if (text == "mix" || text == "mixfm") return AugmentMode::mix;
  if (text == "saliency" || text == "smfm") return AugmentMode::saliency;
  throw ValidationError("unknown augmentation mode '" + std::string(text) + "'");
}

void MixConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be > 0");
  if (p < 1) throw ValidationError("p must be >= 1");
}

double sample_beta(double alpha, double beta, Rng& rng) {
  std::gamma_distribution<double> ga(alpha, 1.0);
  std::gamma_distribution<double> gb(beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  if (x + y > 0.0) return x / (x + y);
  // both gammas underflowed (tiny shapes): the Beta mass sits on {0, 1}
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < alpha / (alpha + beta) ? 1.0 : 0.0;
}

double sample_lambda(const MixConfig& cfg, Rng& rng) {
  const double raw = sample_beta(cfg.alpha, cfg.beta, rng);
  const double lam = std::max(raw, 1.0 - raw);
  if (!(lam >= 0.5 && lam <= 1.0)) throw NumericalError("lambda outside [0.5, 1]");
  return lam;
}

LabeledExample mix_pair(const LabeledExample& a, const LabeledExample& b, double lam) {
  if (a.x.dim() != b.x.dim()) throw ValidationError("mix_pair: dimension mismatch");
  if (!(lam >= 0.5 && lam <= 1.0)) throw ValidationError("mix_pair: lambda must lie in [0.5, 1]");
  const double mu = 1.0 - lam;

  const auto ea = a.x.entries();
  const auto eb = b.x.entries();
  std::vector<SparseEntry> out;
  out.reserve(ea.size() + eb.size());
  std::size_t i = 0, j = 0;
  auto emit = [&](FeatureIndex idx, double v) {
    if (v != 0.0) out.push_back({idx, v});
  };
  while (i < ea.size() || j < eb.size()) {
    if (j == eb.size() || (i < ea.size() && ea[i].index < eb[j].index)) {
      emit(ea[i].index, lam * ea[i].value);
      ++i;
    } else if (i == ea.size() || eb[j].index < ea[i].index) {
      emit(eb[j].index, mu * eb[j].value);
      ++j;
    } else {
      emit(ea[i].index, lam * ea[i].value + mu * eb[j].value);
      ++i;
      ++j;
    }
  }

  LabeledExample ex;
  ex.x = SparseVector::from_sorted_unchecked(std::move(out), a.x.dim());
  ex.y = lam * a.y + mu * b.y;
  ex.origin = Provenance::mixed;
  return ex;
}

std::vector<std::size_t> select_first_parents(std::size_t n, std::size_t n_prime, Rng& rng) {
  if (n == 0) throw ValidationError("cannot select parents from an empty dataset");
  std::vector<std::size_t> out;
  out.reserve(n_prime);
  for (std::size_t copy = 0; copy < n_prime / n; ++copy)
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);

  // partial Fisher-Yates for the remainder
  const std::size_t extra = n_prime % n;
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t k = 0; k < extra; ++k) {
    const std::size_t r = k + uniform_index(rng, n - k);
    std::swap(pool[k], pool[r]);
    out.push_back(pool[k]);
  }
  return out;
}

LabeledExample draw_neighbor(const LabeledExample& first, const Dataset& data, const MixConfig& cfg, Rng& rng) {
  const auto& second = data[uniform_index(rng, data.size())];
  const double lam = sample_lambda(cfg, rng);
  return mix_pair(first, second, lam);
}

Dataset generate_mix_batch(const Dataset& data, const MixConfig& cfg, Rng& rng) {
  if (data.empty()) throw ValidationError("generate_mix_batch: empty dataset");
  cfg.validate();
  std::vector<LabeledExample> out;
  out.reserve(cfg.n_prime);
  for (std::size_t parent : select_first_parents(data.size(), cfg.n_prime, rng))
    out.push_back(draw_neighbor(data[parent], data, cfg, rng));
  return Dataset(std::move(out), data.dim());
}

double saliency(const FmParams& params, const LabeledExample& ex) {
  const double f = predict(params, ex.x);
  return (sigmoid(f) - ex.y) * f;
}

double input_gradient_saliency(const FmParams& params, const LabeledExample& ex) {
  const double f = predict(params, ex.x);
  const double g = sigmoid(f) - ex.y;
  const std::size_t d = params.d;
  const auto entries = ex.x.entries();
  std::vector<double> sums(d, 0.0);
  for (const auto& e : entries)
    for (std::size_t k = 0; k < d; ++k) sums[k] += params.V[e.index * d + k] * e.value;

  // df/dx_i = w_i + sum_k v_ik (s_k - v_ik x_i)
  double dot = 0.0;
  for (const auto& e : entries) {
    double df = params.w[e.index];
    for (std::size_t k = 0; k < d; ++k) {
      const double v = params.V[e.index * d + k];
      df += v * (sums[k] - v * e.value);
    }
    dot += g * df * e.value;
  }
  return dot;
}

SalientChoice select_salient_neighbor(const FmParams& params, const LabeledExample& first, const Dataset& data,
                                      const MixConfig& cfg, Rng& rng) {
  cfg.validate();
  SalientChoice best;
  best.candidate_scores.reserve(cfg.p);
  for (std::size_t c = 0; c < cfg.p; ++c) {
    LabeledExample cand = draw_neighbor(first, data, cfg, rng);
    double s = saliency(params, cand);
    if (cfg.abs_saliency) s = std::fabs(s);
    best.candidate_scores.push_back(s);
    if (c == 0 || s > best.score) {
      best.score = s;
      best.index = c;
      best.example = std::move(cand);
    }
  }
  return best;
}

Dataset copy_augment(const Dataset& data, std::size_t n_prime, Rng& rng) {
  if (n_prime > data.size())
    throw ValidationError("copy_augment: n' (" + std::to_string(n_prime) + ") exceeds dataset size (" +
                          std::to_string(data.size()) + ")");
  std::vector<LabeledExample> out;
  out.reserve(n_prime);
  if (n_prime > 0) {
    for (std::size_t i : select_first_parents(data.size(), n_prime, rng)) {
      LabeledExample ex = data[i];
      ex.origin = Provenance::copied;
      out.push_back(std::move(ex));
    }
  }
  return Dataset(std::move(out), data.dim());
}

Dataset build_augmentation(const Dataset& data, const MixConfig& cfg, const FmParams& params, Rng& rng) {
  switch (cfg.mode) {
    case AugmentMode::none:
      return Dataset(data.dim());
    case AugmentMode::copy:
      return copy_augment(data, cfg.n_prime, rng);
    case AugmentMode::mix:
      return generate_mix_batch(data, cfg, rng);
    case AugmentMode::saliency: {
      if (data.empty()) throw ValidationError("saliency augmentation: empty dataset");
      cfg.validate();
      std::vector<LabeledExample> out;
      out.reserve(cfg.n_prime);
      for (std::size_t parent : select_first_parents(data.size(), cfg.n_prime, rng))
        out.push_back(select_salient_neighbor(params, data[parent], data, cfg, rng).example);
      return Dataset(std::move(out), data.dim());
    }
  }
  throw ValidationError("unknown augmentation mode");
}

TrainResult train_augmented(const Dataset& data, const TrainConfig& cfg, const MixConfig& mix,
                            const SeedStreams& seeds, const EvalSets& eval) {
  cfg.validate();
  mix.validate();
  if (data.empty()) throw ValidationError("train_augmented: empty training set");
  for (const Dataset* s : {eval.valid, eval.test})
    if (s && s->dim() != data.dim()) throw ValidationError("evaluation set dimension differs from training set");

  Rng init_rng(seeds.init);
  Rng shuffle_rng(seeds.shuffle);
  Rng mix_rng(seeds.mixing);

  TrainResult result;
  result.params = init_params(data.dim(), cfg.d, init_rng, cfg.init_std);
  AdamState adam(result.params, cfg.lr);

  std::vector<const LabeledExample*> pool;
  double best_auc = 0.0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const Dataset extra = build_augmentation(data, mix, result.params, mix_rng);

    pool.clear();
    pool.reserve(data.size() + extra.size());
    for (const auto& ex : data) pool.push_back(&ex);
    for (const auto& ex : extra) pool.push_back(&ex);
    const EpochStats stats =
        train_epoch(result.params, adam, std::span<const LabeledExample* const>(pool), cfg, shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = stats.mean_loss;
    rec.trained_examples = stats.examples;
    rec.augmented = extra.size();
    if (eval.evaluate_train) rec.train = evaluate(result.params, data);
    if (eval.valid) rec.valid = evaluate(result.params, *eval.valid);
    if (eval.test) rec.test = evaluate(result.params, *eval.test);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (rec.valid && (!result.best_valid_params || rec.valid->auc > best_auc)) {
      best_auc = rec.valid->auc;
      result.best_valid_params = result.params;
      result.best_valid_epoch = epoch;
    }
    result.history.push_back(rec);
  }
  return result;
}

}  // namespace smfm
