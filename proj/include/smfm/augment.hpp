#pragma once

#include "smfm/fm.hpp"
#include "smfm/metrics.hpp"
#include "smfm/rng.hpp"
#include "smfm/sparse.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smfm {

enum class AugmentMode { none, copy, mix, saliency };

std::string_view to_string(AugmentMode mode) noexcept;
/// Accepts none|copy|mix|saliency and the method names fm|copyfm|mixfm|smfm.
AugmentMode parse_augment_mode(std::string_view text);

struct MixConfig {
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t n_prime = 0;  // mixed (or copied) samples per epoch
  std::size_t p = 10;       // candidate neighbours per first parent
  AugmentMode mode = AugmentMode::none;
  bool abs_saliency = false;  // rank candidates by |saliency| instead of the signed value

  void validate() const;
};

/// lambda' ~ Beta(alpha, beta), folded to max(lambda', 1 - lambda').
double sample_lambda(const MixConfig& cfg, Rng& rng);

/// Beta(alpha, beta) draw via two Gamma variates.
double sample_beta(double alpha, double beta, Rng& rng);

/// x = lam * a.x + (1 - lam) * b.x over the union of supports (exact
/// cancellations dropped), y = lam * a.y + (1 - lam) * b.y, flagged mixed.
/// lam must lie in [0.5, 1].
LabeledExample mix_pair(const LabeledExample& a, const LabeledExample& b, double lam);

/// First parents for one epoch: n' <= n draws without replacement;
/// otherwise floor(n'/n) full passes in order plus (n' mod n) distinct extras.
std::vector<std::size_t> select_first_parents(std::size_t n, std::size_t n_prime, Rng& rng);

/// One Mixup neighbour of `first`: second parent uniform with replacement
/// from `data`, fresh lambda.
LabeledExample draw_neighbor(const LabeledExample& first, const Dataset& data, const MixConfig& cfg, Rng& rng);

/// n' mixed examples built from the first parents above.
Dataset generate_mix_batch(const Dataset& data, const MixConfig& cfg, Rng& rng);

/// Weighted saliency (dL/df) * f(x) = (sigmoid(f) - y) * f.
double saliency(const FmParams& params, const LabeledExample& ex);

/// (dL/dx)^T x computed from the per-feature input gradient. Differs from
/// `saliency` whenever the bias or pairwise term is nonzero, because f is
/// not degree-1 homogeneous in x.
double input_gradient_saliency(const FmParams& params, const LabeledExample& ex);

struct SalientChoice {
  LabeledExample example;
  std::size_t index = 0;           // position among the candidates
  double score = 0.0;              // ranking value of the chosen candidate
  std::vector<double> candidate_scores;
};

/// Generates cfg.p candidates with draw_neighbor and keeps the one with the
/// largest saliency (lowest index on ties).
SalientChoice select_salient_neighbor(const FmParams& params, const LabeledExample& first, const Dataset& data,
                                      const MixConfig& cfg, Rng& rng);

/// n' verbatim copies of distinct examples, flagged copied. n' <= n.
Dataset copy_augment(const Dataset& data, std::size_t n_prime, Rng& rng);

/// Builds the per-epoch augmentation set for cfg.mode. `params` is the
/// model snapshot used for saliency ranking.
Dataset build_augmentation(const Dataset& data, const MixConfig& cfg, const FmParams& params, Rng& rng);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::size_t trained_examples = 0;
  std::size_t augmented = 0;
  EvalReport train;
  std::optional<EvalReport> valid;
  std::optional<EvalReport> test;
  double seconds = 0.0;
};

struct EvalSets {
  const Dataset* valid = nullptr;
  const Dataset* test = nullptr;
  bool evaluate_train = true;
};

struct TrainResult {
  FmParams params;  // after the last epoch
  std::vector<EpochRecord> history;
  /// Snapshot at the epoch with the highest validation AUC (earliest on
  /// ties); only set when a validation set was supplied.
  std::optional<FmParams> best_valid_params;
  std::size_t best_valid_epoch = 0;
};

/// Per epoch: regenerate the augmentation set D~ from the start-of-epoch
/// model, then one train_epoch over D u D~. Parameters are initialised from
/// the init stream, shuffles use the shuffle stream and every augmentation
/// draw uses the mixing stream.
TrainResult train_augmented(const Dataset& data, const TrainConfig& cfg, const MixConfig& mix,
                            const SeedStreams& seeds, const EvalSets& eval = {});

}  // namespace smfm
