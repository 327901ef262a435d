#pragma once

#include "smfm/encoding.hpp"
#include "smfm/fm.hpp"
#include "smfm/sparse.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace smfm {

/// Desk-scale CTR-like data with planted non-interactive feature pairs.
///
/// The m features are split into tau one-hot fields of near-equal size;
/// every example activates exactly one feature per field, drawn with a
/// Zipf(zipf_s) popularity profile. Labels are Bernoulli(sigmoid(f*)),
/// where f* is a random ground-truth FM plus `planted_weight` for each
/// blocked pair present. Blocked pairs never co-occur in train or valid;
/// a `planted_fraction` of test examples is forced to contain one.
struct SynthSpec {
  std::size_t m = 200;
  std::size_t n = 5000;
  std::size_t tau = 4;
  std::size_t d_true = 4;
  double truth_std = 0.5;     // std of ground-truth embeddings
  double linear_std = 0.5;    // std of ground-truth linear weights
  double bias = 0.0;
  double zipf_s = 1.0;
  double planted_weight = 2.0;
  double planted_fraction = 0.2;
  std::vector<std::pair<FeatureIndex, FeatureIndex>> blocked;
  std::size_t auto_blocked = 0;  // when `blocked` is empty: pair the top features of fields 0 and 1
  std::uint64_t seed = 1;

  /// Throws ValidationError for infeasible specs (pairs inside one field,
  /// indices >= m, tau > m, n < 3, no blocked pair).
  void validate() const;
};

struct SynthData {
  Dataset train, valid, test;
  FmParams truth;
  std::vector<FeatureRange> fields;
  std::vector<std::pair<FeatureIndex, FeatureIndex>> blocked;
};

SynthData generate_synthetic(const SynthSpec& spec);

/// Number of examples that activate both features of some blocked pair.
std::size_t count_blocked_cooccurrences(const Dataset& data,
                                        const std::vector<std::pair<FeatureIndex, FeatureIndex>>& blocked);

}  // namespace smfm
