#pragma once

#include "smfm/encoding.hpp"
#include "smfm/rng.hpp"
#include "smfm/sparse.hpp"

#include <array>
#include <cstddef>
#include <optional>

namespace smfm {

struct NegativeSampleResult {
  Dataset data;              // positives interleaved with their negatives
  std::size_t skipped = 0;   // positives whose user exhausted the item pool
};

/// Emits `k` negatives per positive by replacing its item feature (the one
/// entry inside `item_pool`) with an item drawn uniformly among those the
/// same user never interacted with. The user is the entry inside
/// `user_pool` when given, otherwise the whole non-item context of the
/// example. Throws ValidationError for k == 0 or a positive without exactly
/// one item feature.
NegativeSampleResult negative_sample(const Dataset& positives, FeatureRange item_pool, std::size_t k, Rng& rng,
                                     std::optional<FeatureRange> user_pool = std::nullopt);

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

/// Seeded disjoint random partition; part sizes are within one of
/// n * ratio. Throws ValidationError for n < 3 or ratios not summing to 1.
std::array<Dataset, 3> split_dataset(const Dataset& data, const SplitRatios& ratios, Rng& rng);

}  // namespace smfm
