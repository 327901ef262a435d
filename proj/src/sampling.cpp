#include "smfm/sampling.hpp"

#include "smfm/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <vector>

namespace smfm {

namespace {

using UserKey = std::vector<SparseEntry>;

UserKey user_key(const SparseVector& x, FeatureRange item_pool, std::optional<FeatureRange> user_pool) {
  UserKey key;
  for (const auto& e : x.entries()) {
    if (user_pool ? user_pool->contains(e.index) : !item_pool.contains(e.index)) key.push_back(e);
  }
  return key;
}

bool key_less(const UserKey& a, const UserKey& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](const SparseEntry& l, const SparseEntry& r) {
                                        return l.index != r.index ? l.index < r.index : l.value < r.value;
                                      });
}

FeatureIndex item_of(const SparseVector& x, FeatureRange item_pool, std::size_t row) {
  std::optional<FeatureIndex> found;
  for (const auto& e : x.entries()) {
    if (!item_pool.contains(e.index)) continue;
    if (found) throw ValidationError("positive " + std::to_string(row) + " has more than one item feature");
    found = e.index;
  }
  if (!found) throw ValidationError("positive " + std::to_string(row) + " has no item feature in the pool");
  return *found;
}

}  // namespace

NegativeSampleResult negative_sample(const Dataset& positives, FeatureRange item_pool, std::size_t k, Rng& rng,
                                     std::optional<FeatureRange> user_pool) {
  if (k == 0) throw ValidationError("negative_sample: k must be >= 1");
  if (item_pool.size() == 0) throw ValidationError("negative_sample: empty item pool");
  if (item_pool.end > positives.dim()) throw ValidationError("negative_sample: item pool exceeds dimension");

  std::map<UserKey, std::set<FeatureIndex>, decltype(&key_less)> seen(&key_less);
  std::vector<FeatureIndex> items(positives.size());
  for (std::size_t i = 0; i < positives.size(); ++i) {
    items[i] = item_of(positives[i].x, item_pool, i);
    seen[user_key(positives[i].x, item_pool, user_pool)].insert(items[i]);
  }

  NegativeSampleResult result;
  std::vector<LabeledExample> out;
  out.reserve(positives.size() * (k + 1));
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const auto& pos = positives[i];
    out.push_back(pos);
    const auto& interacted = seen.at(user_key(pos.x, item_pool, user_pool));
    if (interacted.size() >= item_pool.size()) {
      ++result.skipped;
      continue;
    }

    // rejection sampling while most of the pool is free, otherwise draw
    // from the explicit complement
    const bool dense = interacted.size() * 2 > item_pool.size();
    std::vector<FeatureIndex> free_items;
    if (dense) {
      for (FeatureIndex it = item_pool.begin; it < item_pool.end; ++it)
        if (!interacted.contains(it)) free_items.push_back(it);
    }
    for (std::size_t j = 0; j < k; ++j) {
      FeatureIndex neg;
      if (dense) {
        neg = free_items[uniform_index(rng, free_items.size())];
      } else {
        do {
          neg = item_pool.begin + static_cast<FeatureIndex>(uniform_index(rng, item_pool.size()));
        } while (interacted.contains(neg));
      }
      std::vector<SparseEntry> entries(pos.x.entries().begin(), pos.x.entries().end());
      for (auto& e : entries)
        if (e.index == items[i]) e.index = neg;
      LabeledExample ex;
      ex.x = SparseVector::from_entries(std::move(entries), positives.dim());
      ex.y = 0.0;
      out.push_back(std::move(ex));
    }
  }
  result.data = Dataset(std::move(out), positives.dim());
  return result;
}

std::array<Dataset, 3> split_dataset(const Dataset& data, const SplitRatios& ratios, Rng& rng) {
  if (!(ratios.train > 0 && ratios.valid > 0 && ratios.test > 0))
    throw ValidationError("split ratios must be positive");
  if (std::fabs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9)
    throw ValidationError("split ratios must sum to 1");
  const std::size_t n = data.size();
  if (n < 3) throw ValidationError("cannot split a dataset with fewer than 3 examples");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.train));
  const auto n_valid = std::min(n - n_train, static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.valid)));

  std::array<std::vector<LabeledExample>, 3> parts;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t part = i < n_train ? 0 : (i < n_train + n_valid ? 1 : 2);
    parts[part].push_back(data[order[i]]);
  }
  return {Dataset(std::move(parts[0]), data.dim()), Dataset(std::move(parts[1]), data.dim()),
          Dataset(std::move(parts[2]), data.dim())};
}

}  // namespace smfm
