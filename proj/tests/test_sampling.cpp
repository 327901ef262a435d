#include "smfm/error.hpp"
#include "smfm/sampling.hpp"

#include "support.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace smfm;
using namespace smfm::testing;

namespace {

// users occupy [0, 5), items [5, 25)
Dataset interactions(Rng& rng, std::size_t per_user) {
  std::vector<LabeledExample> out;
  for (FeatureIndex u = 0; u < 5; ++u) {
    std::set<FeatureIndex> items;
    while (items.size() < per_user) items.insert(5 + static_cast<FeatureIndex>(uniform_index(rng, 20)));
    for (auto it : items) out.push_back({SparseVector::from_entries({{u, 1.0}, {it, 1.0}}, 25), 1.0});
  }
  return Dataset(std::move(out), 25);
}

}  // namespace

TEST_CASE("negatives avoid every item the user interacted with") {
  const FeatureRange items{5, 25};
  for (std::size_t per_user : {3u, 15u}) {  // rejection path and complement path
    Rng rng(7);
    const Dataset pos = interactions(rng, per_user);
    std::map<FeatureIndex, std::set<FeatureIndex>> seen;
    for (const auto& ex : pos) seen[ex.x.entries()[0].index].insert(ex.x.entries()[1].index);

    Rng srng(1);
    const auto res = negative_sample(pos, items, 2, srng);
    CHECK(res.skipped == 0);
    REQUIRE(res.data.size() == pos.size() * 3);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      CHECK(res.data[3 * i] == pos[i]);
      for (std::size_t j = 1; j <= 2; ++j) {
        const auto& neg = res.data[3 * i + j];
        CHECK(neg.y == 0.0);
        const FeatureIndex user = neg.x.entries()[0].index;
        const FeatureIndex item = neg.x.entries()[1].index;
        CHECK(user == pos[i].x.entries()[0].index);
        CHECK(items.contains(item));
        CHECK_FALSE(seen[user].contains(item));
      }
    }
  }
}

TEST_CASE("explicit user pool and exhausted users") {
  std::vector<LabeledExample> rows;
  for (FeatureIndex it = 2; it < 5; ++it)  // user 0 saw every item
    rows.push_back({SparseVector::from_entries({{0, 1.0}, {it, 1.0}}, 5), 1.0});
  rows.push_back({SparseVector::from_entries({{1, 1.0}, {2, 1.0}}, 5), 1.0});
  const Dataset pos(std::move(rows), 5);
  Rng rng(3);
  const auto res = negative_sample(pos, FeatureRange{2, 5}, 1, rng, FeatureRange{0, 2});
  CHECK(res.skipped == 3);
  CHECK(res.data.size() == 5);
  CHECK(res.data[4].y == 0.0);
  CHECK_FALSE(res.data[4].x.contains(2));
}

TEST_CASE("negative sampling input checks") {
  Rng rng(1);
  const Dataset pos = interactions(rng, 2);
  CHECK_THROWS_AS(negative_sample(pos, FeatureRange{5, 25}, 0, rng), ValidationError);
  CHECK_THROWS_AS(negative_sample(pos, FeatureRange{0, 25}, 1, rng), ValidationError);  // two items per row
  CHECK_THROWS_AS(negative_sample(pos, FeatureRange{5, 40}, 1, rng), ValidationError);
}

TEST_CASE("negative sampling is deterministic under a seed") {
  Rng rng(5);
  const Dataset pos = interactions(rng, 4);
  Rng a(99), b(99);
  const auto ra = negative_sample(pos, FeatureRange{5, 25}, 3, a);
  const auto rb = negative_sample(pos, FeatureRange{5, 25}, 3, b);
  for (std::size_t i = 0; i < ra.data.size(); ++i) CHECK(ra.data[i] == rb.data[i]);
}

TEST_CASE("split is a disjoint partition with the requested sizes") {
  Rng rng(2);
  std::vector<LabeledExample> rows;
  for (FeatureIndex i = 0; i < 1000; ++i)
    rows.push_back({SparseVector::from_entries({{i, 1.0}}, 1000), static_cast<double>(i % 2)});
  const Dataset data(std::move(rows), 1000);

  Rng srng(4);
  const auto parts = split_dataset(data, SplitRatios{}, srng);
  CHECK(parts[0].size() == 800);
  CHECK(parts[1].size() == 100);
  CHECK(parts[2].size() == 100);
  std::set<FeatureIndex> ids;
  for (const auto& p : parts)
    for (const auto& ex : p) ids.insert(ex.x.entries()[0].index);
  CHECK(ids.size() == 1000);

  Rng again(4);
  const auto parts2 = split_dataset(data, SplitRatios{}, again);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < parts[k].size(); ++i) CHECK(parts[k][i] == parts2[k][i]);

  const Dataset small({data[0], data[1]}, 1000);
  CHECK_THROWS_AS(split_dataset(small, SplitRatios{}, srng), ValidationError);
  CHECK_THROWS_AS(split_dataset(data, SplitRatios{0.5, 0.2, 0.2}, srng), ValidationError);
}
