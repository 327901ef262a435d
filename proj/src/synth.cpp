#include "smfm/synth.hpp"

#include "smfm/error.hpp"
#include "smfm/rng.hpp"

#include <algorithm>
#include <cmath>

namespace smfm {

void SynthSpec::validate() const {
  if (n < 3) throw ValidationError("synth: n must be >= 3");
  if (tau < 2) throw ValidationError("synth: tau must be >= 2 (blocked pairs need two fields)");
  if (tau > m) throw ValidationError("synth: tau exceeds m");
  if (d_true < 1) throw ValidationError("synth: d_true must be >= 1");
  if (!(planted_fraction > 0.0 && planted_fraction <= 1.0))
    throw ValidationError("synth: planted_fraction must lie in (0, 1]");
  if (!(zipf_s >= 0.0)) throw ValidationError("synth: zipf_s must be >= 0");
  if (blocked.empty() && auto_blocked == 0) throw ValidationError("synth: no blocked pair requested");
  const std::size_t width = m / tau;
  auto field = [&](FeatureIndex i) { return std::min<std::size_t>(i / width, tau - 1); };
  for (const auto& [i, j] : blocked) {
    if (i >= m || j >= m) throw ValidationError("synth: blocked pair index >= m");
    if (field(i) == field(j))
      throw ValidationError("synth: blocked pair (" + std::to_string(i) + "," + std::to_string(j) +
                            ") lies inside one field and can never co-occur");
  }
  if (blocked.empty() && auto_blocked > width) throw ValidationError("synth: auto_blocked exceeds field size");
}

namespace {

class FieldSampler {
public:
  FieldSampler(FeatureRange range, double s) : range_(range) {
    double acc = 0.0;
    for (std::size_t r = 0; r < range.size(); ++r) {
      acc += 1.0 / std::pow(static_cast<double>(r + 1), s);
      cdf_.push_back(acc);
    }
    for (auto& c : cdf_) c /= acc;
  }

  FeatureIndex draw(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double t = u(rng);
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), t);
    const auto r = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    return range_.begin + static_cast<FeatureIndex>(r);
  }

private:
  FeatureRange range_;
  std::vector<double> cdf_;
};

}  // namespace

std::size_t count_blocked_cooccurrences(const Dataset& data,
                                        const std::vector<std::pair<FeatureIndex, FeatureIndex>>& blocked) {
  std::size_t count = 0;
  for (const auto& ex : data) {
    for (const auto& [i, j] : blocked) {
      if (ex.x.contains(i) && ex.x.contains(j)) {
        ++count;
        break;
      }
    }
  }
  return count;
}

SynthData generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  SynthData out;

  const std::size_t width = spec.m / spec.tau;
  for (std::size_t f = 0; f < spec.tau; ++f) {
    const auto begin = static_cast<FeatureIndex>(f * width);
    const auto end = static_cast<FeatureIndex>(f + 1 == spec.tau ? spec.m : (f + 1) * width);
    out.fields.push_back({begin, end});
  }
  out.blocked = spec.blocked;
  if (out.blocked.empty()) {
    for (std::size_t r = 0; r < spec.auto_blocked; ++r)
      out.blocked.emplace_back(out.fields[0].begin + static_cast<FeatureIndex>(r),
                               out.fields[1].begin + static_cast<FeatureIndex>(r));
  }

  Rng truth_rng(derive_seed(spec.seed, "synth-truth"));
  Rng data_rng(derive_seed(spec.seed, "synth-data"));

  out.truth = FmParams(spec.m, spec.d_true);
  out.truth.w0 = spec.bias;
  {
    std::normal_distribution<double> wn(0.0, spec.linear_std);
    std::normal_distribution<double> vn(0.0, spec.truth_std);
    for (auto& w : out.truth.w) w = wn(truth_rng);
    for (auto& v : out.truth.V) v = vn(truth_rng);
  }

  std::vector<FieldSampler> samplers;
  for (const auto& r : out.fields) samplers.emplace_back(r, spec.zipf_s);

  auto label = [&](const SparseVector& x) {
    double f = predict(out.truth, x);
    for (const auto& [i, j] : out.blocked)
      if (x.contains(i) && x.contains(j)) f += spec.planted_weight;
    std::bernoulli_distribution coin(sigmoid(f));
    return coin(data_rng) ? 1.0 : 0.0;
  };
  auto field_of = [&](FeatureIndex i) {
    for (std::size_t f = 0; f < out.fields.size(); ++f)
      if (out.fields[f].contains(i)) return f;
    return out.fields.size();
  };
  auto make = [&](std::vector<FeatureIndex> feats) {
    std::vector<SparseEntry> entries;
    for (auto i : feats) entries.push_back({i, 1.0});
    LabeledExample ex;
    ex.x = SparseVector::from_entries(std::move(entries), spec.m);
    ex.y = label(ex.x);
    return ex;
  };
  auto draw_blocked_free = [&] {
    for (;;) {
      std::vector<FeatureIndex> feats;
      for (const auto& s : samplers) feats.push_back(s.draw(data_rng));
      bool bad = false;
      for (const auto& [i, j] : out.blocked) {
        if (std::find(feats.begin(), feats.end(), i) != feats.end() &&
            std::find(feats.begin(), feats.end(), j) != feats.end()) {
          bad = true;
          break;
        }
      }
      if (!bad) return make(std::move(feats));
    }
  };

  const std::size_t n_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.1 * spec.n)));
  const std::size_t n_valid = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.1 * spec.n)));
  const std::size_t n_train = spec.n - n_test - n_valid;

  std::vector<LabeledExample> train, valid, test;
  for (std::size_t i = 0; i < n_train; ++i) train.push_back(draw_blocked_free());
  for (std::size_t i = 0; i < n_valid; ++i) valid.push_back(draw_blocked_free());

  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n_test; ++i) {
    // the first test example always carries a planted pair
    if (i == 0 || u(data_rng) < spec.planted_fraction) {
      const auto& [a, b] = out.blocked[uniform_index(data_rng, out.blocked.size())];
      const std::size_t fa = field_of(a), fb = field_of(b);
      std::vector<FeatureIndex> feats;
      for (std::size_t f = 0; f < samplers.size(); ++f)
        feats.push_back(f == fa ? a : (f == fb ? b : samplers[f].draw(data_rng)));
      test.push_back(make(std::move(feats)));
    } else {
      std::vector<FeatureIndex> feats;
      for (const auto& s : samplers) feats.push_back(s.draw(data_rng));
      test.push_back(make(std::move(feats)));
    }
  }

  out.train = Dataset(std::move(train), spec.m);
  out.valid = Dataset(std::move(valid), spec.m);
  out.test = Dataset(std::move(test), spec.m);
  return out;
}

}  // namespace smfm
