#include "smfm/checkpoint.hpp"
#include "smfm/error.hpp"
#include "smfm/fm.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace smfm;
using namespace smfm::testing;

namespace {

// Mean logistic loss over a batch, evaluated with the naive pairwise sum.
double batch_loss(const FmParams& p, const std::vector<LabeledExample>& batch) {
  long double s = 0;
  for (const auto& ex : batch) s += logistic_loss(predict_naive(p, ex.x), ex.y);
  return static_cast<double>(s / batch.size());
}

}  // namespace

TEST_CASE("linear-time score matches the pairwise sum") {
  Rng rng(1);
  for (int t = 0; t < 500; ++t) {
    const std::size_t m = 1 + uniform_index(rng, 12);
    const std::size_t d = 1 + uniform_index(rng, 6);
    const FmParams p = random_params(m, d, rng);
    const SparseVector x = random_sparse(m, m, rng);
    const double naive = predict_naive(p, x);
    CHECK(std::fabs(predict(p, x) - naive) <= 1e-10 * (1.0 + std::fabs(naive)));
    const auto parts = score_parts(p, x);
    CHECK(parts.total() == doctest::Approx(parts.bias + parts.linear + parts.pairwise));
  }
}

TEST_CASE("score of special inputs") {
  Rng rng(2);
  const FmParams p = random_params(5, 3, rng);
  CHECK(predict(p, SparseVector(5)) == p.w0);
  const auto one = SparseVector::from_entries({{2, 0.5}}, 5);
  CHECK(predict(p, one) == doctest::Approx(p.w0 + 0.5 * p.w[2]));
  CHECK_THROWS_AS(predict(p, SparseVector(6)), ValidationError);
}

TEST_CASE("sigmoid and logistic loss are stable") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(std::isfinite(logistic_loss(-800.0, 1.0)));
  CHECK(logistic_loss(-800.0, 1.0) == doctest::Approx(800.0));
  CHECK(logistic_loss(0.0, 0.5) == doctest::Approx(std::log(2.0)));
  for (double s : {-3.0, -0.1, 0.4, 5.0})
    for (double y : {0.0, 0.3, 1.0})
      CHECK(logistic_loss(s, y) ==
            doctest::Approx(-(y * std::log(sigmoid(s)) + (1 - y) * std::log(1 - sigmoid(s)))));
}

TEST_CASE("gradients match central finite differences") {
  Rng rng(3);
  for (int t = 0; t < 40; ++t) {
    const std::size_t m = 2 + uniform_index(rng, 6);
    const std::size_t d = 1 + uniform_index(rng, 3);
    FmParams p = random_params(m, d, rng);
    std::vector<LabeledExample> batch;
    for (std::size_t b = 0; b < 1 + uniform_index(rng, 4); ++b)
      batch.push_back({random_sparse(m, m, rng), std::uniform_real_distribution<double>(0, 1)(rng)});
    const Gradients g = gradients(p, std::span<const LabeledExample>(batch));

    const double h = 1e-5;
    auto fd = [&](double& param) {
      const double keep = param;
      param = keep + h;
      const double up = batch_loss(p, batch);
      param = keep - h;
      const double down = batch_loss(p, batch);
      param = keep;
      return (up - down) / (2 * h);
    };
    auto close = [](long double analytic, double numeric) {
      return std::fabs(static_cast<double>(analytic) - numeric) <= 1e-4 * std::max(1.0, std::fabs(numeric));
    };
    CHECK(close(g.w0, fd(p.w0)));
    for (std::size_t i = 0; i < m; ++i) CHECK(close(g.w[i], fd(p.w[i])));
    for (std::size_t i = 0; i < m * d; ++i) CHECK(close(g.V[i], fd(p.V[i])));
  }
}

TEST_CASE("untouched features get exactly zero gradient") {
  Rng rng(4);
  const FmParams p = random_params(10, 2, rng);
  std::vector<LabeledExample> batch{{SparseVector::from_entries({{1, 1.0}, {4, 0.5}}, 10), 1.0}};
  const Gradients g = gradients(p, std::span<const LabeledExample>(batch));
  CHECK(g.touched == std::vector<FeatureIndex>{1, 4});
  for (std::size_t i : {0u, 2u, 3u, 9u}) {
    CHECK(g.w[i] == 0);
    CHECK(g.V[i * 2] == 0);
  }
  CHECK_THROWS_AS(gradients(p, std::span<const LabeledExample>()), ValidationError);
}

TEST_CASE("adam matches a scalar reference") {
  FmParams p(1, 1);
  p.w0 = 0.3;
  p.w[0] = -0.2;
  p.V[0] = 0.1;
  AdamState s(p, 0.01);
  double ref = 0.3, m = 0.0, v = 0.0;
  const double g_seq[] = {0.5, -0.25, 1.0, 0.0, -2.0};
  for (int t = 1; t <= 5; ++t) {
    Gradients g(1, 1);
    g.w0 = g_seq[t - 1];
    adam_step(s, p, g);
    const double gt = g_seq[t - 1];
    m = 0.9 * m + 0.1 * gt;
    v = 0.999 * v + 0.001 * gt * gt;
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    ref -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(p.w0 == doctest::Approx(ref).epsilon(1e-14));
  }
  CHECK(s.t == 5);
  CHECK(p.w[0] == -0.2);  // zero gradient, zero moments: no motion
}

TEST_CASE("adam rejects non-finite gradients by block") {
  FmParams p(2, 2);
  AdamState s(p, 0.01);
  Gradients g(2, 2);
  g.V[3] = std::numeric_limits<long double>::infinity();
  try {
    adam_step(s, p, g);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("V") != std::string::npos);
    CHECK(e.exit_code() == 3);
  }
}

TEST_CASE("training lowers the loss and is deterministic") {
  Rng data_rng(5);
  FmParams truth = random_params(20, 3, data_rng, 1.0);
  std::vector<LabeledExample> rows;
  for (int i = 0; i < 400; ++i) {
    auto x = random_sparse(20, 4, data_rng, true);
    const double y = predict(truth, x) > 0 ? 1.0 : 0.0;
    rows.push_back({std::move(x), y});
  }
  const Dataset data(std::move(rows), 20);
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.lr = 0.05;
  cfg.d = 3;

  auto run = [&] {
    Rng init(1), shuffle(2);
    FmParams p = init_params(20, 3, init);
    AdamState s(p, cfg.lr);
    std::vector<double> losses;
    for (int e = 0; e < 10; ++e) losses.push_back(train_epoch(p, s, data, cfg, shuffle).mean_loss);
    return std::make_pair(p, losses);
  };
  const auto [p1, l1] = run();
  const auto [p2, l2] = run();
  CHECK(p1 == p2);
  CHECK(l1.back() < 0.6 * l1.front());
}

TEST_CASE("init and config validation") {
  Rng rng(6);
  const FmParams p = init_params(50, 4, rng);
  CHECK(p.w0 == 0.0);
  for (double w : p.w) CHECK(w == 0.0);
  double ss = 0;
  for (double v : p.V) ss += v * v;
  CHECK(std::sqrt(ss / p.V.size()) == doctest::Approx(0.01).epsilon(0.15));
  CHECK_THROWS_AS(init_params(5, 0, rng), ValidationError);

  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("checkpoint round-trip is exact and checksummed") {
  Rng rng(7);
  const FmParams p = random_params(9, 3, rng);
  std::ostringstream out;
  save_checkpoint(out, p);
  const std::string text = out.str();
  std::istringstream in(text);
  CHECK(load_checkpoint(in) == p);

  std::string corrupt = text;
  const auto pos = corrupt.find("w0 ") + 3;
  corrupt[pos] = corrupt[pos] == '1' ? '2' : '1';
  std::istringstream bad(corrupt);
  CHECK_THROWS_AS(load_checkpoint(bad), ValidationError);

  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_checkpoint(truncated), ValidationError);

  TempDir dir;
  save_checkpoint_file(dir / "m.ckpt", p);
  CHECK(load_checkpoint_file(dir / "m.ckpt") == p);
  CHECK_THROWS_AS(load_checkpoint_file(dir / "none.ckpt"), IoError);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
