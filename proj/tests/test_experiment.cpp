#include "smfm/error.hpp"
#include "smfm/experiment.hpp"

#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace smfm;
using namespace smfm::testing;

namespace {

ExperimentData small_data() {
  SynthSpec spec;
  spec.m = 60;
  spec.n = 400;
  spec.auto_blocked = 2;
  const SynthData s = generate_synthetic(spec);
  return {s.train, s.valid, s.test};
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.train.epochs = 3;
  cfg.train.batch_size = 64;
  cfg.train.lr = 0.02;
  cfg.train.d = 2;
  cfg.repeats = 2;
  cfg.mix.p = 3;
  return cfg;
}

}  // namespace

TEST_CASE("config parsing and overrides") {
  std::istringstream in(
      "# experiment\nlr = 0.01\nbatch=128\n d = 16 # inline\nalpha = 0.4\nbeta=0.4\nn_prime = 100\n"
      "mode = smfm\nselect = final\nratio_grid = 0, 0.5, 1\nmethods = fm, mixfm\nsynth_blocked = 0:50, 1:51\n");
  ExperimentConfig cfg;
  cfg.apply(parse_config(in));
  CHECK(cfg.train.lr == 0.01);
  CHECK(cfg.train.batch_size == 128);
  CHECK(cfg.train.d == 16);
  CHECK(cfg.mix.alpha == 0.4);
  CHECK(cfg.mix.mode == AugmentMode::saliency);
  CHECK(cfg.selection == Selection::final_epoch);
  CHECK(cfg.ratio_grid == std::vector<double>{0, 0.5, 1});
  CHECK(cfg.methods == std::vector<std::string>{"fm", "mixfm"});
  REQUIRE(cfg.synth.blocked.size() == 2);
  CHECK(cfg.synth.blocked[1].second == 51);
  CHECK(cfg.resolve_n_prime(1000) == 100);
  cfg.n_prime.reset();
  cfg.mix_ratio = 0.5;
  CHECK(cfg.resolve_n_prime(1001) == 501);
  CHECK(cfg.mix_for(AugmentMode::mix, 10).n_prime == 5);

  CHECK_THROWS_AS(cfg.set("nonsense", "1"), ValidationError);
  CHECK_THROWS_AS(cfg.set("lr", "fast"), ValidationError);
  CHECK_THROWS_AS(cfg.set("epochs", "-1"), ValidationError);
  CHECK_THROWS_AS(cfg.set("methods", "fm,bogus"), ValidationError);
  std::istringstream bad("lr 0.1\n");
  CHECK_THROWS_AS(parse_config(bad), ParseError);
  ExperimentConfig zero;
  zero.repeats = 0;
  CHECK_THROWS_AS(zero.validate(), ValidationError);
  for (const char* key : {"lr", "batch", "d", "alpha", "beta", "n_prime", "p", "epochs", "delta", "noise_grid"})
    CHECK(std::find(ExperimentConfig::keys().begin(), ExperimentConfig::keys().end(), key) !=
          ExperimentConfig::keys().end());
}

TEST_CASE("run_once selects the best validation epoch") {
  const auto data = small_data();
  auto cfg = small_config();
  const auto run = run_once(data, cfg.train, cfg.mix_for(AugmentMode::none, data.train.size()),
                            repeat_streams(1, 0), Selection::best_valid);
  REQUIRE(run.selected_epoch >= 1);
  const auto& rec = run.result.history[run.selected_epoch - 1];
  CHECK(run.test_auc == rec.test->auc);
  for (const auto& r : run.result.history) CHECK(r.valid->auc <= rec.valid->auc);

  const auto fin = run_once(data, cfg.train, cfg.mix_for(AugmentMode::none, data.train.size()),
                            repeat_streams(1, 0), Selection::final_epoch);
  CHECK(fin.selected_epoch == 3);
  CHECK(fin.selected == fin.result.params);
}

TEST_CASE("ratio sweep rows are sorted with a zero self-baseline") {
  const auto data = small_data();
  auto cfg = small_config();
  cfg.ratio_grid = {1.0, 0.0, 0.5};
  const auto rows = sweep_ratio(cfg, data);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].x == 0.0);
  CHECK(rows[0].delta == 0.0);
  CHECK(rows[1].x == 0.5);
  CHECK(rows[2].x == 1.0);
  std::ostringstream out;
  write_sweep_csv(out, rows);
  CHECK(out.str().rfind("x,method,mean_auc,sd_auc,delta\n0,mix,", 0) == 0);
}

TEST_CASE("neighbour sweep has p=1 as its baseline") {
  const auto data = small_data();
  auto cfg = small_config();
  cfg.p_grid = {4, 1};
  const auto rows = sweep_neighbors(cfg, data);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].x == 1.0);
  CHECK(rows[0].delta == 0.0);
  CHECK(rows[0].method == "saliency");
  cfg.p_grid.clear();
  CHECK_THROWS_AS(sweep_neighbors(cfg, data), ValidationError);
}

TEST_CASE("embedding sweep covers grid x methods") {
  const auto data = small_data();
  auto cfg = small_config();
  cfg.d_grid = {2, 8};
  cfg.methods = {"fm", "mixfm"};
  const auto sweep = sweep_embedding(cfg, data);
  REQUIRE(sweep.rows.size() == 4);
  CHECK(sweep.mean_gamma.size() == 4);
  CHECK(sweep.rows[0].x == 2.0);
  CHECK(sweep.rows[0].delta == 0.0);  // fm against itself
  CHECK(sweep.rows[3].x == 8.0);
  for (double g : sweep.mean_gamma) CHECK(g > 0.0);
}

TEST_CASE("perturbation") {
  Rng rng(1);
  const Dataset d = random_dataset(50, 20, 5, rng);
  Rng a(2);
  const Dataset same = perturb_dataset(d, 0.0, a);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(same[i] == d[i]);
  const Dataset noisy = perturb_dataset(d, 0.3, a);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(noisy[i].y == d[i].y);
    for (const auto& e : noisy[i].x.entries()) {
      CHECK(d[i].x.contains(e.index));
      CHECK(e.value >= 0.0);
      CHECK(e.value <= 1.0);
      CHECK(std::fabs(e.value - std::clamp(d[i].x.at(e.index), 0.0, 1.0)) <= 0.3 + 1e-12);
    }
  }
  CHECK_THROWS_AS(perturb_dataset(d, -0.1, a), ValidationError);

  const auto data = small_data();
  auto cfg = small_config();
  cfg.noise_grid = {0.2, 0.0};
  cfg.methods = {"fm", "mixfm"};
  const auto rows = perturbation_sweep(cfg, data);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].x == 0.0);
  CHECK(rows[0].delta == 0.0);
  CHECK(rows[1].delta == 0.0);
  CHECK(rows[2].x == 0.2);

  std::map<std::string, FmParams> trained{{"zero", FmParams(data.train.dim(), 2)}};
  const auto fixed = perturbation_sweep(cfg, data, trained);
  for (const auto& r : fixed) CHECK(r.delta == 0.0);  // a constant model is immune
}

TEST_CASE("curves rows per supplied split") {
  const auto data = small_data();
  auto cfg = small_config();
  EvalSets eval;
  eval.test = &data.test;
  const auto r = train_augmented(data.train, cfg.train, cfg.mix, repeat_streams(3, 0), eval);
  std::ostringstream out;
  write_curves_csv(out, r.history);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,split,auc,logloss,seconds");
  int train = 0, test = 0, valid = 0;
  while (std::getline(in, line)) {
    train += line.find(",train,") != std::string::npos;
    test += line.find(",test,") != std::string::npos;
    valid += line.find(",valid,") != std::string::npos;
  }
  CHECK(train == 3);
  CHECK(test == 3);
  CHECK(valid == 0);
}

TEST_CASE("statistics helpers") {
  CHECK(mean_of({}) == 0.0);
  CHECK(mean_of({1, 2, 3}) == 2.0);
  CHECK(sd_of({5}) == 0.0);
  CHECK(sd_of({1, 2, 3}) == doctest::Approx(1.0));
}
