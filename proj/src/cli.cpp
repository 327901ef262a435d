#include "smfm/cli.hpp"

#include "smfm/checkpoint.hpp"
#include "smfm/encoding.hpp"
#include "smfm/error.hpp"
#include "smfm/experiment.hpp"
#include "smfm/metrics.hpp"
#include "smfm/sampling.hpp"
#include "smfm/synth.hpp"
#include "smfm/theory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace smfm {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Config file, repeated --set key=value, then one --<key> flag per config key.
struct ConfigOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> flags;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "override one config key (key=value), repeatable");
    for (const auto& key : ExperimentConfig::keys()) {
      std::string names = "--" + key;
      if (key.find('_') != std::string::npos) {
        std::string dashed = key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        names += ",--" + dashed;
      }
      flags[key] = app->add_option(names, values[key], "config key '" + key + "'")->group("Config keys");
    }
  }

  ExperimentConfig build() const {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg.apply(parse_config_file(config_path));
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
      cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, opt] : flags)
      if (opt->count() > 0) cfg.set(key, values.at(key));
    cfg.validate();
    return cfg;
  }
};

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

void write_text(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

void write_dataset(const fs::path& path, const Dataset& data, const std::vector<std::string>& comments = {}) {
  write_sparse_file(path.string(), data, comments);
}

std::vector<double> parse_ratios(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, text.find(':') != std::string::npos ? ':' : ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ValidationError("--split: malformed ratio '" + tok + "'");
    }
  }
  if (out.size() != 3) throw ValidationError("--split expects three ratios, e.g. 8:1:1");
  double sum = 0.0;
  for (double r : out) {
    if (!(r >= 0.0)) throw ValidationError("--split ratios must be >= 0");
    sum += r;
  }
  if (!(sum > 0.0)) throw ValidationError("--split ratios sum to zero");
  for (double& r : out) r /= sum;
  return out;
}

Json report_json(const EvalReport& r) {
  Json j;
  j["auc"] = r.auc;
  j["logloss"] = r.logloss;
  j["n"] = r.n_examples;
  j["n_positive"] = r.n_positive;
  return j;
}

Json bound_json(const BoundReport& r) {
  Json j;
  j["variant"] = std::string(to_string(r.variant));
  j["gamma"] = r.inputs.gamma;
  j["d"] = r.inputs.d;
  j["tau"] = r.inputs.tau;
  j["n"] = r.inputs.n;
  j["delta"] = r.inputs.delta;
  j["empirical_risk"] = r.empirical_risk;
  j["rademacher_term"] = r.rademacher_term;
  j["confidence_term"] = r.confidence_term;
  j["total_gap"] = r.total_gap;
  return j;
}

Dataset fit_to(const Dataset& data, const FmParams& params) {
  if (data.dim() > params.m)
    throw ValidationError("data dimension " + std::to_string(data.dim()) + " exceeds model dimension " +
                          std::to_string(params.m));
  return data.dim() == params.m ? data : data.with_dim(params.m);
}

int cmd_encode(const std::string& input, const std::string& schema_path, const std::string& delimiter, bool fit,
               bool oov, std::size_t negatives, const std::string& item_col, const std::string& user_col,
               const std::string& split, std::uint64_t seed, const std::string& out_dir) {
  if (delimiter.size() != 1) throw ValidationError("--delimiter must be a single character");
  EncodingSchema schema = EncodingSchema::load(schema_path, oov);
  const RecordTable table = RecordTable::read_file(input, delimiter[0]);
  if (fit) schema.fit(table.header, table.rows);
  Dataset data = encode_records(table, schema);
  const SeedStreams seeds = SeedStreams::from_master(seed);

  std::size_t skipped = 0;
  if (negatives > 0) {
    if (item_col.empty()) throw ValidationError("--negatives needs --item-col");
    if (data.count_positive() != data.size())
      throw ValidationError("--negatives expects positive-only records");
    std::optional<FeatureRange> users;
    if (!user_col.empty()) users = schema.range(user_col);
    Rng rng(seeds.negatives);
    auto res = negative_sample(data, schema.range(item_col), negatives, rng, users);
    data = std::move(res.data);
    skipped = res.skipped;
  }

  const fs::path dir = ensure_dir(out_dir);
  if (split.empty()) {
    write_dataset(dir / "data.svm", data);
  } else {
    const auto r = parse_ratios(split);
    Rng rng(seeds.split);
    const auto parts = split_dataset(data, SplitRatios{r[0], r[1], r[2]}, rng);
    write_dataset(dir / "train.svm", parts[0]);
    write_dataset(dir / "valid.svm", parts[1]);
    write_dataset(dir / "test.svm", parts[2]);
  }
  std::cout << "encoded " << data.size() << " examples, m=" << data.dim() << ", tau=" << data.tau();
  if (negatives > 0) std::cout << ", skipped positives=" << skipped;
  std::cout << '\n';
  return 0;
}

int cmd_synth(const ExperimentConfig& cfg) {
  const SynthData s = generate_synthetic(cfg.synth);
  const fs::path dir = ensure_dir(cfg.out_dir);
  write_dataset(dir / "train.svm", s.train);
  write_dataset(dir / "valid.svm", s.valid);
  write_dataset(dir / "test.svm", s.test);
  save_checkpoint_file((dir / "truth.ckpt").string(), s.truth);
  write_text(dir / "blocked.txt", [&](std::ostream& out) {
    for (const auto& [i, j] : s.blocked) out << i << ' ' << j << '\n';
  });
  std::cout << "train=" << s.train.size() << " valid=" << s.valid.size() << " test=" << s.test.size()
            << " m=" << s.train.dim() << " blocked=" << s.blocked.size()
            << " test_with_blocked=" << count_blocked_cooccurrences(s.test, s.blocked) << '\n';
  return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
  const ExperimentData data = load_experiment_data(cfg);
  const MixConfig mix = cfg.mix_for(cfg.mix.mode, data.train.size());
  EvalSets eval;
  eval.valid = data.has_valid() ? &data.valid : nullptr;
  eval.test = data.has_test() ? &data.test : nullptr;
  const TrainResult result = train_augmented(data.train, cfg.train, mix, repeat_streams(cfg.seed, 0), eval);

  const fs::path dir = ensure_dir(cfg.out_dir);
  write_text(dir / "curves.csv", [&](std::ostream& out) { write_curves_csv(out, result.history); });
  const std::string ckpt = cfg.checkpoint.empty() ? (dir / "model.ckpt").string() : cfg.checkpoint;
  save_checkpoint_file(ckpt, result.params);

  const auto& last = result.history.back();
  std::cout << "mode=" << to_string(mix.mode) << " epochs=" << result.history.size()
            << " train_auc=" << format_double(last.train.auc);
  if (last.test) std::cout << " test_auc=" << format_double(last.test->auc);
  if (result.best_valid_params) std::cout << " best_valid_epoch=" << result.best_valid_epoch;
  std::cout << '\n';
  return 0;
}

int cmd_evaluate(const std::string& ckpt, const std::string& data_path, bool clamp, const std::string& output) {
  const FmParams params = load_checkpoint_file(ckpt);
  ParseOptions opts;
  opts.clamp = clamp;
  const Dataset data = fit_to(read_sparse_file(data_path, std::nullopt, opts), params);
  const std::string text = report_json(evaluate(params, data)).dump(2) + "\n";
  std::cout << text;
  if (!output.empty()) write_text(output, [&](std::ostream& out) { out << text; });
  return 0;
}

// The `checkpoint` key names the model used for saliency ranking; without it
// a fresh initialization is used.
int cmd_augment(const ExperimentConfig& cfg) {
  const std::string& ckpt = cfg.checkpoint;
  if (cfg.train_path.empty()) throw ValidationError("no training file configured (key 'train')");
  ParseOptions opts;
  opts.clamp = cfg.clamp;
  Dataset data = read_sparse_file(cfg.train_path, std::nullopt, opts);
  const SeedStreams seeds = repeat_streams(cfg.seed, 0);
  FmParams params;
  if (!ckpt.empty()) {
    params = load_checkpoint_file(ckpt);
    data = fit_to(data, params);
  } else {
    Rng init(seeds.init);
    params = init_params(data.dim(), cfg.train.d, init, cfg.train.init_std);
  }
  const MixConfig mix = cfg.mix_for(cfg.mix.mode, data.size());
  Rng rng(seeds.mixing);
  const Dataset extra = build_augmentation(data, mix, params, rng);

  const fs::path dir = ensure_dir(cfg.out_dir);
  const std::string tag = mix.mode == AugmentMode::copy ? "copied" : "mixed";
  write_dataset(dir / "augmented.svm", extra,
                {tag, " mode=" + std::string(to_string(mix.mode)) + " n_prime=" + std::to_string(mix.n_prime) +
                          " p=" + std::to_string(mix.p) + " alpha=" + format_double(mix.alpha) +
                          " beta=" + format_double(mix.beta)});
  std::cout << "augmented " << extra.size() << " examples\n";
  return 0;
}

int cmd_bound(const ExperimentConfig& cfg, const std::string& data_path) {
  if (cfg.checkpoint.empty()) throw ValidationError("bound needs --checkpoint");
  const FmParams params = load_checkpoint_file(cfg.checkpoint);
  const std::string path = data_path.empty() ? cfg.train_path : data_path;
  if (path.empty()) throw ValidationError("bound needs --data or a 'train' key");
  ParseOptions opts;
  opts.clamp = cfg.clamp;
  const Dataset data = fit_to(read_sparse_file(path, std::nullopt, opts), params);
  if (data.empty()) throw ValidationError("bound: empty dataset");

  BoundInputs in;
  in.gamma = gamma_of(params);
  in.d = params.d;
  in.tau = std::max<std::size_t>(data.tau(), 1);
  in.n = data.size();
  in.delta = cfg.delta;

  std::size_t errors = 0;
  for (const auto& ex : data)
    if ((predict(params, ex.x) >= 0.0) != (ex.y >= 0.5)) ++errors;
  const double risk = static_cast<double>(errors) / static_cast<double>(data.size());
  const BoundComparison cmp = compare_bounds(in, risk);

  Json j;
  j["fm"] = bound_json(cmp.fm);
  j["mixfm"] = bound_json(cmp.mixfm);
  j["threshold"] = cmp.threshold;
  j["verdict"] = cmp.mixfm_tighter ? "mixfm-tighter" : "fm-tighter";
  j["caveat"] = cmp.caveat;
  Json diag;
  diag["gamma_tilde_estimate"] = gamma_tilde_estimate(params, data);
  diag["interaction_energy"] = interaction_energy(params, data, false);
  diag["interaction_energy_centered"] = interaction_energy(params, data, true);
  j["diagnostics"] = diag;

  const std::string text = j.dump(2) + "\n";
  const fs::path dir = ensure_dir(cfg.out_dir);
  write_text(dir / "bound.json", [&](std::ostream& out) { out << text; });
  std::cout << text;
  return 0;
}

void emit_sweep(const ExperimentConfig& cfg, const std::vector<SweepRow>& rows) {
  const fs::path dir = ensure_dir(cfg.out_dir);
  write_text(dir / "sweep.csv", [&](std::ostream& out) { write_sweep_csv(out, rows); });
  write_sweep_csv(std::cout, rows);
}

int cmd_sweep_ratio(const ExperimentConfig& cfg) {
  emit_sweep(cfg, sweep_ratio(cfg, load_experiment_data(cfg)));
  return 0;
}

int cmd_sweep_neighbors(const ExperimentConfig& cfg) {
  emit_sweep(cfg, sweep_neighbors(cfg, load_experiment_data(cfg)));
  return 0;
}

int cmd_sweep_embedding(const ExperimentConfig& cfg) {
  const EmbeddingSweep sweep = sweep_embedding(cfg, load_experiment_data(cfg));
  emit_sweep(cfg, sweep.rows);
  write_text(fs::path(cfg.out_dir) / "embedding_gamma.csv", [&](std::ostream& out) {
    out << "x,method,mean_gamma\n";
    for (std::size_t i = 0; i < sweep.rows.size(); ++i)
      out << format_double(sweep.rows[i].x) << ',' << sweep.rows[i].method << ','
          << format_double(sweep.mean_gamma[i]) << '\n';
  });
  return 0;
}

int cmd_perturb(const ExperimentConfig& cfg, const std::vector<std::string>& models) {
  const ExperimentData data = load_experiment_data(cfg);
  std::map<std::string, FmParams> trained;
  for (const auto& spec : models) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--model expects name=checkpoint, got '" + spec + "'");
    trained[spec.substr(0, eq)] = load_checkpoint_file(spec.substr(eq + 1));
  }
  ExperimentData fitted = data;
  for (const auto& [name, p] : trained) fitted.test = fit_to(data.test, p);
  emit_sweep(cfg, perturbation_sweep(cfg, fitted, trained));
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Sparse factorization machines with Mixup and saliency-guided Mixup augmentation"};
  app.require_subcommand(1);

  std::vector<std::unique_ptr<ConfigOptions>> holders;
  auto with_config = [&](CLI::App* sub) {
    holders.push_back(std::make_unique<ConfigOptions>());
    holders.back()->attach(sub);
    return holders.back().get();
  };

  std::function<int()> action;

  // encode
  auto* enc = app.add_subcommand("encode", "encode delimited records into sparse text");
  std::string enc_input, enc_schema, enc_delim = ",", enc_item, enc_user, enc_split, enc_out = ".";
  bool enc_fit = false, enc_oov = false;
  std::size_t enc_neg = 0;
  std::uint64_t enc_seed = 42;
  enc->add_option("--input", enc_input, "delimited records with a header row")->required();
  enc->add_option("--schema", enc_schema, "column schema file")->required();
  enc->add_option("--delimiter", enc_delim, "field delimiter");
  enc->add_flag("--fit", enc_fit, "extend vocabularies with unseen values");
  enc->add_flag("--oov", enc_oov, "reserve an out-of-vocabulary index per categorical column");
  enc->add_option("--negatives", enc_neg, "negatives per positive (0 disables sampling)");
  enc->add_option("--item-col", enc_item, "item column for negative sampling");
  enc->add_option("--user-col", enc_user, "user column for negative sampling");
  enc->add_option("--split", enc_split, "train:valid:test ratios, e.g. 8:1:1");
  enc->add_option("--seed", enc_seed, "master seed");
  enc->add_option("--out", enc_out, "output directory");
  enc->callback([&] {
    action = [&] {
      return cmd_encode(enc_input, enc_schema, enc_delim, enc_fit, enc_oov, enc_neg, enc_item, enc_user, enc_split,
                        enc_seed, enc_out);
    };
  });

  // synth
  auto* syn = app.add_subcommand("synth", "generate synthetic data with planted blocked feature pairs");
  auto* syn_cfg = with_config(syn);
  syn->callback([&] { action = [&] { return cmd_synth(syn_cfg->build()); }; });

  // train
  auto* tr = app.add_subcommand("train", "train one model and write per-epoch curves and a checkpoint");
  auto* tr_cfg = with_config(tr);
  tr->callback([&] { action = [&] { return cmd_train(tr_cfg->build()); }; });

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "AUC and LogLoss of a checkpoint on a dataset");
  std::string ev_ckpt, ev_data, ev_out;
  bool ev_clamp = false;
  ev->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
  ev->add_option("--data", ev_data, "sparse dataset")->required();
  ev->add_flag("--clamp", ev_clamp, "clamp feature values outside [-1, 1]");
  ev->add_option("--output", ev_out, "also write the JSON report here");
  ev->callback([&] { action = [&] { return cmd_evaluate(ev_ckpt, ev_data, ev_clamp, ev_out); }; });

  // augment
  auto* au = app.add_subcommand("augment", "dump one epoch of augmented examples");
  auto* au_cfg = with_config(au);
  au->callback([&] { action = [&] { return cmd_augment(au_cfg->build()); }; });

  // bound
  auto* bo = app.add_subcommand("bound", "generalization-bound report for a checkpoint");
  auto* bo_cfg = with_config(bo);
  std::string bo_data;
  bo->add_option("--data", bo_data, "dataset supplying n and tau (default: the 'train' key)");
  bo->callback([&] { action = [&] { return cmd_bound(bo_cfg->build(), bo_data); }; });

  // sweeps
  auto* sr = app.add_subcommand("sweep-ratio", "test AUC versus the number of augmented samples");
  auto* sr_cfg = with_config(sr);
  sr->callback([&] { action = [&] { return cmd_sweep_ratio(sr_cfg->build()); }; });

  auto* sn = app.add_subcommand("sweep-neighbors", "test AUC versus the number of saliency candidates");
  auto* sn_cfg = with_config(sn);
  sn->callback([&] { action = [&] { return cmd_sweep_neighbors(sn_cfg->build()); }; });

  auto* se = app.add_subcommand("sweep-embedding", "test AUC versus embedding size per method");
  auto* se_cfg = with_config(se);
  se->callback([&] { action = [&] { return cmd_sweep_embedding(se_cfg->build()); }; });

  auto* pe = app.add_subcommand("perturb", "AUC reduction under input noise");
  auto* pe_cfg = with_config(pe);
  std::vector<std::string> pe_models;
  pe->add_option("--model", pe_models, "name=checkpoint, repeatable (default: train every configured method)");
  pe->callback([&] { action = [&] { return cmd_perturb(pe_cfg->build(), pe_models); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(Error::Category::validation);
  }

  try {
    return action ? action() : 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return static_cast<int>(Error::Category::numerical);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(Error::Category::validation);
  }
}

}  // namespace smfm
