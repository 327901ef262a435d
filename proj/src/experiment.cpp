#include "smfm/experiment.hpp"

#include "smfm/error.hpp"
#include "smfm/metrics.hpp"
#include "smfm/theory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace smfm {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const std::string t = trim(v);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(out))
    throw ValidationError("config key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const std::string t = trim(v);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ValidationError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ValidationError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

template <class T, class F>
std::vector<T> map_list(const std::string& v, F f) {
  std::vector<T> out;
  for (const auto& s : to_list(v)) out.push_back(f(s));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"train", [](auto& c, auto&, auto& v) { c.train_path = trim(v); }},
      {"valid", [](auto& c, auto&, auto& v) { c.valid_path = trim(v); }},
      {"test", [](auto& c, auto&, auto& v) { c.test_path = trim(v); }},
      {"out", [](auto& c, auto&, auto& v) { c.out_dir = trim(v); }},
      {"checkpoint", [](auto& c, auto&, auto& v) { c.checkpoint = trim(v); }},
      {"epochs", [](auto& c, auto& k, auto& v) { c.train.epochs = to_uint(k, v); }},
      {"batch", [](auto& c, auto& k, auto& v) { c.train.batch_size = to_uint(k, v); }},
      {"lr", [](auto& c, auto& k, auto& v) { c.train.lr = to_double(k, v); }},
      {"d", [](auto& c, auto& k, auto& v) { c.train.d = to_uint(k, v); }},
      {"l2", [](auto& c, auto& k, auto& v) { c.train.l2 = to_double(k, v); }},
      {"init_std", [](auto& c, auto& k, auto& v) { c.train.init_std = to_double(k, v); }},
      {"alpha", [](auto& c, auto& k, auto& v) { c.mix.alpha = to_double(k, v); }},
      {"beta", [](auto& c, auto& k, auto& v) { c.mix.beta = to_double(k, v); }},
      {"mix_ratio", [](auto& c, auto& k, auto& v) { c.mix_ratio = to_double(k, v); }},
      {"n_prime", [](auto& c, auto& k, auto& v) { c.n_prime = to_uint(k, v); }},
      {"p", [](auto& c, auto& k, auto& v) { c.mix.p = to_uint(k, v); }},
      {"mode", [](auto& c, auto&, auto& v) { c.mix.mode = parse_augment_mode(trim(v)); }},
      {"abs_saliency", [](auto& c, auto& k, auto& v) { c.mix.abs_saliency = to_bool(k, v); }},
      {"repeats", [](auto& c, auto& k, auto& v) { c.repeats = to_uint(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_uint(k, v); }},
      {"delta", [](auto& c, auto& k, auto& v) { c.delta = to_double(k, v); }},
      {"select",
       [](auto& c, auto& k, auto& v) {
         const auto t = trim(v);
         if (t == "best-valid") c.selection = Selection::best_valid;
         else if (t == "final") c.selection = Selection::final_epoch;
         else throw ValidationError("config key '" + k + "': expected best-valid or final");
       }},
      {"clamp", [](auto& c, auto& k, auto& v) { c.clamp = to_bool(k, v); }},
      {"ratio_grid", [](auto& c, auto& k, auto& v) {
         c.ratio_grid = map_list<double>(v, [&](const std::string& s) { return to_double(k, s); });
       }},
      {"p_grid", [](auto& c, auto& k, auto& v) {
         c.p_grid = map_list<std::size_t>(v, [&](const std::string& s) { return to_uint(k, s); });
       }},
      {"d_grid", [](auto& c, auto& k, auto& v) {
         c.d_grid = map_list<std::size_t>(v, [&](const std::string& s) { return to_uint(k, s); });
       }},
      {"noise_grid", [](auto& c, auto& k, auto& v) {
         c.noise_grid = map_list<double>(v, [&](const std::string& s) { return to_double(k, s); });
       }},
      {"methods", [](auto& c, auto&, auto& v) {
         c.methods = to_list(v);
         for (const auto& m : c.methods) parse_augment_mode(m);
       }},
      {"synth_m", [](auto& c, auto& k, auto& v) { c.synth.m = to_uint(k, v); }},
      {"synth_n", [](auto& c, auto& k, auto& v) { c.synth.n = to_uint(k, v); }},
      {"synth_tau", [](auto& c, auto& k, auto& v) { c.synth.tau = to_uint(k, v); }},
      {"synth_d", [](auto& c, auto& k, auto& v) { c.synth.d_true = to_uint(k, v); }},
      {"synth_truth_std", [](auto& c, auto& k, auto& v) { c.synth.truth_std = to_double(k, v); }},
      {"synth_linear_std", [](auto& c, auto& k, auto& v) { c.synth.linear_std = to_double(k, v); }},
      {"synth_bias", [](auto& c, auto& k, auto& v) { c.synth.bias = to_double(k, v); }},
      {"synth_zipf", [](auto& c, auto& k, auto& v) { c.synth.zipf_s = to_double(k, v); }},
      {"synth_planted_weight", [](auto& c, auto& k, auto& v) { c.synth.planted_weight = to_double(k, v); }},
      {"synth_planted_fraction", [](auto& c, auto& k, auto& v) { c.synth.planted_fraction = to_double(k, v); }},
      {"synth_auto_blocked", [](auto& c, auto& k, auto& v) { c.synth.auto_blocked = to_uint(k, v); }},
      {"synth_seed", [](auto& c, auto& k, auto& v) { c.synth.seed = to_uint(k, v); }},
      {"synth_blocked", [](auto& c, auto& k, auto& v) {
         c.synth.blocked.clear();
         for (const auto& item : to_list(v)) {
           const auto colon = item.find(':');
           if (colon == std::string::npos) throw ValidationError("config key '" + k + "': expected i:j pairs");
           c.synth.blocked.emplace_back(static_cast<FeatureIndex>(to_uint(k, item.substr(0, colon))),
                                        static_cast<FeatureIndex>(to_uint(k, item.substr(colon + 1))));
         }
       }},
  };
  return table;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  for (const auto& [name, fn] : setters()) {
    if (name == key) {
      fn(*this, key, value);
      return;
    }
  }
  throw ValidationError("unknown config key '" + key + "'");
}

void ExperimentConfig::apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) set(k, v);
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> out = [] {
    std::vector<std::string> k;
    for (const auto& [name, fn] : setters()) k.push_back(name);
    return k;
  }();
  return out;
}

void ExperimentConfig::validate() const {
  train.validate();
  mix.validate();
  if (repeats < 1) throw ValidationError("repeats must be >= 1");
  if (!(mix_ratio >= 0.0)) throw ValidationError("mix_ratio must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
}

std::size_t ExperimentConfig::resolve_n_prime(std::size_t n) const {
  if (n_prime) return *n_prime;
  return static_cast<std::size_t>(std::llround(mix_ratio * static_cast<double>(n)));
}

MixConfig ExperimentConfig::mix_for(AugmentMode mode, std::size_t n) const {
  MixConfig m = mix;
  m.mode = mode;
  m.n_prime = resolve_n_prime(n);
  return m;
}

std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no, 1);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no, 1);
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  return parse_config(in);
}

ExperimentData load_experiment_data(const ExperimentConfig& cfg) {
  if (cfg.train_path.empty()) throw ValidationError("no training file configured (key 'train')");
  ParseOptions opts;
  opts.clamp = cfg.clamp;
  ExperimentData d;
  d.train = read_sparse_file(cfg.train_path, std::nullopt, opts);
  if (!cfg.valid_path.empty()) d.valid = read_sparse_file(cfg.valid_path, std::nullopt, opts);
  if (!cfg.test_path.empty()) d.test = read_sparse_file(cfg.test_path, std::nullopt, opts);
  const std::size_t m = std::max({d.train.dim(), d.valid.dim(), d.test.dim()});
  if (d.train.dim() != m) d.train = d.train.with_dim(m);
  if (!d.valid.empty() && d.valid.dim() != m) d.valid = d.valid.with_dim(m);
  if (!d.test.empty() && d.test.dim() != m) d.test = d.test.with_dim(m);
  if (d.valid.empty()) d.valid = Dataset(m);
  if (d.test.empty()) d.test = Dataset(m);
  return d;
}

SeedStreams repeat_streams(std::uint64_t seed, std::size_t r) {
  return SeedStreams::from_master(derive_seed(seed, "repeat", r));
}

RunOutcome run_once(const ExperimentData& data, const TrainConfig& train, const MixConfig& mix,
                    const SeedStreams& seeds, Selection selection) {
  EvalSets eval;
  eval.valid = data.has_valid() ? &data.valid : nullptr;
  eval.test = data.has_test() ? &data.test : nullptr;
  eval.evaluate_train = false;

  RunOutcome out;
  out.result = train_augmented(data.train, train, mix, seeds, eval);
  const auto& hist = out.result.history;
  if (selection == Selection::best_valid && out.result.best_valid_params) {
    out.selected = *out.result.best_valid_params;
    out.selected_epoch = out.result.best_valid_epoch;
  } else {
    out.selected = out.result.params;
    out.selected_epoch = hist.size();
  }
  if (data.has_test()) {
    const auto& rec = hist[out.selected_epoch - 1];
    out.test_auc = rec.test->auc;
    out.test_logloss = rec.test->logloss;
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

namespace {

void require_test(const ExperimentData& data) {
  if (!data.has_test()) throw ValidationError("sweeps need a test set (key 'test')");
}

std::vector<double> run_repeats(const ExperimentConfig& cfg, const ExperimentData& data, const TrainConfig& train,
                                const MixConfig& mix, std::vector<double>* gammas = nullptr) {
  std::vector<double> aucs;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const auto run = run_once(data, train, mix, repeat_streams(cfg.seed, r), cfg.selection);
    aucs.push_back(run.test_auc);
    if (gammas) gammas->push_back(gamma_of(run.selected));
  }
  return aucs;
}

std::vector<double> paired_delta(const std::vector<double>& a, const std::vector<double>& base) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - base[i];
  return d;
}

}  // namespace

std::vector<SweepRow> sweep_ratio(const ExperimentConfig& cfg, const ExperimentData& data) {
  require_test(data);
  if (cfg.ratio_grid.empty()) throw ValidationError("ratio_grid is empty");
  std::vector<double> grid = cfg.ratio_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (double r : grid)
    if (!(r >= 0.0)) throw ValidationError("ratio_grid entries must be >= 0");

  AugmentMode mode = cfg.mix.mode == AugmentMode::none ? AugmentMode::mix : cfg.mix.mode;
  const std::size_t n = data.train.size();
  auto mix_at = [&](double ratio) {
    MixConfig m = cfg.mix;
    m.mode = mode;
    m.n_prime = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    return m;
  };
  const auto baseline = run_repeats(cfg, data, cfg.train, mix_at(0.0));

  std::vector<SweepRow> rows;
  for (double ratio : grid) {
    const auto aucs = ratio == 0.0 ? baseline : run_repeats(cfg, data, cfg.train, mix_at(ratio));
    rows.push_back({ratio, std::string(to_string(mode)), mean_of(aucs), sd_of(aucs),
                    mean_of(paired_delta(aucs, baseline))});
  }
  return rows;
}

std::vector<SweepRow> sweep_neighbors(const ExperimentConfig& cfg, const ExperimentData& data) {
  require_test(data);
  if (cfg.p_grid.empty()) throw ValidationError("p_grid is empty");
  std::vector<std::size_t> grid = cfg.p_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.front() < 1) throw ValidationError("p_grid entries must be >= 1");

  auto mix_at = [&](std::size_t p) {
    MixConfig m = cfg.mix_for(AugmentMode::saliency, data.train.size());
    m.p = p;
    return m;
  };
  const auto baseline = run_repeats(cfg, data, cfg.train, mix_at(1));

  std::vector<SweepRow> rows;
  for (std::size_t p : grid) {
    const auto aucs = p == 1 ? baseline : run_repeats(cfg, data, cfg.train, mix_at(p));
    rows.push_back({static_cast<double>(p), "saliency", mean_of(aucs), sd_of(aucs),
                    mean_of(paired_delta(aucs, baseline))});
  }
  return rows;
}

EmbeddingSweep sweep_embedding(const ExperimentConfig& cfg, const ExperimentData& data) {
  require_test(data);
  if (cfg.d_grid.empty()) throw ValidationError("d_grid is empty");
  if (cfg.methods.empty()) throw ValidationError("methods list is empty");
  std::vector<std::size_t> grid = cfg.d_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  EmbeddingSweep out;
  for (std::size_t d : grid) {
    if (d < 1) throw ValidationError("d_grid entries must be >= 1");
    TrainConfig train = cfg.train;
    train.d = d;
    std::vector<double> fm_aucs;
    std::vector<std::pair<std::string, std::vector<double>>> per_method;
    for (const auto& name : cfg.methods) {
      const AugmentMode mode = parse_augment_mode(name);
      std::vector<double> gammas;
      auto aucs = run_repeats(cfg, data, train, cfg.mix_for(mode, data.train.size()), &gammas);
      if (mode == AugmentMode::none) fm_aucs = aucs;
      per_method.emplace_back(name, aucs);
      out.mean_gamma.push_back(mean_of(gammas));
    }
    for (const auto& [name, aucs] : per_method) {
      const double delta = fm_aucs.empty() ? 0.0 : mean_of(paired_delta(aucs, fm_aucs));
      out.rows.push_back({static_cast<double>(d), name, mean_of(aucs), sd_of(aucs), delta});
    }
  }
  return out;
}

Dataset perturb_dataset(const Dataset& data, double eps, Rng& rng) {
  if (!(eps >= 0.0)) throw ValidationError("noise level must be >= 0");
  if (eps == 0.0) return data;
  std::uniform_real_distribution<double> noise(-eps, eps);
  std::vector<LabeledExample> out;
  out.reserve(data.size());
  for (const auto& ex : data) {
    std::vector<SparseEntry> entries;
    for (const auto& e : ex.x.entries()) {
      const double v = std::clamp(e.value + noise(rng), 0.0, 1.0);
      if (v != 0.0) entries.push_back({e.index, v});
    }
    LabeledExample p = ex;
    p.x = SparseVector::from_sorted_unchecked(std::move(entries), data.dim());
    out.push_back(std::move(p));
  }
  return Dataset(std::move(out), data.dim());
}

std::vector<SweepRow> perturbation_sweep(const ExperimentConfig& cfg, const ExperimentData& data,
                                         const std::map<std::string, FmParams>& trained) {
  require_test(data);
  if (cfg.noise_grid.empty()) throw ValidationError("noise_grid is empty");
  std::vector<double> grid = cfg.noise_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<std::string> methods;
  if (!trained.empty()) {
    for (const auto& [name, p] : trained) methods.push_back(name);
  } else {
    methods = cfg.methods;
  }
  if (methods.empty()) throw ValidationError("methods list is empty");

  const auto labels = data.test.labels();
  // reductions[method][level] -> per-repeat values
  std::vector<std::vector<std::vector<double>>> noisy(methods.size(), std::vector<std::vector<double>>(grid.size()));
  std::vector<std::vector<std::vector<double>>> drop(methods.size(), std::vector<std::vector<double>>(grid.size()));

  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    // noise is shared across methods so the comparison is paired
    std::vector<Dataset> noisy_sets;
    for (std::size_t l = 0; l < grid.size(); ++l) {
      Rng rng(derive_seed(cfg.seed, "noise", r * grid.size() + l));
      noisy_sets.push_back(perturb_dataset(data.test, grid[l], rng));
    }
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      FmParams params;
      if (!trained.empty()) {
        params = trained.at(methods[mi]);
      } else {
        const AugmentMode mode = parse_augment_mode(methods[mi]);
        params = run_once(data, cfg.train, cfg.mix_for(mode, data.train.size()), repeat_streams(cfg.seed, r),
                          cfg.selection)
                     .selected;
      }
      const double clean = auc(predict_all(params, data.test), labels);
      for (std::size_t l = 0; l < grid.size(); ++l) {
        const double a = grid[l] == 0.0 ? clean : auc(predict_all(params, noisy_sets[l]), labels);
        noisy[mi][l].push_back(a);
        drop[mi][l].push_back(clean - a);
      }
    }
  }

  std::vector<SweepRow> rows;
  for (std::size_t l = 0; l < grid.size(); ++l)
    for (std::size_t mi = 0; mi < methods.size(); ++mi)
      rows.push_back({grid[l], methods[mi], mean_of(noisy[mi][l]), sd_of(noisy[mi][l]), mean_of(drop[mi][l])});
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "x,method,mean_auc,sd_auc,delta\n";
  for (const auto& r : rows)
    out << format_double(r.x) << ',' << r.method << ',' << format_double(r.mean_auc) << ','
        << format_double(r.sd_auc) << ',' << format_double(r.delta) << '\n';
}

void write_curves_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch,split,auc,logloss,seconds\n";
  auto row = [&](std::size_t epoch, const char* split, const EvalReport& r, double seconds) {
    out << epoch << ',' << split << ',' << format_double(r.auc) << ',' << format_double(r.logloss) << ','
        << format_double(seconds) << '\n';
  };
  for (const auto& rec : history) {
    row(rec.epoch, "train", rec.train, rec.seconds);
    if (rec.valid) row(rec.epoch, "valid", *rec.valid, rec.seconds);
    if (rec.test) row(rec.epoch, "test", *rec.test, rec.seconds);
  }
}

}  // namespace smfm
