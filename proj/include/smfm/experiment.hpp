#pragma once

#include "smfm/augment.hpp"
#include "smfm/fm.hpp"
#include "smfm/synth.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace smfm {

enum class Selection { best_valid, final_epoch };

/// Everything an experiment command needs. Built from a flat
/// `key = value` config file with command-line overrides on top.
struct ExperimentConfig {
  std::string train_path, valid_path, test_path;
  std::string out_dir = ".";
  std::string checkpoint;

  TrainConfig train;
  MixConfig mix;
  double mix_ratio = 1.0;                // n' = round(mix_ratio * n) unless n_prime is set
  std::optional<std::size_t> n_prime;

  std::size_t repeats = 10;
  std::uint64_t seed = 42;
  double delta = 0.05;
  Selection selection = Selection::best_valid;
  bool clamp = false;

  std::vector<double> ratio_grid{0.0, 0.25, 0.5, 1.0, 2.0};
  std::vector<std::size_t> p_grid{1, 2, 4, 6, 8, 10};
  std::vector<std::size_t> d_grid{2, 4, 8, 16, 32, 64};
  std::vector<double> noise_grid{0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<std::string> methods{"fm", "copyfm", "mixfm", "smfm"};

  SynthSpec synth;

  /// Applies one `key = value` setting; throws ValidationError for unknown
  /// keys or malformed values.
  void set(const std::string& key, const std::string& value);
  void apply(const std::map<std::string, std::string>& kv);
  void validate() const;

  std::size_t resolve_n_prime(std::size_t n) const;
  MixConfig mix_for(AugmentMode mode, std::size_t n) const;

  /// Every recognized key, for help text and CLI flag registration.
  static const std::vector<std::string>& keys();
};

/// Parses `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> parse_config(std::istream& in);
std::map<std::string, std::string> parse_config_file(const std::string& path);

struct ExperimentData {
  Dataset train, valid, test;
  bool has_valid() const { return !valid.empty(); }
  bool has_test() const { return !test.empty(); }
};

/// Loads the configured files and widens all splits to a common dimension.
ExperimentData load_experiment_data(const ExperimentConfig& cfg);

/// Outcome of one training run with the configured model selection.
struct RunOutcome {
  TrainResult result;
  FmParams selected;           // best-valid snapshot or final params
  std::size_t selected_epoch = 0;
  double test_auc = 0.0;
  double test_logloss = 0.0;
};

/// Seed streams of repeat `r` under master seed `seed`.
SeedStreams repeat_streams(std::uint64_t seed, std::size_t r);

RunOutcome run_once(const ExperimentData& data, const TrainConfig& train, const MixConfig& mix,
                    const SeedStreams& seeds, Selection selection);

struct SweepRow {
  double x = 0.0;
  std::string method;
  double mean_auc = 0.0;
  double sd_auc = 0.0;
  double delta = 0.0;
};

std::vector<SweepRow> sweep_ratio(const ExperimentConfig& cfg, const ExperimentData& data);
std::vector<SweepRow> sweep_neighbors(const ExperimentConfig& cfg, const ExperimentData& data);

struct EmbeddingSweep {
  std::vector<SweepRow> rows;
  std::vector<double> mean_gamma;  // aligned with rows
};
EmbeddingSweep sweep_embedding(const ExperimentConfig& cfg, const ExperimentData& data);

/// Uniform noise on [-eps, eps] added to every nonzero coordinate, clamped
/// to [0, 1]; coordinates that land on zero are dropped.
Dataset perturb_dataset(const Dataset& data, double eps, Rng& rng);

/// AUC reduction on noisy test inputs, per noise level and method. Models
/// come from `trained` when given (one per method), otherwise each method
/// is trained for every repeat.
std::vector<SweepRow> perturbation_sweep(const ExperimentConfig& cfg, const ExperimentData& data,
                                         const std::map<std::string, FmParams>& trained = {});

/// `x,method,mean_auc,sd_auc,delta`
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// `epoch,split,auc,logloss,seconds`
void write_curves_csv(std::ostream& out, const std::vector<EpochRecord>& history);

double mean_of(const std::vector<double>& v);
/// Sample standard deviation (n - 1); zero for fewer than two values.
double sd_of(const std::vector<double>& v);

}  // namespace smfm
