#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgeal/dataset.hpp"
#include "edgeal/learner.hpp"
#include "edgeal/metrics.hpp"

namespace edgeal {

struct ExperimentConfig {
  std::filesystem::path dataset;
  std::filesystem::path out = "edgeal_out";
  std::vector<Strategy> strategies = {Strategy::edgeal};
  double seed_fraction = 0.02;
  double budget = 0.10;  // per-round increment of the labeled fraction
  std::size_t rounds = 4;
  std::size_t mc_passes = 8;
  std::size_t superpixels = 64;
  std::size_t superpixel_iterations = 10;
  std::uint64_t superpixel_seed = 0;
  std::vector<std::uint64_t> seeds = {1};
  LearnerConfig learner;
  std::string provider = "builtin";  // or "precomputed"
  std::filesystem::path passes_dir;
  bool full_reference = true;
  bool resume = false;

  // Keys match the CLI flags with '-' and '_' interchangeable.
  void set(std::string_view key, std::string_view value);
  void validate() const;
};

// Plain-text "key = value" lines; '#' starts a comment.
void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path);
std::vector<std::string> config_keys();

struct CurveRow {
  std::string strategy;
  std::uint64_t seed = 0;
  std::size_t round = 0;
  double labeled_fraction = 0.0;
  double mean_dice = 0.0;
  std::vector<double> per_class_dice;
};

inline constexpr std::string_view kFullReference = "full";

std::string curve_header();
std::string curve_line(const CurveRow& row);
std::vector<CurveRow> read_curves(const std::filesystem::path& path);

struct SyntheticSpec {
  std::size_t images = 40;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t classes = 3;
  double noise = 0.08;
  std::uint64_t seed = 1;
};

// Horizontal bands separated by clamped random-walk boundaries, intensities
// equally spaced in [0,1], contrast halved on the right third, additive
// Gaussian noise. Splits 60/20/20 train/test/val.
DatasetIndex generate_synthetic(const std::filesystem::path& root, const SyntheticSpec& spec);

// Row m of column n belongs to band = number of boundaries at or above m.
// Exposed for tests that need the noise-free structure.
struct SyntheticImage {
  Image image;
  ClassMap labels;
  std::vector<std::size_t> seam_columns;  // where the low-contrast region starts
};
SyntheticImage synthesize_image(const SyntheticSpec& spec, std::size_t index);

using LogFn = std::function<void(std::string_view)>;

// Mean dice of the dropout-free prediction over a set of samples.
struct Evaluation {
  double mean_dice = 0.0;
  std::vector<double> per_class;
};
Evaluation evaluate(const LinearSoftmaxModel& model, std::span<const PixelFeatures> features,
                    std::span<const Sample> samples);

// The active-learning loop for every (strategy, seed) cell. Rows are appended
// to <out>/curves.csv as they are produced; with `resume`, completed rounds are
// read back and the loop restarts from the last persisted mask snapshot.
std::vector<CurveRow> run_experiment(const ExperimentConfig& config, const LogFn& log = {});

struct SummaryRow {
  std::string strategy;
  std::size_t round = 0;
  double labeled_fraction = 0.0;  // mean across seeds
  double mean_dice = 0.0;
  double sd_dice = 0.0;  // population sd
  std::size_t seeds = 0;
};

std::vector<SummaryRow> summarize(std::span<const CurveRow> rows);
std::string format_summary_table(std::span<const SummaryRow> rows);
void write_summary_csv(const std::filesystem::path& path, std::span<const SummaryRow> rows);

}  // namespace edgeal
