#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "edgeal/dataset.hpp"
#include "edgeal/maps.hpp"

namespace edgeal {

// Per-pixel inputs of the built-in classifier: intensity, Sobel magnitude,
// Gaussian smoothing at sigma 1 and 2, row/H, col/W. A bias input is appended
// by the model, not stored here.
inline constexpr std::size_t kFeatureCount = 6;
inline constexpr std::size_t kInputCount = kFeatureCount + 1;

struct PixelFeatures {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;  // pixel-major: values[pixel * kFeatureCount + f]

  std::size_t pixels() const noexcept { return height * width; }
  const double* pixel(std::size_t i) const noexcept { return values.data() + i * kFeatureCount; }
};

struct FeatureStats {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> stddev{};
};

PixelFeatures raw_features(const Image& img);
FeatureStats feature_stats(std::span<const PixelFeatures> raw);
// Zero-mean/unit-variance under `stats`; features with zero spread only get centered.
PixelFeatures standardize(PixelFeatures raw, const FeatureStats& stats);
PixelFeatures extract_features(const Image& img, const FeatureStats& stats);

struct LearnerConfig {
  double learning_rate = 0.005;
  double weight_decay = 0.0004;
  std::size_t epochs = 100;
  std::size_t batch_size = 10;
  double dropout = 0.5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double init_scale = 0.01;
  double ce_weight = 0.5;  // dice weight is 1 - ce_weight
};

// Row-major C×7 weights; column 6 is the bias.
class LinearSoftmaxModel {
 public:
  LinearSoftmaxModel() = default;
  LinearSoftmaxModel(std::size_t classes, double dropout);

  std::size_t classes() const noexcept { return classes_; }
  double dropout() const noexcept { return dropout_; }
  std::span<double> weights() noexcept { return weights_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double weight(std::size_t c, std::size_t f) const noexcept { return weights_[c * kInputCount + f]; }

  Tensor to_tensor() const;
  static LinearSoftmaxModel from_tensor(const Tensor& t, double dropout);

 private:
  std::size_t classes_ = 0;
  double dropout_ = 0.5;
  std::vector<double> weights_;
};

// Labeled pixels of one image, as used by the loss.
struct LabeledPixels {
  std::size_t image_id = 0;
  const PixelFeatures* features = nullptr;
  std::vector<std::uint32_t> pixels;
  std::vector<std::uint8_t> labels;
};

LabeledPixels labeled_pixels(std::size_t image_id, const PixelFeatures& features, const ClassMap& annotation);

// Dropout key for one training step; absent means dropout off.
struct DropoutKey {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  double rate = 0.0;
};

struct LossBreakdown {
  double cross_entropy = 0.0;
  double dice_loss = 0.0;  // 1 - mean soft dice over classes present in the labels
  double total = 0.0;
  std::vector<double> grad_cross_entropy;  // C×7
  std::vector<double> grad_dice;           // C×7
  std::vector<double> grad_total;          // C×7
};

// Mixed loss ce_weight·CE + (1-ce_weight)·(1 - soft dice) over the labeled
// pixels of a batch, with analytic gradients. Soft dice per class is
// (2Σp·y + 1)/(Σp + Σy + 1).
LossBreakdown mixed_loss(std::span<const double> weights, std::size_t classes, std::span<const LabeledPixels> batch,
                         double ce_weight, const DropoutKey* dropout = nullptr);

struct TrainingReport {
  LinearSoftmaxModel model;
  std::vector<double> epoch_loss;  // full-batch, dropout off; filled when tracking is on
};

// Fresh initialization from `seed`, then Adam over batches of at most
// batch_size images per step. Images are visited in a seed-keyed order that
// does not depend on the order they are passed in.
TrainingReport train(std::span<const LabeledPixels> data, std::size_t classes, const LearnerConfig& config,
                     std::uint64_t seed, bool track_loss = false);

// Dropout-free class distribution per pixel.
ProbabilityMap predict(const LinearSoftmaxModel& model, const PixelFeatures& features);

// One stochastic pass with dropout active; mask keyed by (seed, image_id, pass_index).
ProbabilityMap predict_pass(const LinearSoftmaxModel& model, const PixelFeatures& features, std::size_t image_id,
                            std::size_t pass_index, std::uint64_t seed);

ClassMap argmax(const ProbabilityMap& p);

// Source of the D stochastic passes consumed by the uncertainty maps, indexed
// by pool image.
class PredictionProvider {
 public:
  virtual ~PredictionProvider() = default;
  virtual std::size_t classes() const = 0;
  virtual ProbabilityMap predict_pass(std::size_t image_id, std::size_t pass_index) const = 0;
  // Best single estimate, used by the softmax baselines.
  virtual ProbabilityMap predict_deterministic(std::size_t image_id) const = 0;
};

class BuiltinProvider final : public PredictionProvider {
 public:
  BuiltinProvider(const LinearSoftmaxModel& model, std::span<const PixelFeatures> features, std::uint64_t seed)
      : model_(model), features_(features), seed_(seed) {}

  std::size_t classes() const override { return model_.classes(); }
  ProbabilityMap predict_pass(std::size_t image_id, std::size_t pass_index) const override;
  // Dropout off.
  ProbabilityMap predict_deterministic(std::size_t image_id) const override;

 private:
  const LinearSoftmaxModel& model_;
  std::span<const PixelFeatures> features_;
  std::uint64_t seed_;
};

// Reads "<name>_pass<k>.ealt" files produced by an external model.
std::filesystem::path pass_path(const std::filesystem::path& dir, const std::string& name, std::size_t pass_index);
ProbabilityMap read_precomputed_pass(const std::filesystem::path& dir, const std::string& name, std::size_t pass_index);

class PrecomputedProvider final : public PredictionProvider {
 public:
  PrecomputedProvider(std::filesystem::path dir, std::vector<std::string> names, std::size_t classes,
                      std::size_t passes)
      : dir_(std::move(dir)), names_(std::move(names)), classes_(classes), passes_(passes) {}

  std::size_t classes() const override { return classes_; }
  ProbabilityMap predict_pass(std::size_t image_id, std::size_t pass_index) const override;
  // Mean of the stored passes; an external model exposes nothing better.
  ProbabilityMap predict_deterministic(std::size_t image_id) const override;

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
  std::size_t classes_;
  std::size_t passes_;
};

}  // namespace edgeal
