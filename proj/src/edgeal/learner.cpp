#include "edgeal/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "edgeal/edges.hpp"
#include "edgeal/error.hpp"
#include "edgeal/rng.hpp"
#include "edgeal/uncertainty.hpp"

namespace edgeal {

namespace {

constexpr double kProbabilityFloor = 1e-300;
constexpr double kPassTolerance = 1e-4;

// Per-(key, pixel) stream of dropout decisions, one per feature.
class DropoutStream {
 public:
  DropoutStream(std::uint64_t seed, std::uint64_t a, std::uint64_t b, double rate)
      : base_(hash_keys({seed, a, b})), rate_(rate), scale_(rate < 1.0 ? 1.0 / (1.0 - rate) : 0.0) {}

  // Fills `out` with the dropped-and-rescaled features of one pixel.
  void apply(std::size_t pixel, const double* in, double* out) const noexcept {
    const std::uint64_t ph = splitmix64(base_ ^ (static_cast<std::uint64_t>(pixel) * 0xD1B54A32D192ED03ull));
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const bool keep = to_unit(splitmix64(ph + f)) >= rate_;
      out[f] = keep ? in[f] * scale_ : 0.0;
    }
  }

 private:
  std::uint64_t base_;
  double rate_;
  double scale_;
};

void softmax_row(std::span<const double> w, std::size_t classes, const double* x, double* p) {
  double zmax = -INFINITY;
  for (std::size_t c = 0; c < classes; ++c) {
    const double* row = w.data() + c * kInputCount;
    double z = row[kFeatureCount];
    for (std::size_t f = 0; f < kFeatureCount; ++f) z += row[f] * x[f];
    p[c] = z;
    zmax = std::max(zmax, z);
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    p[c] = std::exp(p[c] - zmax);
    sum += p[c];
  }
  for (std::size_t c = 0; c < classes; ++c) p[c] /= sum;
}

}  // namespace

PixelFeatures raw_features(const Image& img) {
  const Grid<double> sobel = sobel_magnitude(img);
  const Image smooth1 = gaussian_blur(img, 1.0);
  const Image smooth2 = gaussian_blur(img, 2.0);
  PixelFeatures out;
  out.height = img.height();
  out.width = img.width();
  out.values.resize(img.size() * kFeatureCount);
  const double h = static_cast<double>(img.height());
  const double w = static_cast<double>(img.width());
  for (std::size_t m = 0; m < img.height(); ++m) {
    for (std::size_t n = 0; n < img.width(); ++n) {
      const std::size_t i = m * img.width() + n;
      double* f = out.values.data() + i * kFeatureCount;
      f[0] = img[i];
      f[1] = sobel[i];
      f[2] = smooth1[i];
      f[3] = smooth2[i];
      f[4] = static_cast<double>(m) / h;
      f[5] = static_cast<double>(n) / w;
    }
  }
  return out;
}

FeatureStats feature_stats(std::span<const PixelFeatures> raw) {
  FeatureStats stats;
  std::array<double, kFeatureCount> sum{};
  std::array<double, kFeatureCount> sumsq{};
  std::size_t count = 0;
  for (const auto& pf : raw) {
    for (std::size_t i = 0; i < pf.pixels(); ++i) {
      const double* f = pf.pixel(i);
      for (std::size_t k = 0; k < kFeatureCount; ++k) sum[k] += f[k];
    }
    count += pf.pixels();
  }
  if (count == 0) fail(ErrorCode::invalid_argument, "feature_stats: no pixels");
  for (std::size_t k = 0; k < kFeatureCount; ++k) stats.mean[k] = sum[k] / static_cast<double>(count);
  for (const auto& pf : raw) {
    for (std::size_t i = 0; i < pf.pixels(); ++i) {
      const double* f = pf.pixel(i);
      for (std::size_t k = 0; k < kFeatureCount; ++k) {
        const double d = f[k] - stats.mean[k];
        sumsq[k] += d * d;
      }
    }
  }
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    const double sd = std::sqrt(sumsq[k] / static_cast<double>(count));
    // rounding noise on a constant feature must not be blown up to unit scale
    stats.stddev[k] = sd > 1e-12 ? sd : 0.0;
  }
  return stats;
}

PixelFeatures standardize(PixelFeatures raw, const FeatureStats& stats) {
  for (std::size_t i = 0; i < raw.pixels(); ++i) {
    double* f = raw.values.data() + i * kFeatureCount;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      f[k] -= stats.mean[k];
      if (stats.stddev[k] > 0.0) f[k] /= stats.stddev[k];
    }
  }
  return raw;
}

PixelFeatures extract_features(const Image& img, const FeatureStats& stats) {
  return standardize(raw_features(img), stats);
}

LinearSoftmaxModel::LinearSoftmaxModel(std::size_t classes, double dropout)
    : classes_(classes), dropout_(dropout), weights_(classes * kInputCount, 0.0) {
  if (classes < 2) fail(ErrorCode::invalid_argument, "model needs at least 2 classes");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorCode::invalid_argument, "dropout rate must lie in [0, 1)");
}

Tensor LinearSoftmaxModel::to_tensor() const {
  std::vector<float> data(weights_.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(weights_[i]);
  return Tensor::from_f32({static_cast<std::uint32_t>(classes_), static_cast<std::uint32_t>(kInputCount)},
                          std::move(data));
}

LinearSoftmaxModel LinearSoftmaxModel::from_tensor(const Tensor& t, double dropout) {
  if (t.rank() != 2 || t.dtype() != DType::f32 || t.dim(1) != kInputCount) {
    fail(ErrorCode::format, "model checkpoint must be a C x 7 f32 tensor");
  }
  LinearSoftmaxModel model(t.dim(0), dropout);
  auto src = t.f32();
  for (std::size_t i = 0; i < src.size(); ++i) model.weights_[i] = src[i];
  return model;
}

LabeledPixels labeled_pixels(std::size_t image_id, const PixelFeatures& features, const ClassMap& annotation) {
  if (annotation.height() != features.height || annotation.width() != features.width) {
    fail(ErrorCode::dimension, "labeled_pixels: annotation dims differ from features");
  }
  LabeledPixels out;
  out.image_id = image_id;
  out.features = &features;
  for (std::size_t i = 0; i < annotation.size(); ++i) {
    if (annotation[i] == 255) continue;
    out.pixels.push_back(static_cast<std::uint32_t>(i));
    out.labels.push_back(annotation[i]);
  }
  return out;
}

LossBreakdown mixed_loss(std::span<const double> weights, std::size_t classes, std::span<const LabeledPixels> batch,
                         double ce_weight, const DropoutKey* dropout) {
  if (weights.size() != classes * kInputCount) fail(ErrorCode::dimension, "mixed_loss: weight shape mismatch");
  std::size_t n = 0;
  for (const auto& item : batch) n += item.pixels.size();
  if (n == 0) fail(ErrorCode::invalid_argument, "no labeled pixels");

  std::vector<double> inputs(n * kFeatureCount);
  std::vector<double> probs(n * classes);
  std::vector<std::uint8_t> targets(n);
  std::vector<double> inter(classes, 0.0), pred_sum(classes, 0.0), label_sum(classes, 0.0);

  LossBreakdown out;
  std::size_t row = 0;
  for (const auto& item : batch) {
    std::optional<DropoutStream> stream;
    if (dropout && dropout->rate > 0.0) stream.emplace(dropout->seed, dropout->step, item.image_id, dropout->rate);
    for (std::size_t k = 0; k < item.pixels.size(); ++k, ++row) {
      const std::uint32_t px = item.pixels[k];
      const std::uint8_t y = item.labels[k];
      if (y >= classes) fail(ErrorCode::range, "mixed_loss: label out of range");
      double* x = inputs.data() + row * kFeatureCount;
      if (stream) stream->apply(px, item.features->pixel(px), x);
      else std::copy_n(item.features->pixel(px), kFeatureCount, x);
      double* p = probs.data() + row * classes;
      softmax_row(weights, classes, x, p);
      targets[row] = y;
      out.cross_entropy -= std::log(std::max(p[y], kProbabilityFloor));
      for (std::size_t c = 0; c < classes; ++c) pred_sum[c] += p[c];
      inter[y] += p[y];
      label_sum[y] += 1.0;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.cross_entropy *= inv_n;

  std::vector<double> numer(classes), denom(classes);
  std::size_t present = 0;
  double dice_sum = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    numer[c] = 2.0 * inter[c] + 1.0;
    denom[c] = pred_sum[c] + label_sum[c] + 1.0;
    if (label_sum[c] > 0.0) {
      ++present;
      dice_sum += numer[c] / denom[c];
    }
  }
  out.dice_loss = 1.0 - dice_sum / static_cast<double>(present);
  out.total = ce_weight * out.cross_entropy + (1.0 - ce_weight) * out.dice_loss;

  out.grad_cross_entropy.assign(classes * kInputCount, 0.0);
  out.grad_dice.assign(classes * kInputCount, 0.0);
  std::vector<double> g(classes), dz_ce(classes), dz_dice(classes);
  const double inv_present = 1.0 / static_cast<double>(present);
  for (std::size_t r = 0; r < n; ++r) {
    const double* p = probs.data() + r * classes;
    const double* x = inputs.data() + r * kFeatureCount;
    const std::uint8_t y = targets[r];
    double s = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double yc = c == y ? 1.0 : 0.0;
      g[c] = label_sum[c] > 0.0
                 ? -inv_present * (2.0 * yc * denom[c] - numer[c]) / (denom[c] * denom[c])
                 : 0.0;
      s += p[c] * g[c];
      dz_ce[c] = (p[c] - yc) * inv_n;
    }
    for (std::size_t c = 0; c < classes; ++c) dz_dice[c] = p[c] * (g[c] - s);
    for (std::size_t c = 0; c < classes; ++c) {
      double* gce = out.grad_cross_entropy.data() + c * kInputCount;
      double* gd = out.grad_dice.data() + c * kInputCount;
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        gce[f] += dz_ce[c] * x[f];
        gd[f] += dz_dice[c] * x[f];
      }
      gce[kFeatureCount] += dz_ce[c];
      gd[kFeatureCount] += dz_dice[c];
    }
  }
  out.grad_total.resize(classes * kInputCount);
  for (std::size_t i = 0; i < out.grad_total.size(); ++i) {
    out.grad_total[i] = ce_weight * out.grad_cross_entropy[i] + (1.0 - ce_weight) * out.grad_dice[i];
  }
  return out;
}

TrainingReport train(std::span<const LabeledPixels> data, std::size_t classes, const LearnerConfig& config,
                     std::uint64_t seed, bool track_loss) {
  std::vector<const LabeledPixels*> items;
  for (const auto& d : data) {
    if (!d.pixels.empty()) items.push_back(&d);
  }
  if (items.empty()) fail(ErrorCode::invalid_argument, "train: no labeled pixels");
  if (config.batch_size < 1) fail(ErrorCode::invalid_argument, "train: batch size must be >= 1");
  std::sort(items.begin(), items.end(),
            [](const LabeledPixels* a, const LabeledPixels* b) { return a->image_id < b->image_id; });

  TrainingReport report;
  report.model = LinearSoftmaxModel(classes, config.dropout);
  auto w = report.model.weights();
  Rng init(hash_keys({seed, 0x1417ull}));
  for (double& v : w) v = config.init_scale * init.normal();

  std::vector<double> m(w.size(), 0.0), v(w.size(), 0.0);
  std::uint64_t t = 0;
  std::vector<LabeledPixels> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<const LabeledPixels*> order = items;
    Rng shuffle(hash_keys({seed, 0xE90Cull, epoch}));
    shuffle.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      // LabeledPixels are cheap views except for the index vectors; copy the
      // pointers' targets into a contiguous batch span.
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(*order[k]);
      const DropoutKey key{seed, epoch, config.dropout};
      const LossBreakdown loss = mixed_loss(w, classes, batch, config.ce_weight, &key);

      ++t;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double g = loss.grad_total[i] + config.weight_decay * w[i];
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        w[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_epsilon);
      }
    }
    if (track_loss) report.epoch_loss.push_back(mixed_loss(w, classes, data, config.ce_weight).total);
  }
  return report;
}

ProbabilityMap predict(const LinearSoftmaxModel& model, const PixelFeatures& features) {
  const std::size_t classes = model.classes();
  ProbabilityMap out(classes, features.height, features.width);
  std::vector<double> p(classes);
  for (std::size_t i = 0; i < features.pixels(); ++i) {
    softmax_row(model.weights(), classes, features.pixel(i), p.data());
    for (std::size_t c = 0; c < classes; ++c) out.at(c, i) = p[c];
  }
  return out;
}

ProbabilityMap predict_pass(const LinearSoftmaxModel& model, const PixelFeatures& features, std::size_t image_id,
                            std::size_t pass_index, std::uint64_t seed) {
  if (model.dropout() <= 0.0) return predict(model, features);
  const std::size_t classes = model.classes();
  ProbabilityMap out(classes, features.height, features.width);
  const DropoutStream stream(hash_keys({seed, 0x9A55ull}), image_id, pass_index, model.dropout());
  std::vector<double> p(classes);
  double x[kFeatureCount];
  for (std::size_t i = 0; i < features.pixels(); ++i) {
    stream.apply(i, features.pixel(i), x);
    softmax_row(model.weights(), classes, x, p.data());
    for (std::size_t c = 0; c < classes; ++c) out.at(c, i) = p[c];
  }
  return out;
}

ClassMap argmax(const ProbabilityMap& p) {
  ClassMap out(p.height(), p.width(), 0);
  for (std::size_t i = 0; i < p.pixels(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < p.classes(); ++c) {
      if (p.at(c, i) > p.at(best, i)) best = c;
    }
    out[i] = static_cast<std::uint8_t>(best);
  }
  return out;
}

ProbabilityMap BuiltinProvider::predict_pass(std::size_t image_id, std::size_t pass_index) const {
  if (image_id >= features_.size()) fail(ErrorCode::range, "predict_pass: image id out of range");
  return edgeal::predict_pass(model_, features_[image_id], image_id, pass_index, seed_);
}

ProbabilityMap BuiltinProvider::predict_deterministic(std::size_t image_id) const {
  if (image_id >= features_.size()) fail(ErrorCode::range, "predict: image id out of range");
  return predict(model_, features_[image_id]);
}

std::filesystem::path pass_path(const std::filesystem::path& dir, const std::string& name, std::size_t pass_index) {
  return dir / (name + "_pass" + std::to_string(pass_index) + ".ealt");
}

ProbabilityMap read_precomputed_pass(const std::filesystem::path& dir, const std::string& name, std::size_t pass_index) {
  const auto path = pass_path(dir, name, pass_index);
  if (!std::filesystem::exists(path)) fail(ErrorCode::io, "missing file: " + path.string());
  ProbabilityMap p;
  try {
    p = probability_map_from_tensor(read_tensor(path));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
  const auto check = check_normalization(p);
  if (check.has_invalid_entry || check.max_sum_error > kPassTolerance) {
    fail(ErrorCode::invalid_argument, path.string() + ": probabilities are not normalized per pixel");
  }
  return p;
}

ProbabilityMap PrecomputedProvider::predict_pass(std::size_t image_id, std::size_t pass_index) const {
  if (image_id >= names_.size()) fail(ErrorCode::range, "predict_pass: image id out of range");
  ProbabilityMap p = read_precomputed_pass(dir_, names_[image_id], pass_index);
  if (p.classes() != classes_) {
    fail(ErrorCode::dimension, pass_path(dir_, names_[image_id], pass_index).string() + ": has " +
                                   std::to_string(p.classes()) + " classes, dataset has " + std::to_string(classes_));
  }
  return p;
}

}  // namespace edgeal

namespace edgeal {

ProbabilityMap PrecomputedProvider::predict_deterministic(std::size_t image_id) const {
  std::vector<ProbabilityMap> passes;
  for (std::size_t k = 0; k < passes_; ++k) passes.push_back(predict_pass(image_id, k));
  return mc_average(passes);
}

}  // namespace edgeal
