#include "edgeal/edgeal.h"

#include <cmath>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "edgeal/dataset.hpp"
#include "edgeal/edges.hpp"
#include "edgeal/error.hpp"
#include "edgeal/experiment.hpp"
#include "edgeal/learner.hpp"
#include "edgeal/metrics.hpp"
#include "edgeal/superpixels.hpp"
#include "edgeal/tensor.hpp"
#include "edgeal/uncertainty.hpp"

struct edgeal_tensor {
  edgeal::Tensor value;
};

struct edgeal_superpixels {
  edgeal::SuperpixelMap value;
};

struct edgeal_config {
  edgeal::ExperimentConfig value;
};

namespace {

thread_local std::string last_error;

edgeal_status to_status(edgeal::ErrorCode code) {
  switch (code) {
    case edgeal::ErrorCode::invalid_argument: return EDGEAL_INVALID_ARGUMENT;
    case edgeal::ErrorCode::io: return EDGEAL_IO;
    case edgeal::ErrorCode::format: return EDGEAL_FORMAT;
    case edgeal::ErrorCode::dimension: return EDGEAL_DIMENSION;
    case edgeal::ErrorCode::range: return EDGEAL_RANGE;
    case edgeal::ErrorCode::state: return EDGEAL_STATE;
  }
  return EDGEAL_INTERNAL;
}

// Runs `body`, translating exceptions into status codes and the thread-local
// message. Nothing escapes the C boundary.
template <typename F>
edgeal_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return EDGEAL_OK;
  } catch (const edgeal::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return EDGEAL_IO;
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return EDGEAL_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) edgeal::fail(edgeal::ErrorCode::invalid_argument, what);
}

std::vector<std::uint32_t> dims_of(size_t rank, const uint32_t* dims) {
  require(dims != nullptr, "dims is null");
  return std::vector<std::uint32_t>(dims, dims + rank);
}

size_t product(const std::vector<std::uint32_t>& dims) {
  size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

edgeal_tensor* wrap(edgeal::Tensor t) { return new edgeal_tensor{std::move(t)}; }

}  // namespace

extern "C" {

const char* edgeal_version(void) { return "0.1.0"; }

const char* edgeal_status_name(edgeal_status status) {
  switch (status) {
    case EDGEAL_OK: return "ok";
    case EDGEAL_INVALID_ARGUMENT: return "invalid argument";
    case EDGEAL_IO: return "i/o error";
    case EDGEAL_FORMAT: return "format error";
    case EDGEAL_DIMENSION: return "dimension mismatch";
    case EDGEAL_RANGE: return "out of range";
    case EDGEAL_STATE: return "invalid state";
    case EDGEAL_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* edgeal_last_error(void) { return last_error.c_str(); }

edgeal_status edgeal_tensor_create_u8(size_t rank, const uint32_t* dims, const uint8_t* data, edgeal_tensor** out) {
  return guarded([&] {
    require(out != nullptr && data != nullptr, "null argument");
    auto d = dims_of(rank, dims);
    const size_t n = product(d);
    *out = wrap(edgeal::Tensor::from_u8(std::move(d), std::vector<std::uint8_t>(data, data + n)));
  });
}

edgeal_status edgeal_tensor_create_f32(size_t rank, const uint32_t* dims, const float* data, edgeal_tensor** out) {
  return guarded([&] {
    require(out != nullptr && data != nullptr, "null argument");
    auto d = dims_of(rank, dims);
    const size_t n = product(d);
    *out = wrap(edgeal::Tensor::from_f32(std::move(d), std::vector<float>(data, data + n)));
  });
}

edgeal_status edgeal_tensor_read(const char* path, edgeal_tensor** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = wrap(edgeal::read_tensor(path));
  });
}

edgeal_status edgeal_tensor_write(const edgeal_tensor* tensor, const char* path) {
  return guarded([&] {
    require(tensor != nullptr && path != nullptr, "null argument");
    edgeal::write_tensor(path, tensor->value);
  });
}

void edgeal_tensor_free(edgeal_tensor* tensor) { delete tensor; }

edgeal_dtype edgeal_tensor_dtype(const edgeal_tensor* tensor) {
  return tensor->value.dtype() == edgeal::DType::u8 ? EDGEAL_U8 : EDGEAL_F32;
}

size_t edgeal_tensor_rank(const edgeal_tensor* tensor) { return tensor->value.rank(); }

uint32_t edgeal_tensor_dim(const edgeal_tensor* tensor, size_t axis) {
  return axis < tensor->value.rank() ? tensor->value.dims()[axis] : 0;
}

size_t edgeal_tensor_element_count(const edgeal_tensor* tensor) { return tensor->value.element_count(); }

const uint8_t* edgeal_tensor_data_u8(const edgeal_tensor* tensor) {
  return tensor->value.dtype() == edgeal::DType::u8 ? tensor->value.u8().data() : nullptr;
}

const float* edgeal_tensor_data_f32(const edgeal_tensor* tensor) {
  return tensor->value.dtype() == edgeal::DType::f32 ? tensor->value.f32().data() : nullptr;
}

edgeal_status edgeal_edges(const edgeal_tensor* image, edgeal_tensor** out_edges) {
  return guarded([&] {
    require(image != nullptr && out_edges != nullptr, "null argument");
    const auto edges = edgeal::edge_map(edgeal::image_from_tensor(image->value));
    *out_edges = wrap(edgeal::to_tensor(edges));
  });
}

edgeal_status edgeal_score(const edgeal_tensor* image, const edgeal_tensor* const* passes, size_t pass_count,
                           edgeal_tensor** out_entropy, edgeal_tensor** out_divergence) {
  return guarded([&] {
    require(image != nullptr, "image is null");
    require(passes != nullptr || pass_count == 0, "passes is null");
    std::vector<edgeal::ProbabilityMap> maps;
    for (size_t k = 0; k < pass_count; ++k) {
      require(passes[k] != nullptr, "null pass tensor");
      maps.push_back(edgeal::probability_map_from_tensor(passes[k]->value));
    }
    const auto scores = edgeal::score_image(edgeal::image_from_tensor(image->value), maps);
    edgeal_tensor* ee = out_entropy ? wrap(edgeal::to_tensor(scores.entropy)) : nullptr;
    if (out_divergence) {
      try {
        *out_divergence = wrap(edgeal::to_tensor(scores.divergence));
      } catch (...) {
        delete ee;
        throw;
      }
    }
    if (out_entropy) *out_entropy = ee;
  });
}

edgeal_status edgeal_superpixels_compute(const edgeal_tensor* image, size_t target_count, size_t iterations,
                                         uint64_t seed, edgeal_superpixels** out) {
  return guarded([&] {
    require(image != nullptr && out != nullptr, "null argument");
    require(target_count >= 1, "superpixel count must be >= 1");
    const auto sp = edgeal::seeds_partition(edgeal::image_from_tensor(image->value),
                                            edgeal::SeedsParams{target_count, iterations, seed});
    *out = new edgeal_superpixels{sp};
  });
}

edgeal_status edgeal_superpixels_read(const char* path, edgeal_superpixels** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new edgeal_superpixels{edgeal::read_superpixel_map(path)};
  });
}

edgeal_status edgeal_superpixels_write(const edgeal_superpixels* sp, const char* path) {
  return guarded([&] {
    require(sp != nullptr && path != nullptr, "null argument");
    edgeal::write_superpixel_map(path, sp->value);
  });
}

void edgeal_superpixels_free(edgeal_superpixels* sp) { delete sp; }

size_t edgeal_superpixels_region_count(const edgeal_superpixels* sp) { return sp->value.region_count; }
size_t edgeal_superpixels_height(const edgeal_superpixels* sp) { return sp->value.labels.height(); }
size_t edgeal_superpixels_width(const edgeal_superpixels* sp) { return sp->value.labels.width(); }

edgeal_status edgeal_superpixels_labels(const edgeal_superpixels* sp, uint32_t* labels, size_t capacity) {
  return guarded([&] {
    require(sp != nullptr && labels != nullptr, "null argument");
    const auto& values = sp->value.labels.values();
    if (capacity < values.size()) edgeal::fail(edgeal::ErrorCode::range, "label buffer too small");
    std::memcpy(labels, values.data(), values.size() * sizeof(uint32_t));
  });
}

edgeal_status edgeal_dice(const edgeal_tensor* prediction, const edgeal_tensor* truth, size_t classes,
                          double* out_mean, double* per_class) {
  return guarded([&] {
    require(prediction != nullptr && truth != nullptr && out_mean != nullptr, "null argument");
    const auto report = edgeal::dice(edgeal::class_map_from_tensor(prediction->value),
                                     edgeal::class_map_from_tensor(truth->value), classes);
    *out_mean = report.mean;
    if (per_class) {
      for (size_t c = 0; c < classes; ++c) per_class[c] = report.evaluated[c] ? report.per_class[c] : NAN;
    }
  });
}

edgeal_status edgeal_evaluate_model(const char* dataset_root, const char* model_path, const char* split,
                                    double* out_mean, double* per_class, size_t per_class_capacity) {
  return guarded([&] {
    require(dataset_root != nullptr && model_path != nullptr && split != nullptr && out_mean != nullptr,
            "null argument");
    const std::string name(split);
    edgeal::Split which;
    if (name == "train") which = edgeal::Split::train;
    else if (name == "val") which = edgeal::Split::val;
    else if (name == "test") which = edgeal::Split::test;
    else edgeal::fail(edgeal::ErrorCode::invalid_argument, "unknown split '" + name + "'");

    const auto index = edgeal::load_dataset(dataset_root);
    const auto model = edgeal::LinearSoftmaxModel::from_tensor(edgeal::read_tensor(model_path), 0.0);
    if (model.classes() != index.classes) {
      edgeal::fail(edgeal::ErrorCode::dimension, "model has " + std::to_string(model.classes()) +
                                                     " classes but the dataset has " + std::to_string(index.classes));
    }
    const auto train_set = edgeal::load_split(index, edgeal::Split::train);
    std::vector<edgeal::PixelFeatures> raw;
    for (const auto& s : train_set) raw.push_back(edgeal::raw_features(s.image));
    const auto stats = edgeal::feature_stats(raw);

    const auto samples = which == edgeal::Split::train ? train_set : edgeal::load_split(index, which);
    if (samples.empty()) edgeal::fail(edgeal::ErrorCode::state, "split '" + name + "' is empty");
    std::vector<edgeal::PixelFeatures> features;
    for (const auto& s : samples) features.push_back(edgeal::extract_features(s.image, stats));
    const auto ev = edgeal::evaluate(model, features, samples);
    *out_mean = ev.mean_dice;
    if (per_class) {
      for (size_t c = 0; c < per_class_capacity && c < ev.per_class.size(); ++c) per_class[c] = ev.per_class[c];
    }
  });
}

edgeal_status edgeal_synth(const char* root, size_t images, size_t height, size_t width, size_t classes,
                           double noise, uint64_t seed) {
  return guarded([&] {
    require(root != nullptr, "root is null");
    edgeal::generate_synthetic(root, edgeal::SyntheticSpec{images, height, width, classes, noise, seed});
  });
}

edgeal_status edgeal_config_create(edgeal_config** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new edgeal_config{};
  });
}

void edgeal_config_free(edgeal_config* config) { delete config; }

edgeal_status edgeal_config_load(edgeal_config* config, const char* path) {
  return guarded([&] {
    require(config != nullptr && path != nullptr, "null argument");
    edgeal::apply_config_file(config->value, path);
  });
}

edgeal_status edgeal_config_set(edgeal_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config != nullptr && key != nullptr && value != nullptr, "null argument");
    config->value.set(key, value);
  });
}

edgeal_status edgeal_config_validate(const edgeal_config* config) {
  return guarded([&] {
    require(config != nullptr, "null argument");
    config->value.validate();
  });
}

edgeal_status edgeal_run(const edgeal_config* config, edgeal_log_fn log, void* user) {
  return guarded([&] {
    require(config != nullptr, "null argument");
    edgeal::LogFn sink;
    if (log) {
      sink = [log, user](std::string_view line) {
        const std::string copy(line);
        log(copy.c_str(), user);
      };
    }
    edgeal::run_experiment(config->value, sink);
  });
}

edgeal_status edgeal_summarize(const char* curves_csv, const char* summary_csv, char* buffer, size_t capacity,
                               size_t* needed) {
  return guarded([&] {
    require(curves_csv != nullptr, "null argument");
    const auto rows = edgeal::read_curves(curves_csv);
    if (rows.empty()) edgeal::fail(edgeal::ErrorCode::state, std::string(curves_csv) + " has no rows");
    const auto summary = edgeal::summarize(rows);
    if (summary_csv) edgeal::write_summary_csv(summary_csv, summary);
    const std::string table = edgeal::format_summary_table(summary);
    if (needed) *needed = table.size() + 1;
    if (buffer) {
      if (capacity < table.size() + 1) edgeal::fail(edgeal::ErrorCode::range, "summary buffer too small");
      std::memcpy(buffer, table.c_str(), table.size() + 1);
    }
  });
}

}  // extern "C"
