// Command-line front end. Everything goes through the C interface.
#include <CLI11.hpp>

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "edgeal/edgeal.h"

namespace {

struct CliFailure {
  int exit_code;
};

void check(edgeal_status status, const std::string& context) {
  if (status == EDGEAL_OK) return;
  std::fprintf(stderr, "edgeal: %s: %s\n", context.c_str(), edgeal_last_error());
  throw CliFailure{status == EDGEAL_INVALID_ARGUMENT ? 2 : 1};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& o) noexcept : ptr(o.ptr) { o.ptr = nullptr; }
  ~Handle() { Free(ptr); }
};
using Tensor = Handle<edgeal_tensor, edgeal_tensor_free>;
using Superpixels = Handle<edgeal_superpixels, edgeal_superpixels_free>;
using Config = Handle<edgeal_config, edgeal_config_free>;

Tensor load(const std::string& path) {
  Tensor t;
  check(edgeal_tensor_read(path.c_str(), &t.ptr), "reading " + path);
  return t;
}

void log_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

std::string format_dice(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-aware active learning for image segmentation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(edgeal_version()));

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic banded dataset");
  std::string synth_out;
  size_t images = 40, height = 64, width = 64, classes = 3;
  double noise = 0.08;
  uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "Dataset root to create")->required();
  synth->add_option("--images", images, "Number of images")->capture_default_str();
  synth->add_option("--height", height, "Image height")->capture_default_str();
  synth->add_option("--width", width, "Image width")->capture_default_str();
  synth->add_option("--classes", classes, "Number of bands/classes")->capture_default_str();
  synth->add_option("--noise", noise, "Std of additive Gaussian noise")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();

  // run
  auto* run = app.add_subcommand("run", "Run the active-learning experiment");
  std::string config_path;
  std::map<std::string, std::string> overrides;
  bool resume = false;
  bool no_full = false;
  run->add_option("--config", config_path, "key = value configuration file");
  const std::vector<std::pair<std::string, std::string>> run_flags = {
      {"dataset", "Dataset root"},
      {"out", "Output directory"},
      {"strategy", "edgeal, random, ent, conf, mar, rmcdr, comma list or 'all'"},
      {"seed-fraction", "Initial labeled fraction"},
      {"budget", "Labeled fraction added per round"},
      {"rounds", "Number of acquisition rounds"},
      {"mc-passes", "Stochastic forward passes per image"},
      {"superpixels", "Target superpixels per image"},
      {"superpixel-iterations", "Boundary refinement sweeps"},
      {"superpixel-seed", "Superpixel visiting-order seed"},
      {"seeds", "Comma-separated experiment seeds"},
      {"learning-rate", "Adam step size"},
      {"weight-decay", "L2 weight decay"},
      {"epochs", "Training epochs per round"},
      {"batch-size", "Images per mini-batch"},
      {"dropout", "Dropout rate on the inputs"},
      {"provider", "builtin or precomputed"},
      {"passes-dir", "Directory of <name>_pass<k>.ealt files for the precomputed provider"},
  };
  for (const auto& [flag, help] : run_flags) {
    run->add_option_function<std::string>(
        "--" + flag, [&overrides, key = flag](const std::string& v) { overrides[key] = v; }, help);
  }
  run->add_flag("--resume", resume, "Continue from persisted masks and rows");
  run->add_flag("--no-full-reference", no_full, "Skip the full-label reference training");

  // score
  auto* score = app.add_subcommand("score", "Edge entropy and edge divergence maps from stochastic passes");
  std::string score_image, passes_dir, score_out = ".";
  size_t score_passes = 8;
  score->add_option("image", score_image, "Image tensor <name>.ealt")->required();
  score->add_option("--passes", passes_dir, "Directory holding <name>_pass<k>.ealt, k = 0..D-1")->required();
  score->add_option("--mc-passes", score_passes, "Number of passes D")->capture_default_str();
  score->add_option("-o,--out", score_out, "Directory for <name>_ee.ealt and <name>_ed.ealt")->capture_default_str();

  // superpixels
  auto* sp = app.add_subcommand("superpixels", "Oversegment an image");
  std::string sp_image, sp_out;
  size_t sp_count = 64, sp_iterations = 10;
  uint64_t sp_seed = 0;
  sp->add_option("image", sp_image, "Image tensor")->required();
  sp->add_option("-o,--out", sp_out, "Output label map")->required();
  sp->add_option("-n,--count", sp_count, "Target region count")->capture_default_str();
  sp->add_option("--iterations", sp_iterations, "Refinement sweeps")->capture_default_str();
  sp->add_option("--seed", sp_seed, "Visiting-order seed")->capture_default_str();

  // edges
  auto* edges = app.add_subcommand("edges", "Normalised Sobel magnitude");
  std::string edges_image, edges_out;
  edges->add_option("image", edges_image, "Image tensor")->required();
  edges->add_option("-o,--out", edges_out, "Output edge map")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Dice of a predicted class map, or of a saved model on a dataset split");
  std::string pred_path, gt_path, eval_dataset, model_path, split = "test", eval_csv;
  size_t eval_classes = 0;
  auto* pred_opt = eval->add_option("pred", pred_path, "Predicted class map (u8)");
  auto* gt_opt = eval->add_option("gt", gt_path, "Ground-truth class map (u8)");
  eval->add_option("--classes", eval_classes, "Number of classes (default: largest label + 1)");
  auto* dataset_opt = eval->add_option("--dataset", eval_dataset, "Dataset root");
  auto* model_opt = eval->add_option("--model", model_path, "Model checkpoint from a run");
  eval->add_option("--split", split, "train, val or test")->capture_default_str();
  eval->add_option("--csv", eval_csv, "Append a mean_dice,per_class_dice row to this file");
  pred_opt->needs(gt_opt)->excludes(dataset_opt)->excludes(model_opt);
  gt_opt->needs(pred_opt);
  dataset_opt->needs(model_opt);
  model_opt->needs(dataset_opt);

  // summarize
  auto* summarize = app.add_subcommand("summarize", "Mean and sd of dice across seeds");
  std::string curves_path, summary_out;
  summarize->add_option("curves", curves_path, "curves.csv from a run")->required();
  summarize->add_option("-o,--out", summary_out, "Also write the summary CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      check(edgeal_synth(synth_out.c_str(), images, height, width, classes, noise, synth_seed), "synth");
      std::printf("wrote %zu images to %s\n", images, synth_out.c_str());
    } else if (*run) {
      Config config;
      check(edgeal_config_create(&config.ptr), "config");
      if (!config_path.empty()) check(edgeal_config_load(config.ptr, config_path.c_str()), "config");
      for (const auto& [key, value] : overrides) {
        check(edgeal_config_set(config.ptr, key.c_str(), value.c_str()), "--" + key);
      }
      if (resume) check(edgeal_config_set(config.ptr, "resume", "true"), "--resume");
      if (no_full) check(edgeal_config_set(config.ptr, "full_reference", "false"), "--no-full-reference");
      check(edgeal_config_validate(config.ptr), "config");
      check(edgeal_run(config.ptr, log_line, nullptr), "run");
    } else if (*score) {
      const std::string name = std::filesystem::path(score_image).stem().string();
      Tensor image = load(score_image);
      std::vector<Tensor> passes;
      std::vector<const edgeal_tensor*> raw;
      for (size_t k = 0; k < score_passes; ++k) {
        passes.push_back(load((std::filesystem::path(passes_dir) / (name + "_pass" + std::to_string(k) + ".ealt")).string()));
        raw.push_back(passes.back().ptr);
      }
      Tensor ee, ed;
      check(edgeal_score(image.ptr, raw.data(), raw.size(), &ee.ptr, &ed.ptr), "score");
      std::filesystem::create_directories(score_out);
      const auto ee_path = (std::filesystem::path(score_out) / (name + "_ee.ealt")).string();
      const auto ed_path = (std::filesystem::path(score_out) / (name + "_ed.ealt")).string();
      check(edgeal_tensor_write(ee.ptr, ee_path.c_str()), "writing " + ee_path);
      check(edgeal_tensor_write(ed.ptr, ed_path.c_str()), "writing " + ed_path);
    } else if (*sp) {
      Tensor image = load(sp_image);
      Superpixels map;
      check(edgeal_superpixels_compute(image.ptr, sp_count, sp_iterations, sp_seed, &map.ptr), "superpixels");
      check(edgeal_superpixels_write(map.ptr, sp_out.c_str()), "writing " + sp_out);
      std::printf("%zu regions\n", edgeal_superpixels_region_count(map.ptr));
    } else if (*edges) {
      Tensor image = load(edges_image);
      Tensor out;
      check(edgeal_edges(image.ptr, &out.ptr), "edges");
      check(edgeal_tensor_write(out.ptr, edges_out.c_str()), "writing " + edges_out);
    } else if (*eval) {
      double mean = 0.0;
      std::vector<double> per_class;
      if (!pred_path.empty()) {
        Tensor pred = load(pred_path);
        Tensor gt = load(gt_path);
        size_t classes_used = eval_classes;
        if (classes_used == 0) {
          for (const Tensor* t : {&pred, &gt}) {
            const uint8_t* data = edgeal_tensor_data_u8(t->ptr);
            if (!data) {
              std::fprintf(stderr, "edgeal: eval: class maps must be u8 tensors\n");
              return 2;
            }
            for (size_t i = 0; data && i < edgeal_tensor_element_count(t->ptr); ++i) {
              classes_used = std::max<size_t>(classes_used, size_t{data[i]} + 1);
            }
          }
          classes_used = std::max<size_t>(classes_used, 2);
        }
        per_class.resize(classes_used);
        check(edgeal_dice(pred.ptr, gt.ptr, classes_used, &mean, per_class.data()), "eval");
      } else if (!eval_dataset.empty()) {
        Tensor model = load(model_path);
        per_class.resize(edgeal_tensor_dim(model.ptr, 0));
        check(edgeal_evaluate_model(eval_dataset.c_str(), model_path.c_str(), split.c_str(), &mean,
                                    per_class.data(), per_class.size()),
              "eval");
      } else {
        std::fprintf(stderr, "edgeal: eval: give <pred> <gt>, or --dataset with --model\n");
        return 2;
      }
      std::printf("mean_dice %s\n", format_dice(mean).c_str());
      for (size_t c = 0; c < per_class.size(); ++c) {
        std::printf("class %zu %s\n", c, format_dice(per_class[c]).c_str());
      }
      if (!eval_csv.empty()) {
        const bool fresh = !std::filesystem::exists(eval_csv);
        std::FILE* f = std::fopen(eval_csv.c_str(), "a");
        if (!f) {
          std::fprintf(stderr, "edgeal: eval: cannot open %s\n", eval_csv.c_str());
          return 1;
        }
        if (fresh) std::fputs("mean_dice,per_class_dice\n", f);
        std::string joined;
        for (size_t c = 0; c < per_class.size(); ++c) {
          if (c) joined += ',';
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.6f", per_class[c]);
          joined += std::isnan(per_class[c]) ? "nan" : buf;
        }
        std::fprintf(f, "%.6f,\"%s\"\n", mean, joined.c_str());
        std::fclose(f);
      }
    } else if (*summarize) {
      size_t needed = 0;
      check(edgeal_summarize(curves_path.c_str(), summary_out.empty() ? nullptr : summary_out.c_str(), nullptr, 0,
                             &needed),
            "summarize");
      std::string table(needed, '\0');
      check(edgeal_summarize(curves_path.c_str(), nullptr, table.data(), table.size(), &needed), "summarize");
      std::fputs(table.c_str(), stdout);
    }
  } catch (const CliFailure& f) {
    return f.exit_code;
  }
  return 0;
}
