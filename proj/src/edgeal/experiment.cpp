#include "edgeal/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "edgeal/csv.hpp"
#include "edgeal/error.hpp"
#include "edgeal/labels.hpp"
#include "edgeal/rng.hpp"
#include "edgeal/rounds.hpp"

namespace edgeal {

namespace {

std::string normalize_key(std::string_view key) {
  std::string out(key);
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string s(trim(value));
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::invalid_argument, "config key '" + std::string(key) + "': not a number: '" + s + "'");
}

std::uint64_t parse_uint(std::string_view key, std::string_view value) {
  const auto s = trim(value);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    fail(ErrorCode::invalid_argument, "config key '" + std::string(key) + "': not a non-negative integer: '" +
                                          std::string(s) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const auto s = trim(value);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  fail(ErrorCode::invalid_argument, "config key '" + std::string(key) + "': not a boolean: '" + std::string(s) + "'");
}

}  // namespace

std::vector<std::string> config_keys() {
  return {"dataset",      "out",           "strategy",        "seed_fraction", "budget",
          "rounds",       "mc_passes",     "superpixels",     "superpixel_iterations", "superpixel_seed",
          "seeds",        "learning_rate", "weight_decay",    "epochs",        "batch_size",
          "dropout",      "provider",      "passes_dir",      "full_reference", "resume"};
}

void ExperimentConfig::set(std::string_view raw_key, std::string_view value) {
  const std::string key = normalize_key(trim(raw_key));
  const std::string v(trim(value));
  if (key == "dataset") dataset = v;
  else if (key == "out") out = v;
  else if (key == "strategy" || key == "strategies") {
    std::vector<Strategy> parsed;
    for (const auto& name : split_list(v)) {
      if (name == "all") {
        const auto all = all_strategies();
        parsed.assign(all.begin(), all.end());
      } else {
        parsed.push_back(parse_strategy(name));
      }
    }
    strategies = std::move(parsed);
  } else if (key == "seed_fraction") seed_fraction = parse_double(key, v);
  else if (key == "budget") budget = parse_double(key, v);
  else if (key == "rounds") rounds = parse_uint(key, v);
  else if (key == "mc_passes") mc_passes = parse_uint(key, v);
  else if (key == "superpixels") superpixels = parse_uint(key, v);
  else if (key == "superpixel_iterations") superpixel_iterations = parse_uint(key, v);
  else if (key == "superpixel_seed") superpixel_seed = parse_uint(key, v);
  else if (key == "seeds") {
    seeds.clear();
    for (const auto& s : split_list(v)) seeds.push_back(parse_uint(key, s));
  } else if (key == "learning_rate") learner.learning_rate = parse_double(key, v);
  else if (key == "weight_decay") learner.weight_decay = parse_double(key, v);
  else if (key == "epochs") learner.epochs = parse_uint(key, v);
  else if (key == "batch_size") learner.batch_size = parse_uint(key, v);
  else if (key == "dropout") learner.dropout = parse_double(key, v);
  else if (key == "provider") {
    if (v != "builtin" && v != "precomputed") fail(ErrorCode::invalid_argument, "provider must be builtin or precomputed");
    provider = v;
  } else if (key == "passes_dir") passes_dir = v;
  else if (key == "full_reference") full_reference = parse_bool(key, v);
  else if (key == "resume") resume = parse_bool(key, v);
  else fail(ErrorCode::invalid_argument, "unknown config key '" + key + "'");
}

void ExperimentConfig::validate() const {
  if (dataset.empty()) fail(ErrorCode::invalid_argument, "config: dataset is required");
  if (!(seed_fraction > 0.0 && seed_fraction < 1.0)) fail(ErrorCode::invalid_argument, "config: seed_fraction must lie in (0,1)");
  if (!(budget > 0.0 && budget < 1.0)) fail(ErrorCode::invalid_argument, "config: budget must lie in (0,1)");
  if (seeds.empty()) fail(ErrorCode::invalid_argument, "config: seeds must not be empty");
  if (strategies.empty()) fail(ErrorCode::invalid_argument, "config: no strategy given");
  if (mc_passes < 1) fail(ErrorCode::invalid_argument, "config: mc_passes must be >= 1");
  if (superpixels < 1) fail(ErrorCode::invalid_argument, "config: superpixels must be >= 1");
  if (learner.epochs < 1 || learner.batch_size < 1) fail(ErrorCode::invalid_argument, "config: epochs and batch_size must be >= 1");
  if (!(learner.dropout >= 0.0 && learner.dropout < 1.0)) fail(ErrorCode::invalid_argument, "config: dropout must lie in [0,1)");
  if (provider == "precomputed" && passes_dir.empty()) {
    fail(ErrorCode::invalid_argument, "config: provider precomputed needs passes_dir");
  }
}

void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    std::string_view body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::format, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      config.set(body.substr(0, eq), body.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// curves.csv

std::string curve_header() {
  return "strategy,seed,round,labeled_fraction,mean_dice,per_class_dice\n";
}

std::string curve_line(const CurveRow& row) {
  std::string per_class;
  for (std::size_t c = 0; c < row.per_class_dice.size(); ++c) {
    if (c) per_class += ',';
    per_class += format_fixed(row.per_class_dice[c], 6);
  }
  const std::vector<std::string> fields = {row.strategy,
                                           std::to_string(row.seed),
                                           std::to_string(row.round),
                                           format_fixed(row.labeled_fraction, 6),
                                           format_fixed(row.mean_dice, 6),
                                           per_class};
  return csv_line(fields);
}

std::vector<CurveRow> read_curves(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  const auto records = parse_csv(in);
  std::vector<CurveRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.size() == 1 && r[0].empty()) continue;
    if (r.size() != 6) fail(ErrorCode::format, path.string() + ": row " + std::to_string(i + 1) + " has " + std::to_string(r.size()) + " fields");
    CurveRow row;
    row.strategy = r[0];
    row.seed = parse_uint("seed", r[1]);
    row.round = parse_uint("round", r[2]);
    row.labeled_fraction = parse_double("labeled_fraction", r[3]);
    row.mean_dice = parse_double("mean_dice", r[4]);
    for (const auto& v : split_list(r[5])) row.per_class_dice.push_back(v == "nan" ? NAN : parse_double("per_class_dice", v));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Synthetic data

SyntheticImage synthesize_image(const SyntheticSpec& spec, std::size_t index) {
  const std::size_t h = spec.height;
  const std::size_t w = spec.width;
  const std::size_t classes = spec.classes;
  Rng rng(hash_keys({spec.seed, 0x5A17ull, index}));

  const double band = static_cast<double>(h) / static_cast<double>(classes);
  const double reach = std::max(0.0, band / 2.0 - 2.0);
  std::vector<std::vector<double>> boundary(classes - 1, std::vector<double>(w));
  for (std::size_t k = 0; k + 1 < classes; ++k) {
    const double base = band * static_cast<double>(k + 1);
    double pos = base + (rng.uniform() - 0.5) * reach;
    for (std::size_t n = 0; n < w; ++n) {
      if (n > 0) pos += 0.6 * rng.normal();
      pos = std::clamp(pos, base - reach, base + reach);
      boundary[k][n] = pos;
    }
  }

  SyntheticImage out;
  out.image = Image(h, w);
  out.labels = ClassMap(h, w, 0);
  const std::size_t seam = (2 * w + 2) / 3;
  out.seam_columns = {seam};
  for (std::size_t m = 0; m < h; ++m) {
    for (std::size_t n = 0; n < w; ++n) {
      std::size_t c = 0;
      for (std::size_t k = 0; k + 1 < classes; ++k) {
        if (static_cast<double>(m) >= std::round(boundary[k][n])) ++c;
      }
      double v = static_cast<double>(c) / static_cast<double>(classes - 1);
      if (n >= seam) v = 0.5 + 0.5 * (v - 0.5);
      out.labels(m, n) = static_cast<std::uint8_t>(c);
      out.image(m, n) = v;
    }
  }
  if (spec.noise > 0.0) {
    for (std::size_t i = 0; i < out.image.size(); ++i) out.image[i] += spec.noise * rng.normal();
  }
  return out;
}

DatasetIndex generate_synthetic(const std::filesystem::path& root, const SyntheticSpec& spec) {
  if (spec.classes < 2 || spec.classes > 254) fail(ErrorCode::invalid_argument, "synthetic: classes must lie in [2, 254]");
  if (spec.height < 16 || spec.width < 16) fail(ErrorCode::invalid_argument, "synthetic: height and width must be >= 16");
  if (spec.height < 4 * spec.classes) fail(ErrorCode::invalid_argument, "synthetic: height too small for the class count");
  if (spec.images < 3) fail(ErrorCode::invalid_argument, "synthetic: need at least 3 images for the splits");
  if (!(spec.noise >= 0.0)) fail(ErrorCode::invalid_argument, "synthetic: noise must be >= 0");

  std::filesystem::create_directories(root / "images");
  std::filesystem::create_directories(root / "labels");
  const int digits = std::max<int>(3, static_cast<int>(std::to_string(spec.images - 1).size()));
  std::vector<std::string> names(spec.images);
  for (std::size_t i = 0; i < spec.images; ++i) {
    std::string num = std::to_string(i);
    names[i] = "img" + std::string(static_cast<std::size_t>(digits) - std::min<std::size_t>(num.size(), digits), '0') + num;
    const SyntheticImage s = synthesize_image(spec, i);
    write_tensor(root / "images" / (names[i] + ".ealt"), to_tensor(s.image));
    write_tensor(root / "labels" / (names[i] + ".ealt"), to_tensor(s.labels));
  }

  std::vector<std::size_t> order(spec.images);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(hash_keys({spec.seed, 0x5B1Full}));
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(spec.images)));
  const auto n_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(spec.images))));
  std::array<std::vector<std::size_t>, 3> split_ids;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int s = k < n_train ? 0 : k < n_train + n_test ? 2 : 1;
    split_ids[s].push_back(order[k]);
  }
  std::ofstream out(root / "splits.txt", std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + (root / "splits.txt").string());
  for (int s : {0, 1, 2}) {
    auto ids = split_ids[s];
    std::sort(ids.begin(), ids.end());
    for (std::size_t id : ids) out << split_name(static_cast<Split>(s)) << '\t' << names[id] << '\n';
  }
  out.close();
  return load_dataset(root);
}

// ---------------------------------------------------------------------------
// Experiment loop

Evaluation evaluate(const LinearSoftmaxModel& model, std::span<const PixelFeatures> features,
                    std::span<const Sample> samples) {
  const std::size_t classes = model.classes();
  Evaluation ev;
  ev.per_class.assign(classes, 0.0);
  std::vector<std::size_t> counted(classes, 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto report = dice(argmax(predict(model, features[i])), samples[i].labels, classes);
    ev.mean_dice += report.mean;
    for (std::size_t c = 0; c < classes; ++c) {
      if (!report.evaluated[c]) continue;
      ev.per_class[c] += report.per_class[c];
      ++counted[c];
    }
  }
  ev.mean_dice /= static_cast<double>(samples.size());
  for (std::size_t c = 0; c < classes; ++c) ev.per_class[c] = counted[c] ? ev.per_class[c] / static_cast<double>(counted[c]) : NAN;
  return ev;
}

namespace {

Evaluation evaluate_precomputed(const PrecomputedProvider& provider, std::span<const Sample> samples,
                                std::size_t classes) {
  Evaluation ev;
  ev.per_class.assign(classes, 0.0);
  std::vector<std::size_t> counted(classes, 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto report = dice(argmax(provider.predict_deterministic(i)), samples[i].labels, classes);
    ev.mean_dice += report.mean;
    for (std::size_t c = 0; c < classes; ++c) {
      if (!report.evaluated[c]) continue;
      ev.per_class[c] += report.per_class[c];
      ++counted[c];
    }
  }
  ev.mean_dice /= static_cast<double>(samples.size());
  for (std::size_t c = 0; c < classes; ++c) ev.per_class[c] = counted[c] ? ev.per_class[c] / static_cast<double>(counted[c]) : NAN;
  return ev;
}

std::vector<LabeledPixels> training_data(const LabelState& state, std::span<const PixelFeatures> features) {
  std::vector<LabeledPixels> data;
  for (std::size_t i = 0; i < state.image_count(); ++i) {
    auto lp = labeled_pixels(i, features[i], state.mask(i));
    if (!lp.pixels.empty()) data.push_back(std::move(lp));
  }
  return data;
}

void write_selection_csv(const std::filesystem::path& path, const SelectionResult& sel) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << "image_id,region_id,mean_ee,mean_ed,pixels\n";
  for (const auto& r : sel.regions) {
    const std::vector<std::string> fields = {std::to_string(r.image_id), std::to_string(r.region_id),
                                             format_fixed(r.mean_ee, 8), format_fixed(r.mean_ed, 8),
                                             std::to_string(r.unlabeled_count)};
    out << csv_line(fields);
  }
}

std::string cell_label(std::string_view strategy, std::uint64_t seed, std::size_t round) {
  return std::string(strategy) + " seed " + std::to_string(seed) + " round " + std::to_string(round);
}

// Appends rows to curves.csv one at a time, skipping rows already present
// from an interrupted run.
class CurveWriter {
 public:
  CurveWriter(std::filesystem::path path, bool resume) : path_(std::move(path)) {
    if (resume && std::filesystem::exists(path_)) {
      // Drop a partially written trailing line.
      std::string content;
      {
        std::ifstream in(path_, std::ios::binary);
        content.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
      }
      const auto last_newline = content.rfind('\n');
      content.resize(last_newline == std::string::npos ? 0 : last_newline + 1);
      if (content.empty()) content = curve_header();
      {
        std::ofstream out(path_, std::ios::binary | std::ios::trunc);
        out << content;
      }
      for (const auto& row : read_curves(path_)) existing_[key(row.strategy, row.seed, row.round)] = row;
    } else {
      std::ofstream out(path_, std::ios::binary | std::ios::trunc);
      if (!out) fail(ErrorCode::io, "cannot write " + path_.string());
      out << curve_header();
    }
  }

  const CurveRow* find(std::string_view strategy, std::uint64_t seed, std::size_t round) const {
    const auto it = existing_.find(key(strategy, seed, round));
    return it == existing_.end() ? nullptr : &it->second;
  }

  void append(const CurveRow& row) {
    if (find(row.strategy, row.seed, row.round)) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) fail(ErrorCode::io, "cannot append to " + path_.string());
    out << curve_line(row);
    out.flush();
    if (!out) fail(ErrorCode::io, "append failed for " + path_.string());
  }

 private:
  static std::string key(std::string_view strategy, std::uint64_t seed, std::size_t round) {
    return std::string(strategy) + "/" + std::to_string(seed) + "/" + std::to_string(round);
  }

  std::filesystem::path path_;
  std::map<std::string, CurveRow> existing_;
};

std::uint64_t round_key(std::uint64_t seed, std::size_t round) { return hash_keys({seed, 0xA1ull, round}); }
std::uint64_t pass_key(std::uint64_t seed, std::size_t round) { return hash_keys({seed, 0xD5ull, round}); }

std::size_t round_budget(const ExperimentConfig& config, const LabelState& state, std::size_t round) {
  const double target_fraction = config.seed_fraction + static_cast<double>(round) * config.budget;
  const auto target = static_cast<std::size_t>(std::ceil(target_fraction * static_cast<double>(state.total_pixels()) - 1e-6));
  return target > state.revealed_pixels() ? target - state.revealed_pixels() : 1;
}

}  // namespace

std::vector<CurveRow> run_experiment(const ExperimentConfig& config, const LogFn& log) {
  config.validate();
  auto say = [&](const std::string& line) {
    if (log) log(line);
  };

  const DatasetIndex index = load_dataset(config.dataset);
  const std::size_t classes = index.classes;
  const std::vector<Sample> train_set = load_split(index, Split::train);
  const std::vector<Sample> test_set = load_split(index, Split::test);
  const bool builtin = config.provider == "builtin";

  std::vector<PixelFeatures> train_features, test_features;
  if (builtin) {
    for (const auto& s : train_set) train_features.push_back(raw_features(s.image));
    const FeatureStats stats = feature_stats(train_features);
    for (auto& f : train_features) f = standardize(std::move(f), stats);
    for (const auto& s : test_set) test_features.push_back(extract_features(s.image, stats));
  }

  const CandidatePool pool =
      make_pool(train_set, SeedsParams{config.superpixels, config.superpixel_iterations, config.superpixel_seed});
  std::filesystem::create_directories(config.out / "superpixels");
  for (std::size_t i = 0; i < pool.size(); ++i) {
    write_superpixel_map(config.out / "superpixels" / (train_set[i].name + ".ealt"), pool.superpixels[i]);
  }

  CurveWriter writer(config.out / "curves.csv", config.resume);
  std::vector<CurveRow> rows;
  auto emit = [&](CurveRow row) {
    writer.append(row);
    say(cell_label(row.strategy, row.seed, row.round) + ": labeled " + format_fixed(100.0 * row.labeled_fraction, 2) +
        "%, mean dice " + format_fixed(row.mean_dice, 4));
    rows.push_back(std::move(row));
  };

  std::optional<PrecomputedProvider> external_pool, external_test;
  if (!builtin) {
    external_pool.emplace(config.passes_dir, index.names(Split::train), classes, config.mc_passes);
    external_test.emplace(config.passes_dir, index.names(Split::test), classes, config.mc_passes);
  }

  if (builtin && config.full_reference) {
    for (std::uint64_t seed : config.seeds) {
      if (const CurveRow* done = writer.find(kFullReference, seed, 0)) {
        rows.push_back(*done);
        continue;
      }
      LabelState full(train_set);
      for (std::size_t i = 0; i < train_set.size(); ++i) full.reveal_image(i, train_set[i].labels);
      const auto data = training_data(full, train_features);
      const auto report = train(data, classes, config.learner, round_key(seed, 0));
      const auto dir = config.out / std::string(kFullReference) / ("seed" + std::to_string(seed));
      std::filesystem::create_directories(dir);
      write_tensor(dir / "model.ealt", report.model.to_tensor());
      const Evaluation ev = evaluate(report.model, test_features, test_set);
      emit({std::string(kFullReference), seed, 0, 1.0, ev.mean_dice, ev.per_class});
    }
  }

  for (Strategy strategy : config.strategies) {
    const std::string name(strategy_name(strategy));
    for (std::uint64_t seed : config.seeds) {
      const auto cell_dir = config.out / name / ("seed" + std::to_string(seed));
      std::filesystem::create_directories(cell_dir);
      auto snapshot_dir = [&](std::size_t r) { return cell_dir / ("mask_round" + std::to_string(r)); };

      try {
        // Last round whose row and mask snapshot both survived.
        std::optional<std::size_t> resumed;
        for (std::size_t r = 0; r <= config.rounds; ++r) {
          if (!writer.find(name, seed, r) || !std::filesystem::exists(snapshot_dir(r) / "state.csv")) break;
          resumed = r;
        }

        LabelState state;
        std::size_t first_round = 0;
        if (resumed) {
          state = LabelState::load(snapshot_dir(*resumed), train_set);
          for (std::size_t r = 0; r <= *resumed; ++r) rows.push_back(*writer.find(name, seed, r));
          first_round = *resumed + 1;
          say(name + " seed " + std::to_string(seed) + ": resuming after round " + std::to_string(*resumed));
        } else {
          state = sample_seed_set(train_set, config.seed_fraction, seed);
        }

        std::optional<LinearSoftmaxModel> model;
        if (builtin && resumed && first_round <= config.rounds) {
          model = train(training_data(state, train_features), classes, config.learner, round_key(seed, *resumed)).model;
        }

        for (std::size_t r = first_round; r <= config.rounds; ++r) {
          if (r > 0) {
            RoundOptions options;
            options.mc_passes = config.mc_passes;
            options.budget_pixels = round_budget(config, state, r);
            options.seed = hash_keys({seed, 0x5E1ull, r});
            SelectionResult selection;
            if (builtin) {
              const BuiltinProvider provider(*model, train_features, pass_key(seed, r - 1));
              selection = strategy_round(strategy, provider, pool, state, options);
            } else {
              selection = strategy_round(strategy, *external_pool, pool, state, options);
            }
            state = reveal(std::move(state), selection, pool.superpixels, train_set);
            write_selection_csv(cell_dir / ("selection_round" + std::to_string(r) + ".csv"), selection);
          }
          state.save(snapshot_dir(r), train_set);

          Evaluation ev;
          if (builtin) {
            model = train(training_data(state, train_features), classes, config.learner, round_key(seed, r)).model;
            write_tensor(cell_dir / ("model_round" + std::to_string(r) + ".ealt"), model->to_tensor());
            ev = evaluate(*model, test_features, test_set);
          } else {
            ev = evaluate_precomputed(*external_test, test_set, classes);
          }
          emit({name, seed, r, state.labeled_fraction(), ev.mean_dice, ev.per_class});
        }
      } catch (const Error& e) {
        throw Error(e.code(), "[" + name + ", seed " + std::to_string(seed) + "] " + e.what());
      }
    }
  }

  const auto summary = summarize(rows);
  write_summary_csv(config.out / "summary.csv", summary);
  return rows;
}

// ---------------------------------------------------------------------------
// Summary

std::vector<SummaryRow> summarize(std::span<const CurveRow> rows) {
  std::vector<std::string> strategy_order;
  std::map<std::pair<std::string, std::size_t>, std::vector<const CurveRow*>> groups;
  for (const auto& r : rows) {
    if (std::find(strategy_order.begin(), strategy_order.end(), r.strategy) == strategy_order.end()) {
      strategy_order.push_back(r.strategy);
    }
    groups[{r.strategy, r.round}].push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& strategy : strategy_order) {
    for (const auto& [key, members] : groups) {
      if (key.first != strategy) continue;
      SummaryRow s;
      s.strategy = strategy;
      s.round = key.second;
      s.seeds = members.size();
      for (const CurveRow* m : members) {
        s.labeled_fraction += m->labeled_fraction;
        s.mean_dice += m->mean_dice;
      }
      const double n = static_cast<double>(members.size());
      s.labeled_fraction /= n;
      s.mean_dice /= n;
      double var = 0.0;
      for (const CurveRow* m : members) var += (m->mean_dice - s.mean_dice) * (m->mean_dice - s.mean_dice);
      s.sd_dice = std::sqrt(var / n);
      out.push_back(s);
    }
  }
  return out;
}

std::string format_summary_table(std::span<const SummaryRow> rows) {
  std::vector<std::string> strategies;
  std::set<std::size_t> rounds;
  const SummaryRow* full = nullptr;
  for (const auto& r : rows) {
    if (r.strategy == kFullReference) {
      full = &r;
      continue;
    }
    if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end()) strategies.push_back(r.strategy);
    rounds.insert(r.round);
  }
  auto cell = [](const SummaryRow& r) { return format_fixed(r.mean_dice, 3) + " +- " + format_fixed(r.sd_dice, 3); };
  auto pad = [](std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
  };

  constexpr std::size_t first_col = 10;
  constexpr std::size_t col = 18;
  std::ostringstream out;
  out << pad("GT(%)", first_col);
  for (const auto& s : strategies) out << pad(s, col);
  out << '\n';
  for (std::size_t round : rounds) {
    double fraction = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.round == round && r.strategy != kFullReference) {
        fraction += r.labeled_fraction;
        ++n;
      }
    }
    out << pad(format_fixed(100.0 * fraction / static_cast<double>(n), 1) + "%", first_col);
    for (const auto& s : strategies) {
      const auto it = std::find_if(rows.begin(), rows.end(),
                                   [&](const SummaryRow& r) { return r.strategy == s && r.round == round; });
      out << pad(it == rows.end() ? "-" : cell(*it), col);
    }
    out << '\n';
  }
  if (full) out << pad("100%", first_col) << "full labels: " << cell(*full) << '\n';
  return out.str();
}

void write_summary_csv(const std::filesystem::path& path, std::span<const SummaryRow> rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << "strategy,round,labeled_fraction,mean_dice,sd_dice,seeds\n";
  for (const auto& r : rows) {
    const std::vector<std::string> fields = {r.strategy, std::to_string(r.round), format_fixed(r.labeled_fraction, 6),
                                             format_fixed(r.mean_dice, 6), format_fixed(r.sd_dice, 6),
                                             std::to_string(r.seeds)};
    out << csv_line(fields);
  }
}

}  // namespace edgeal
