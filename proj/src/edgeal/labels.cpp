#include "edgeal/labels.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "edgeal/error.hpp"
#include "edgeal/rng.hpp"

namespace edgeal {

LabelState::LabelState(std::span<const Sample> pool) {
  masks_.reserve(pool.size());
  for (const auto& s : pool) {
    masks_.emplace_back(s.labels.height(), s.labels.width(), kUnlabeled);
    total_pixels_ += s.labels.size();
  }
}

LabeledMask LabelState::labeled(std::size_t image) const {
  const ClassMap& m = mask(image);
  LabeledMask out(m.height(), m.width(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] != kUnlabeled ? 1 : 0;
  return out;
}

std::size_t LabelState::unlabeled_count(std::size_t image) const {
  const ClassMap& m = mask(image);
  return static_cast<std::size_t>(std::count(m.values().begin(), m.values().end(), kUnlabeled));
}

double LabelState::labeled_fraction() const noexcept {
  return total_pixels_ == 0 ? 0.0 : static_cast<double>(revealed_pixels_) / static_cast<double>(total_pixels_);
}

void LabelState::reveal_image(std::size_t image, const ClassMap& truth) {
  std::vector<std::size_t> all(truth.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  reveal_pixels(image, all, truth);
}

std::size_t LabelState::reveal_pixels(std::size_t image, std::span<const std::size_t> pixels, const ClassMap& truth) {
  ClassMap& m = masks_.at(image);
  if (!m.same_shape(truth)) fail(ErrorCode::dimension, "reveal: ground truth dims differ for image " + std::to_string(image));
  std::size_t fresh = 0;
  for (std::size_t i : pixels) {
    if (m[i] == kUnlabeled) ++fresh;
    m[i] = truth[i];
  }
  revealed_pixels_ += fresh;
  return fresh;
}

void LabelState::mark_seed() {
  seed_pixels_ = revealed_pixels_;
  seed_images_ = 0;
  for (std::size_t i = 0; i < masks_.size(); ++i) {
    if (unlabeled_count(i) == 0) ++seed_images_;
  }
}

void LabelState::record_round(std::size_t pixels_revealed) {
  history_.push_back({history_.size() + 1, pixels_revealed, labeled_fraction()});
}

void LabelState::save(const std::filesystem::path& dir, std::span<const Sample> pool) const {
  if (pool.size() != masks_.size()) fail(ErrorCode::invalid_argument, "save: pool size differs from label state");
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < masks_.size(); ++i) {
    write_tensor(dir / (pool[i].name + ".ealt"), to_tensor(masks_[i]));
  }
  // state.csv last: its presence marks a complete snapshot.
  const auto tmp = dir / "state.csv.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write " + tmp.string());
    out << "key,value\n";
    out << "total_pixels," << total_pixels_ << "\n";
    out << "revealed_pixels," << revealed_pixels_ << "\n";
    out << "seed_pixels," << seed_pixels_ << "\n";
    out << "seed_images," << seed_images_ << "\n";
    for (const auto& h : history_) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "round%zu,%zu;%.17g\n", h.round, h.pixels_revealed, h.fraction);
      out << buf;
    }
  }
  std::filesystem::rename(tmp, dir / "state.csv");
}

LabelState LabelState::load(const std::filesystem::path& dir, std::span<const Sample> pool) {
  std::ifstream in(dir / "state.csv");
  if (!in) fail(ErrorCode::io, "missing snapshot " + (dir / "state.csv").string());

  LabelState state(pool);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    ClassMap m = class_map_from_tensor(read_tensor(dir / (pool[i].name + ".ealt")));
    if (!m.same_shape(pool[i].labels)) fail(ErrorCode::dimension, "mask dims differ for " + pool[i].name);
    for (std::size_t p = 0; p < m.size(); ++p) {
      if (m[p] != kUnlabeled && m[p] != pool[i].labels[p]) {
        fail(ErrorCode::state, "mask for " + pool[i].name + " disagrees with ground truth");
      }
    }
    state.masks_[i] = std::move(m);
  }
  std::size_t counted = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) counted += pool[i].labels.size() - state.unlabeled_count(i);

  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    const std::string key = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    if (key == "revealed_pixels") state.revealed_pixels_ = std::stoull(value);
    else if (key == "seed_pixels") state.seed_pixels_ = std::stoull(value);
    else if (key == "seed_images") state.seed_images_ = std::stoull(value);
    else if (key.rfind("round", 0) == 0) {
      const auto semi = value.find(';');
      RoundRecord r;
      r.round = std::stoull(key.substr(5));
      r.pixels_revealed = std::stoull(value.substr(0, semi));
      r.fraction = std::stod(value.substr(semi + 1));
      state.history_.push_back(r);
    }
  }
  if (counted != state.revealed_pixels_) fail(ErrorCode::state, "snapshot counters disagree with masks in " + dir.string());
  return state;
}

LabelState sample_seed_set(std::span<const Sample> pool, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    fail(ErrorCode::invalid_argument, "seed fraction must lie in (0, 1)");
  }
  if (pool.empty()) fail(ErrorCode::invalid_argument, "seed set: pool is empty, fraction yields zero images");

  LabelState state(pool);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(hash_keys({seed, 0x5EEDull}));
  rng.shuffle(order);

  const double target = fraction * static_cast<double>(state.total_pixels());
  for (std::size_t idx : order) {
    // Tolerance keeps e.g. 0.02 of 50 equal images at exactly one image.
    if (static_cast<double>(state.revealed_pixels()) + 1e-6 >= target) break;
    state.reveal_image(idx, pool[idx].labels);
  }
  state.mark_seed();
  if (state.seed_images() == 0) fail(ErrorCode::invalid_argument, "seed fraction yields zero images");
  return state;
}

LabelState reveal(LabelState state, const SelectionResult& selection, std::span<const SuperpixelMap> superpixels,
                  std::span<const Sample> pool) {
  if (superpixels.size() != state.image_count() || pool.size() != state.image_count()) {
    fail(ErrorCode::invalid_argument, "reveal: pool size differs from label state");
  }
  std::size_t fresh = 0;
  for (const auto& r : selection.regions) {
    if (r.image_id >= state.image_count()) fail(ErrorCode::range, "reveal: image id out of range");
    const SuperpixelMap& sp = superpixels[r.image_id];
    if (r.region_id >= sp.region_count) fail(ErrorCode::range, "reveal: region id out of range");
    std::vector<std::size_t> pixels;
    for (std::size_t i = 0; i < sp.labels.size(); ++i) {
      if (sp.labels[i] == r.region_id) pixels.push_back(i);
    }
    const std::size_t added = state.reveal_pixels(r.image_id, pixels, pool[r.image_id].labels);
    if (added == 0) {
      fail(ErrorCode::state, "reveal: region " + std::to_string(r.region_id) + " of image " +
                                 std::to_string(r.image_id) + " is already fully labeled");
    }
    fresh += added;
  }
  if (!selection.regions.empty()) state.record_round(fresh);
  return state;
}

}  // namespace edgeal
