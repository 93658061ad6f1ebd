#include "edgeal/dataset.hpp"

#include <fstream>
#include <set>

#include "edgeal/error.hpp"

namespace edgeal {

std::string_view split_name(Split s) noexcept {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

std::filesystem::path image_path(const DatasetIndex& index, const std::string& name) {
  return index.root / "images" / (name + ".ealt");
}

std::filesystem::path label_path(const DatasetIndex& index, const std::string& name) {
  return index.root / "labels" / (name + ".ealt");
}

namespace {

Sample read_sample(const DatasetIndex& index, const std::string& name) {
  const auto img_file = image_path(index, name);
  const auto lbl_file = label_path(index, name);
  if (!std::filesystem::exists(img_file)) fail(ErrorCode::io, "missing file: " + img_file.string());
  if (!std::filesystem::exists(lbl_file)) fail(ErrorCode::io, "missing file: " + lbl_file.string());

  Sample s;
  s.name = name;
  s.image = image_from_tensor(read_tensor(img_file));
  s.labels = class_map_from_tensor(read_tensor(lbl_file));
  if (!s.labels.same_shape(s.image)) {
    fail(ErrorCode::dimension, "sample " + name + ": label dims " + std::to_string(s.labels.height()) +
                                   "x" + std::to_string(s.labels.width()) + " differ from image dims " +
                                   std::to_string(s.image.height()) + "x" +
                                   std::to_string(s.image.width()));
  }
  return s;
}

}  // namespace

DatasetIndex load_dataset(const std::filesystem::path& root) {
  DatasetIndex index;
  index.root = root;

  const auto splits_file = root / "splits.txt";
  std::ifstream in(splits_file);
  if (!in) fail(ErrorCode::io, "missing file: " + splits_file.string());

  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorCode::format, splits_file.string() + ":" + std::to_string(line_no) + ": expected <split>\\t<name>");
    }
    const std::string split = line.substr(0, tab);
    const std::string name = line.substr(tab + 1);
    Split s;
    if (split == "train") s = Split::train;
    else if (split == "val") s = Split::val;
    else if (split == "test") s = Split::test;
    else fail(ErrorCode::format, splits_file.string() + ":" + std::to_string(line_no) + ": unknown split '" + split + "'");
    if (name.empty()) fail(ErrorCode::format, splits_file.string() + ":" + std::to_string(line_no) + ": empty name");
    if (!seen.insert(name).second) fail(ErrorCode::format, "sample listed twice in splits: " + name);
    index.splits[static_cast<int>(s)].push_back(name);
  }

  for (Split s : {Split::train, Split::test}) {
    if (index.names(s).empty()) fail(ErrorCode::invalid_argument, "empty split: " + std::string(split_name(s)));
  }

  int max_label = -1;
  for (const auto& names : index.splits) {
    for (const auto& name : names) {
      const Sample sample = read_sample(index, name);
      for (std::uint8_t v : sample.labels.values()) {
        if (v == 255) fail(ErrorCode::range, "sample " + name + ": label value 255 is reserved");
        max_label = std::max<int>(max_label, v);
      }
    }
  }
  index.classes = static_cast<std::size_t>(max_label + 1);
  if (index.classes < 2) fail(ErrorCode::range, "dataset needs at least 2 classes, labels contain 1");
  return index;
}

Sample load_sample(const DatasetIndex& index, const std::string& name) {
  Sample s = read_sample(index, name);
  for (std::uint8_t v : s.labels.values()) {
    if (v >= index.classes) fail(ErrorCode::range, "sample " + name + ": label out of range");
  }
  return s;
}

std::vector<Sample> load_split(const DatasetIndex& index, Split s) {
  std::vector<Sample> out;
  for (const auto& name : index.names(s)) out.push_back(load_sample(index, name));
  return out;
}

}  // namespace edgeal
