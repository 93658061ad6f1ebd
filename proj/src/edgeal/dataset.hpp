#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "edgeal/maps.hpp"

namespace edgeal {

enum class Split { train = 0, val = 1, test = 2 };

std::string_view split_name(Split s) noexcept;

// Validated view of a dataset directory:
//   root/images/<name>.ealt   rank-2 image (u8 or f32)
//   root/labels/<name>.ealt   rank-2 u8 class ids
//   root/splits.txt           "<split>\t<name>" per line
struct DatasetIndex {
  std::filesystem::path root;
  std::array<std::vector<std::string>, 3> splits;
  std::size_t classes = 0;

  const std::vector<std::string>& names(Split s) const { return splits[static_cast<int>(s)]; }
};

struct Sample {
  std::string name;
  Image image;
  ClassMap labels;
};

DatasetIndex load_dataset(const std::filesystem::path& root);

std::filesystem::path image_path(const DatasetIndex& index, const std::string& name);
std::filesystem::path label_path(const DatasetIndex& index, const std::string& name);

Sample load_sample(const DatasetIndex& index, const std::string& name);
std::vector<Sample> load_split(const DatasetIndex& index, Split s);

}  // namespace edgeal
