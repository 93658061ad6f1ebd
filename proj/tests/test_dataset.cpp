#include <doctest.h>

#include <fstream>

#include "edgeal/dataset.hpp"
#include "edgeal/error.hpp"
#include "edgeal/experiment.hpp"
#include "edgeal/tensor.hpp"
#include "support/oracles.hpp"

using namespace edgeal;

namespace {

void write_sample(const std::filesystem::path& root, const std::string& name, std::vector<std::uint8_t> labels,
                  std::uint32_t h = 2, std::uint32_t w = 2) {
  std::filesystem::create_directories(root / "images");
  std::filesystem::create_directories(root / "labels");
  write_tensor(root / "images" / (name + ".ealt"), Tensor::from_u8({h, w}, std::vector<std::uint8_t>(h * w, 9)));
  write_tensor(root / "labels" / (name + ".ealt"), Tensor::from_u8({h, w}, std::move(labels)));
}

void write_splits(const std::filesystem::path& root, const std::string& text) {
  std::ofstream(root / "splits.txt") << text;
}

ErrorCode code_of(const std::filesystem::path& root) {
  try {
    load_dataset(root);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("dataset accepted");
  return ErrorCode::state;
}

}  // namespace

TEST_CASE("three-sample synthetic set indexes with three classes") {
  oracle::TempDir dir("ds3");
  SyntheticSpec spec;
  spec.images = 3;
  const DatasetIndex index = generate_synthetic(dir.path(), spec);
  CHECK(index.classes == 3);
  std::size_t total = 0;
  for (auto s : {Split::train, Split::val, Split::test}) total += index.names(s).size();
  CHECK(total == 3);
  CHECK(!index.names(Split::train).empty());
  CHECK(!index.names(Split::test).empty());
}

TEST_CASE("hand-made dataset loads with inferred class count") {
  oracle::TempDir dir("dsok");
  write_sample(dir.path(), "a", {0, 1, 1, 0});
  write_sample(dir.path(), "b", {0, 0, 4, 0});
  write_splits(dir.path(), "train\ta\ntest\tb\n");
  const auto index = load_dataset(dir.path());
  CHECK(index.classes == 5);
  CHECK(index.names(Split::val).empty());
  const auto samples = load_split(index, Split::train);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].image(0, 0) == doctest::Approx(9.0 / 255.0));
}

TEST_CASE("dataset errors") {
  oracle::TempDir dir("dserr");
  write_sample(dir.path(), "a", {0, 1, 1, 0});
  write_sample(dir.path(), "b", {0, 1, 1, 0});

  SUBCASE("unknown split") {
    write_splits(dir.path(), "train\ta\nholdout\tb\n");
    CHECK(code_of(dir.path()) == ErrorCode::format);
  }
  SUBCASE("duplicate name") {
    write_splits(dir.path(), "train\ta\ntest\ta\n");
    CHECK(code_of(dir.path()) == ErrorCode::format);
  }
  SUBCASE("empty test split") {
    write_splits(dir.path(), "train\ta\ntrain\tb\n");
    CHECK(code_of(dir.path()) == ErrorCode::invalid_argument);
  }
  SUBCASE("missing file") {
    write_splits(dir.path(), "train\ta\ntest\tzzz\n");
    CHECK(code_of(dir.path()) == ErrorCode::io);
  }
  SUBCASE("reserved label value") {
    write_sample(dir.path(), "b", {0, 255, 1, 0});
    write_splits(dir.path(), "train\ta\ntest\tb\n");
    CHECK(code_of(dir.path()) == ErrorCode::range);
  }
  SUBCASE("label and image dims differ") {
    write_tensor(dir / "labels/b.ealt", Tensor::from_u8({1, 4}, {0, 1, 1, 0}));
    write_splits(dir.path(), "train\ta\ntest\tb\n");
    CHECK(code_of(dir.path()) == ErrorCode::dimension);
  }
  SUBCASE("single class") {
    write_sample(dir.path(), "a", {0, 0, 0, 0});
    write_sample(dir.path(), "b", {0, 0, 0, 0});
    write_splits(dir.path(), "train\ta\ntest\tb\n");
    CHECK(code_of(dir.path()) == ErrorCode::range);
  }
  SUBCASE("no splits file") { CHECK(code_of(dir.path()) == ErrorCode::io); }
}
