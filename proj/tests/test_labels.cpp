#include <doctest.h>

#include <random>

#include "edgeal/error.hpp"
#include "edgeal/labels.hpp"
#include "edgeal/superpixels.hpp"
#include "support/frozen_values.hpp"
#include "support/oracles.hpp"

using namespace edgeal;

namespace {

std::vector<Sample> make_pool(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> cls(0, 2);
  std::vector<Sample> pool;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.name = "p" + std::to_string(i);
    s.image = oracle::random_image(gen, h, w);
    s.labels = ClassMap(h, w);
    for (auto& v : s.labels.values()) v = static_cast<std::uint8_t>(cls(gen));
    pool.push_back(std::move(s));
  }
  return pool;
}

std::size_t count_revealed(const LabelState& st) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < st.image_count(); ++i)
    for (auto v : st.mask(i).values()) n += v != kUnlabeled;
  return n;
}

SelectionResult selection_of(std::vector<std::pair<std::size_t, std::size_t>> regions) {
  SelectionResult s;
  for (auto [img, r] : regions) {
    RegionScore rs;
    rs.image_id = img;
    rs.region_id = r;
    s.regions.push_back(rs);
  }
  return s;
}

}  // namespace

TEST_CASE("seed set: whole images, deterministic, reaches the fraction") {
  const auto pool = make_pool(24, 64, 64, 1);
  const auto a = sample_seed_set(pool, 0.02, 5);
  CHECK(a.seed_images() == 1);
  CHECK(a.labeled_fraction() == doctest::Approx(frozen::kDefaultSeedFraction));
  CHECK(count_revealed(a) == a.revealed_pixels());
  const auto b = sample_seed_set(pool, 0.02, 5);
  for (std::size_t i = 0; i < pool.size(); ++i) CHECK(a.mask(i) == b.mask(i));

  // Forty images as a single pool: one image is 2.5% of the pixels.
  const auto forty = make_pool(40, 8, 8, 2);
  CHECK(sample_seed_set(forty, 0.02, 1).labeled_fraction() == doctest::Approx(0.025));
  // A fraction covering exactly one image picks exactly one.
  const auto fifty = make_pool(50, 4, 4, 3);
  CHECK(sample_seed_set(fifty, 0.02, 9).seed_images() == 1);

  const auto c = sample_seed_set(pool, 0.3, 5);
  CHECK(c.labeled_fraction() >= 0.3);
  CHECK(c.labeled_fraction() - 1.0 / 24 < 0.3);

  CHECK_THROWS_AS(sample_seed_set(pool, 0.0, 1), Error);
  CHECK_THROWS_AS(sample_seed_set(pool, 1.0, 1), Error);
  CHECK_THROWS_AS(sample_seed_set(std::span<const Sample>{}, 0.5, 1), Error);
}

TEST_CASE("reveal copies ground truth and counts new pixels") {
  const auto pool = make_pool(2, 6, 10, 4);
  // Two 30-pixel regions in image 0: left and right halves.
  std::vector<SuperpixelMap> sps(2, grid_partition(6, 10, 2));
  REQUIRE(region_pixels(sps[0], 0).size() == 30);
  LabelState st(pool);
  st = reveal(std::move(st), selection_of({{0, 0}, {0, 1}}), sps, pool);
  CHECK(st.revealed_pixels() == 60);
  CHECK(st.mask(0) == pool[0].labels);
  CHECK(count_revealed(st) == 60);
  REQUIRE(st.history().size() == 1);
  CHECK(st.history()[0].pixels_revealed == 60);

  const auto before = st.revealed_pixels();
  st = reveal(std::move(st), SelectionResult{}, sps, pool);
  CHECK(st.revealed_pixels() == before);
  CHECK(st.history().size() == 1);

  CHECK_THROWS_AS(reveal(st, selection_of({{0, 1}}), sps, pool), Error);
  CHECK_THROWS_AS(reveal(st, selection_of({{1, 7}}), sps, pool), Error);
  CHECK_THROWS_AS(reveal(st, selection_of({{5, 0}}), sps, pool), Error);
}

TEST_CASE("history increments sum to revealed minus seed pixels") {
  const auto pool = make_pool(6, 8, 8, 5);
  std::vector<SuperpixelMap> sps(6, grid_partition(8, 8, 4));
  LabelState st = sample_seed_set(pool, 0.1, 3);
  std::size_t unlabeled_before = st.total_pixels() - st.revealed_pixels();
  for (std::size_t img = 0; img < 6; ++img) {
    if (st.unlabeled_count(img) == 0) continue;
    st = reveal(std::move(st), selection_of({{img, img % 4}}), sps, pool);
    const std::size_t unlabeled = st.total_pixels() - st.revealed_pixels();
    CHECK(unlabeled <= unlabeled_before);
    unlabeled_before = unlabeled;
  }
  std::size_t sum = 0;
  double last = 0;
  for (const auto& h : st.history()) {
    sum += h.pixels_revealed;
    CHECK(h.fraction >= last);
    last = h.fraction;
  }
  CHECK(sum == st.revealed_pixels() - st.seed_pixels());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t p = 0; p < pool[i].labels.size(); ++p) {
      const auto v = st.mask(i)[p];
      if (v != kUnlabeled) CHECK(v == pool[i].labels[p]);
    }
  }
}

TEST_CASE("label state persists and restores") {
  oracle::TempDir dir("labels");
  const auto pool = make_pool(3, 8, 8, 6);
  std::vector<SuperpixelMap> sps(3, grid_partition(8, 8, 4));
  LabelState st = sample_seed_set(pool, 0.2, 2);
  std::size_t other = st.unlabeled_count(0) ? 0 : 1;
  st = reveal(std::move(st), selection_of({{other, 2}}), sps, pool);
  st.save(dir.path(), pool);
  CHECK(std::filesystem::exists(dir / "p0.ealt"));
  const auto back = LabelState::load(dir.path(), pool);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back.mask(i) == st.mask(i));
  CHECK(back.revealed_pixels() == st.revealed_pixels());
  CHECK(back.seed_pixels() == st.seed_pixels());
  REQUIRE(back.history().size() == st.history().size());
  CHECK(back.history()[0].pixels_revealed == st.history()[0].pixels_revealed);

  // A tampered mask is rejected.
  auto tampered = read_tensor(dir / "p2.ealt");
  std::vector<std::uint8_t> data(tampered.u8().begin(), tampered.u8().end());
  data[0] = data[0] == kUnlabeled ? static_cast<std::uint8_t>((pool[2].labels[0] + 1) % 3)
                                  : static_cast<std::uint8_t>((data[0] + 1) % 3);
  write_tensor(dir / "p2.ealt", Tensor::from_u8({8, 8}, data));
  CHECK_THROWS_AS(LabelState::load(dir.path(), pool), Error);
  CHECK_THROWS_AS(LabelState::load(dir / "nowhere", pool), Error);
}
