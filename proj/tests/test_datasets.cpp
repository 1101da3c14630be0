#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>

#include "zae/core.hpp"
#include "zae/datasets.hpp"

namespace fs = std::filesystem;
using zae::DataMatrix;

namespace {

bool exactly_equal(const DataMatrix& a, const DataMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}


fs::path temp_file(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "zae_test_datasets";
  fs::create_directories(dir);
  return dir / name;
}

void write_cifar_records(const fs::path& path, const std::vector<std::uint8_t>& labels,
                         std::uint8_t fill_base = 0) {
  std::ofstream os(path, std::ios::binary);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    os.put(static_cast<char>(labels[r]));
    for (int j = 0; j < 3072; ++j) {
      os.put(static_cast<char>(static_cast<std::uint8_t>(fill_base + r + (j % 251))));
    }
  }
}

}  // namespace

TEST_CASE("load_cifar10 parses well-formed records") {
  auto path = temp_file("two.bin");
  {
    std::ofstream os(path, std::ios::binary);
    os.put(3);
    os.put(static_cast<char>(255));           // first pixel -> 1.0
    for (int j = 1; j < 3072; ++j) os.put(0);  // rest -> 0.0
    os.put(9);
    for (int j = 0; j < 3072; ++j) os.put(static_cast<char>(51));  // 51/255 = 0.2
  }
  zae::LabeledImageSet set = zae::load_cifar10({path.string()});
  REQUIRE(set.images.rows() == 2);
  REQUIRE(set.images.cols() == 3072);
  CHECK(set.labels == std::vector<int>{3, 9});
  CHECK(set.images(0, 0) == 1.0);
  CHECK(set.images(0, 1) == 0.0);
  CHECK(set.images(1, 100) == Catch::Approx(0.2));
  CHECK(set.height == 32);
  CHECK(set.width == 32);
  CHECK(set.channels == 3);
}

TEST_CASE("load_cifar10 reports truncation with the byte offset") {
  auto path = temp_file("short.bin");
  {
    std::ofstream os(path, std::ios::binary);
    for (int j = 0; j < 3072; ++j) os.put(1);  // one byte short of a record
  }
  CHECK_THROWS_WITH(zae::load_cifar10({path.string()}),
                    Catch::Matchers::ContainsSubstring("truncated record at offset 0"));

  auto path2 = temp_file("short2.bin");
  write_cifar_records(path2, {1});
  {
    std::ofstream os(path2, std::ios::binary | std::ios::app);
    os.put(2);
    os.put(7);  // second record cut off
  }
  CHECK_THROWS_WITH(zae::load_cifar10({path2.string()}),
                    Catch::Matchers::ContainsSubstring("offset 3073"));
}

TEST_CASE("load_cifar10 rejects out-of-range labels") {
  auto path = temp_file("badlabel.bin");
  write_cifar_records(path, {11});
  CHECK_THROWS_AS(zae::load_cifar10({path.string()}), zae::parse_error);
}

TEST_CASE("center crop at full size is the identity") {
  auto path = temp_file("full.bin");
  write_cifar_records(path, {0, 1, 2});
  zae::LabeledImageSet set = zae::load_cifar10({path.string()});
  zae::LabeledImageSet crop = zae::crop_center_patches(set, 32);
  CHECK(exactly_equal(crop.images, set.images));
  CHECK(crop.labels == set.labels);
}

TEST_CASE("center crop picks the central block") {
  zae::LabeledImageSet set;
  set.height = 4;
  set.width = 4;
  set.channels = 1;
  set.labels = {5};
  set.images.resize(1, 16);
  for (int j = 0; j < 16; ++j) set.images(0, j) = j;  // value = y*4 + x

  zae::LabeledImageSet crop = zae::crop_center_patches(set, 2);
  REQUIRE(crop.images.cols() == 4);
  // Central 2x2 block: rows/cols {1,2}.
  CHECK(crop.images(0, 0) == 5.0);
  CHECK(crop.images(0, 1) == 6.0);
  CHECK(crop.images(0, 2) == 9.0);
  CHECK(crop.images(0, 3) == 10.0);
  CHECK(crop.labels == std::vector<int>{5});
}

TEST_CASE("center crop supports the full evaluation range of patch sizes") {
  auto path = temp_file("sizes.bin");
  write_cifar_records(path, {0, 1});
  zae::LabeledImageSet set = zae::load_cifar10({path.string()});
  for (int p : {10, 15, 20, 25, 32}) {
    zae::LabeledImageSet crop = zae::crop_center_patches(set, p);
    CHECK(crop.images.cols() == 3 * p * p);
  }
  CHECK_THROWS_AS(zae::crop_center_patches(set, 33), std::invalid_argument);
}

TEST_CASE("center crop rows are exact sub-slices of the source") {
  auto path = temp_file("slices.bin");
  write_cifar_records(path, {4}, 17);
  zae::LabeledImageSet set = zae::load_cifar10({path.string()});
  zae::LabeledImageSet crop = zae::crop_center_patches(set, 11);
  int y0 = (32 - 11) / 2, x0 = (32 - 11) / 2;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 11; ++y)
      for (int x = 0; x < 11; ++x)
        CHECK(crop.images(0, c * 121 + y * 11 + x) ==
              set.images(0, c * 1024 + (y0 + y) * 32 + (x0 + x)));
}

TEST_CASE("random patches are deterministic per seed") {
  auto path = temp_file("rand.bin");
  write_cifar_records(path, {0, 1, 2, 3});
  zae::LabeledImageSet set = zae::load_cifar10({path.string()});
  DataMatrix a = zae::sample_random_patches(set, 6, 50, 77);
  DataMatrix b = zae::sample_random_patches(set, 6, 50, 77);
  DataMatrix c = zae::sample_random_patches(set, 6, 50, 78);
  CHECK(exactly_equal(a, b));
  CHECK(!exactly_equal(a, c));

  DataMatrix empty = zae::sample_random_patches(set, 6, 0, 1);
  CHECK(empty.rows() == 0);
  CHECK(empty.cols() == 3 * 36);
}

TEST_CASE("random patch origins are uniform (chi-square)") {
  // One 10x10 single-channel image whose pixel value encodes its position,
  // so each patch's first entry recovers the window origin.
  zae::LabeledImageSet set;
  set.height = 10;
  set.width = 10;
  set.channels = 1;
  set.labels = {0};
  set.images.resize(1, 100);
  for (int j = 0; j < 100; ++j) set.images(0, j) = j;

  const int p = 6;
  const int cells = 5 * 5;
  DataMatrix patches = zae::sample_random_patches(set, p, 10000, 2024);
  std::vector<int> counts(cells, 0);
  for (Eigen::Index i = 0; i < patches.rows(); ++i) {
    int origin = static_cast<int>(patches(i, 0));
    int y0 = origin / 10, x0 = origin % 10;
    REQUIRE(y0 <= 4);
    REQUIRE(x0 <= 4);
    ++counts[y0 * 5 + x0];
  }
  double expected = 10000.0 / cells;
  double stat = 0.0;
  for (int count : counts) stat += (count - expected) * (count - expected) / expected;
  // chi-square 0.999 quantile at df=24
  CHECK(stat < 51.17859777737739);
}

TEST_CASE("rotating dots with angle zero repeat the first frame") {
  zae::VideoSet set = zae::gen_rotating_dots(4, 5, 13, 16, 0.0, 31);
  REQUIRE(set.videos.rows() == 4);
  REQUIRE(set.videos.cols() == 5 * 13 * 13);
  for (int v = 0; v < 4; ++v) {
    for (int t = 1; t < 5; ++t) {
      for (int j = 0; j < 169; ++j) {
        CHECK(set.videos(v, t * 169 + j) == set.videos(v, j));
      }
    }
  }
}

TEST_CASE("a quarter turn moves a dot from (r,0) to (0,r)") {
  const int s = 13;
  const double center = (s - 1) / 2.0;
  Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(s, s);
  zae::splat_dot(frame, center + 3.0, center);  // offset (3, 0) in (row, col)

  Eigen::MatrixXd rotated = zae::rotate_frame(frame, M_PI / 2.0);
  for (int r = 0; r < s; ++r) {
    for (int c = 0; c < s; ++c) {
      double expect = (r == static_cast<int>(center) && c == static_cast<int>(center) + 3) ? 1.0 : 0.0;
      CHECK(std::abs(rotated(r, c) - expect) <= 1e-6);
    }
  }
}

TEST_CASE("rotation approximately preserves mass away from the boundary") {
  const int s = 13;
  zae::Rng rng(5);
  Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(s, s);
  for (int d = 0; d < 8; ++d) {
    // keep dots >= 2 pixels from the boundary
    zae::splat_dot(frame, rng.uniform(2.0, s - 3.0), rng.uniform(2.0, s - 3.0));
  }
  double mass = frame.sum();
  for (double angle : {0.13, 0.5, 1.1, 2.7}) {
    double rotated_mass = zae::rotate_frame(frame, angle).sum();
    CHECK(std::abs(rotated_mass - mass) <= 0.02 * mass);
  }
}

TEST_CASE("rotating dots default configuration and determinism") {
  zae::VideoSet a = zae::gen_rotating_dots(3, 10, 13, 16, std::nullopt, 9);
  zae::VideoSet b = zae::gen_rotating_dots(3, 10, 13, 16, std::nullopt, 9);
  CHECK(exactly_equal(a.videos, b.videos));
  CHECK(a.frames == 10);
  CHECK(a.frame_size == 13);
  CHECK(std::isnan(a.rotation_angle));
  CHECK(a.videos.minCoeff() >= 0.0);
  CHECK(a.videos.maxCoeff() <= 1.0);
  CHECK_THROWS_AS(zae::gen_rotating_dots(0, 10, 13, 16, std::nullopt, 9), std::invalid_argument);
}

TEST_CASE("videoset save/load round-trips through the sidecar") {
  zae::VideoSet set = zae::gen_rotating_dots(2, 4, 9, 8, 0.4, 12);
  auto path = temp_file("vids.zmat");
  zae::save_videoset(path, set);
  zae::VideoSet back = zae::load_videoset(path);
  CHECK(exactly_equal(back.videos, set.videos));
  CHECK(back.frames == 4);
  CHECK(back.frame_size == 9);
  CHECK(back.rotation_angle == 0.4);
}
