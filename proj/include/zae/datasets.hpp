#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "zae/core.hpp"

namespace zae {

/// Images flattened channel-major: row = [R plane, G plane, B plane], each
/// plane height*width in row-major scan order.
struct LabeledImageSet {
  DataMatrix images;  // N x (channels*height*width)
  std::vector<int> labels;
  int height = 0;
  int width = 0;
  int channels = 0;
};

/// Vectorized videos: row = frames concatenated, each frame_size x frame_size
/// in row-major scan order. rotation_angle is radians per frame; NaN when the
/// angle varies per video.
struct VideoSet {
  DataMatrix videos;  // N x (frames*frame_size*frame_size)
  int frames = 0;
  int frame_size = 0;
  double rotation_angle = 0.0;
};

// ---------------------------------------------------------------------------
// CIFAR-10 binary batches: records of 1 label byte + 3072 pixel bytes
// (channel-major R,G,B planes of 32x32). Pixels are scaled to [0,1].
// ---------------------------------------------------------------------------

inline LabeledImageSet load_cifar10(const std::vector<std::string>& paths) {
  constexpr int kRecord = 3073;
  constexpr int kPixels = 3072;

  LabeledImageSet set;
  set.height = 32;
  set.width = 32;
  set.channels = 3;

  std::vector<std::vector<double>> rows;
  for (const auto& path : paths) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw parse_error("cannot open: " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    std::size_t offset = 0;
    while (offset < bytes.size()) {
      if (bytes.size() - offset < kRecord) {
        throw parse_error(path + ": truncated record at offset " + std::to_string(offset));
      }
      int label = static_cast<unsigned char>(bytes[offset]);
      if (label > 9) {
        throw parse_error(path + ": label " + std::to_string(label) + " out of range at offset " +
                          std::to_string(offset));
      }
      set.labels.push_back(label);
      std::vector<double> row(kPixels);
      for (int j = 0; j < kPixels; ++j) {
        row[j] = static_cast<unsigned char>(bytes[offset + 1 + j]) / 255.0;
      }
      rows.push_back(std::move(row));
      offset += kRecord;
    }
  }

  set.images.resize(static_cast<Eigen::Index>(rows.size()), kPixels);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < kPixels; ++j) set.images(static_cast<Eigen::Index>(i), j) = rows[i][j];
  }
  return set;
}

namespace detail {
inline void copy_patch(const DataMatrix& src, Eigen::Index row, int channels, int h, int w,
                       int y0, int x0, int p, DataMatrix& dst, Eigen::Index dst_row) {
  Eigen::Index out = 0;
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < p; ++y) {
      for (int x = 0; x < p; ++x) {
        dst(dst_row, out++) = src(row, static_cast<Eigen::Index>(c) * h * w +
                                           static_cast<Eigen::Index>(y0 + y) * w + (x0 + x));
      }
    }
  }
}
}  // namespace detail

/// Centered P x P crop of every image; labels carry over. The window origin
/// is floor((H-P)/2), floor((W-P)/2).
inline LabeledImageSet crop_center_patches(const LabeledImageSet& set, int p) {
  if (p <= 0 || p > set.height || p > set.width) {
    throw std::invalid_argument("crop_center_patches: patch size " + std::to_string(p) +
                                " does not fit in " + std::to_string(set.height) + "x" +
                                std::to_string(set.width));
  }
  const int y0 = (set.height - p) / 2;
  const int x0 = (set.width - p) / 2;

  LabeledImageSet out;
  out.height = p;
  out.width = p;
  out.channels = set.channels;
  out.labels = set.labels;
  out.images.resize(set.images.rows(), static_cast<Eigen::Index>(set.channels) * p * p);
  for (Eigen::Index i = 0; i < set.images.rows(); ++i) {
    detail::copy_patch(set.images, i, set.channels, set.height, set.width, y0, x0, p, out.images, i);
  }
  return out;
}

/// Uniformly random P x P windows from random images; deterministic per seed.
inline DataMatrix sample_random_patches(const LabeledImageSet& set, int p, int count,
                                        std::uint64_t seed) {
  if (p <= 0 || p > set.height || p > set.width) {
    throw std::invalid_argument("sample_random_patches: patch size does not fit");
  }
  if (count < 0) throw std::invalid_argument("sample_random_patches: negative count");
  if (set.images.rows() == 0 && count > 0) {
    throw std::invalid_argument("sample_random_patches: empty image set");
  }

  DataMatrix out(count, static_cast<Eigen::Index>(set.channels) * p * p);
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    auto img = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(set.images.rows())));
    int y0 = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(set.height - p + 1)));
    int x0 = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(set.width - p + 1)));
    detail::copy_patch(set.images, img, set.channels, set.height, set.width, y0, x0, p, out, i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rotating random-dot videos.
// ---------------------------------------------------------------------------

/// Splat a unit-intensity dot at continuous position (row, col) onto the four
/// surrounding pixels with bilinear weights.
inline void splat_dot(Eigen::MatrixXd& frame, double row, double col) {
  int r0 = static_cast<int>(std::floor(row));
  int c0 = static_cast<int>(std::floor(col));
  double fr = row - r0;
  double fc = col - c0;
  const int s_rows = static_cast<int>(frame.rows());
  const int s_cols = static_cast<int>(frame.cols());
  auto add = [&](int r, int c, double w) {
    if (w > 0.0 && r >= 0 && r < s_rows && c >= 0 && c < s_cols) frame(r, c) += w;
  };
  add(r0, c0, (1.0 - fr) * (1.0 - fc));
  add(r0, c0 + 1, (1.0 - fr) * fc);
  add(r0 + 1, c0, fr * (1.0 - fc));
  add(r0 + 1, c0 + 1, fr * fc);
}

/// Rotate a frame counter-clockwise by angle radians about its geometric
/// center ((S-1)/2, (S-1)/2), bilinear sampling, zero outside the frame.
inline Eigen::MatrixXd rotate_frame(const Eigen::MatrixXd& frame, double angle) {
  const Eigen::Index s_rows = frame.rows();
  const Eigen::Index s_cols = frame.cols();
  const double cr = (static_cast<double>(s_rows) - 1.0) / 2.0;
  const double cc = (static_cast<double>(s_cols) - 1.0) / 2.0;
  const double cs = std::cos(angle);
  const double sn = std::sin(angle);

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(s_rows, s_cols);
  for (Eigen::Index r = 0; r < s_rows; ++r) {
    for (Eigen::Index c = 0; c < s_cols; ++c) {
      // Inverse map: rotate the destination offset by -angle.
      double dr = static_cast<double>(r) - cr;
      double dc = static_cast<double>(c) - cc;
      double sr = cs * dr + sn * dc + cr;
      double sc = -sn * dr + cs * dc + cc;
      int r0 = static_cast<int>(std::floor(sr));
      int c0 = static_cast<int>(std::floor(sc));
      double fr = sr - r0;
      double fc = sc - c0;
      auto sample = [&](int rr, int ccol) -> double {
        if (rr < 0 || rr >= s_rows || ccol < 0 || ccol >= s_cols) return 0.0;
        return frame(rr, ccol);
      };
      out(r, c) = (1.0 - fr) * (1.0 - fc) * sample(r0, c0) + (1.0 - fr) * fc * sample(r0, c0 + 1) +
                  fr * (1.0 - fc) * sample(r0 + 1, c0) + fr * fc * sample(r0 + 1, c0 + 1);
    }
  }
  return out;
}

/// Random dot frame: dots_per_frame unit dots at continuous uniform
/// positions, summed and clipped to [0, 1].
inline Eigen::MatrixXd make_random_dot_frame(int size, int dots_per_frame, Rng& rng) {
  Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(size, size);
  for (int d = 0; d < dots_per_frame; ++d) {
    double row = rng.uniform(0.0, static_cast<double>(size) - 1.0);
    double col = rng.uniform(0.0, static_cast<double>(size) - 1.0);
    splat_dot(frame, row, col);
  }
  return frame.cwiseMin(1.0);
}

/// Generate videos whose first frame is a random dot image and whose frame t
/// is the first frame rotated by (t-1)*angle. When angle_per_frame is empty,
/// each video gets its own angle drawn uniformly from [pi/16, pi/4].
inline VideoSet gen_rotating_dots(int n_videos, int frames, int size, int dots_per_frame,
                                  std::optional<double> angle_per_frame, std::uint64_t seed) {
  if (n_videos <= 0 || frames <= 0 || size <= 0 || dots_per_frame <= 0) {
    throw std::invalid_argument("gen_rotating_dots: all counts must be positive");
  }
  VideoSet set;
  set.frames = frames;
  set.frame_size = size;
  set.rotation_angle =
      angle_per_frame ? *angle_per_frame : std::numeric_limits<double>::quiet_NaN();

  const Eigen::Index frame_dims = static_cast<Eigen::Index>(size) * size;
  set.videos.resize(n_videos, static_cast<Eigen::Index>(frames) * frame_dims);

  constexpr double kPi = 3.14159265358979323846;
  Rng rng(substream_seed(seed, "rotdots"));
  for (int v = 0; v < n_videos; ++v) {
    Eigen::MatrixXd first = make_random_dot_frame(size, dots_per_frame, rng);
    double angle = angle_per_frame ? *angle_per_frame : rng.uniform(kPi / 16.0, kPi / 4.0);
    for (int t = 0; t < frames; ++t) {
      Eigen::MatrixXd frame = t == 0 ? first : rotate_frame(first, t * angle);
      frame = frame.cwiseMax(0.0).cwiseMin(1.0);
      for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c)
          set.videos(v, static_cast<Eigen::Index>(t) * frame_dims + r * size + c) = frame(r, c);
    }
  }
  return set;
}

/// VideoSet on disk: ZMAT file plus a "<path>.meta" text sidecar.
inline void save_videoset(const std::filesystem::path& path, const VideoSet& set) {
  save_matrix(path, set.videos);
  std::ofstream meta(path.string() + ".meta");
  if (!meta) throw parse_error("cannot open for writing: " + path.string() + ".meta");
  meta << "frames=" << set.frames << "\n";
  meta << "size=" << set.frame_size << "\n";
  if (std::isnan(set.rotation_angle)) {
    meta << "angle=auto\n";
  } else {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", set.rotation_angle);
    meta << "angle=" << buf << "\n";
  }
}

inline VideoSet load_videoset(const std::filesystem::path& path) {
  VideoSet set;
  set.videos = load_matrix(path);
  std::ifstream meta(path.string() + ".meta");
  if (!meta) throw parse_error("cannot open: " + path.string() + ".meta");
  std::string line;
  while (std::getline(meta, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "frames") set.frames = std::stoi(value);
    else if (key == "size") set.frame_size = std::stoi(value);
    else if (key == "angle")
      set.rotation_angle = value == "auto" ? std::numeric_limits<double>::quiet_NaN() : std::stod(value);
  }
  if (set.frames <= 0 || set.frame_size <= 0 ||
      set.videos.cols() != static_cast<Eigen::Index>(set.frames) * set.frame_size * set.frame_size) {
    throw parse_error(path.string() + ".meta: inconsistent video geometry");
  }
  return set;
}

}  // namespace zae
