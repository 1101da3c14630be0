#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "zae/core.hpp"

namespace zae {

/// Interleaved 8-bit RGB raster.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // height*width*3, row-major, RGB

  std::uint8_t& at(int y, int x, int ch) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + ch]; }
  std::uint8_t at(int y, int x, int ch) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
  }
};

/// Binary P6 portable pixmap, maxval 255.
inline void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw parse_error("cannot open for writing: " + path.string());
  os << "P6\n" << img.width << " " << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size()));
  if (!os) throw parse_error("write failed: " + path.string());
}

inline RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw parse_error("cannot open: " + path.string());
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  is >> magic >> width >> height >> maxval;
  if (magic != "P6" || maxval != 255 || width <= 0 || height <= 0) {
    throw parse_error(path.string() + ": not a maxval-255 P6 pixmap");
  }
  is.get();  // single whitespace after the header
  RgbImage img;
  img.height = height;
  img.width = width;
  img.pixels.resize(static_cast<std::size_t>(height) * width * 3);
  if (!is.read(reinterpret_cast<char*>(img.pixels.data()),
               static_cast<std::streamsize>(img.pixels.size()))) {
    throw parse_error(path.string() + ": truncated pixel data");
  }
  return img;
}

/// Tile filters (rows of `filters`, channel-major c*h*w layout) into a
/// ceil(sqrt(K))-by-ceil(sqrt(K)) grid with 1-pixel separators. Each filter
/// is normalized to [0,1] on its own; flat filters render mid-gray and unused
/// cells stay black. Single-channel filters are replicated to gray RGB.
inline RgbImage render_filter_grid(const Eigen::MatrixXd& filters, int channels, int height,
                                   int width) {
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("render_filter_grid: channels must be 1 or 3");
  }
  if (filters.cols() != static_cast<Eigen::Index>(channels) * height * width) {
    throw std::invalid_argument("render_filter_grid: filter length does not match shape");
  }
  const int k = static_cast<int>(filters.rows());
  const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));

  RgbImage img;
  img.height = grid * (height + 1) + 1;
  img.width = grid * (width + 1) + 1;
  img.pixels.assign(static_cast<std::size_t>(img.height) * img.width * 3, 0);

  for (int f = 0; f < k; ++f) {
    double lo = filters.row(f).minCoeff();
    double hi = filters.row(f).maxCoeff();
    double span = hi - lo;
    const int cell_y = (f / grid) * (height + 1) + 1;
    const int cell_x = (f % grid) * (width + 1) + 1;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        for (int ch = 0; ch < 3; ++ch) {
          int src_ch = channels == 3 ? ch : 0;
          double v = filters(f, static_cast<Eigen::Index>(src_ch) * height * width +
                                    static_cast<Eigen::Index>(y) * width + x);
          double norm = span > 0.0 ? (v - lo) / span : 0.5;
          img.at(cell_y + y, cell_x + x, ch) =
              static_cast<std::uint8_t>(std::lround(std::clamp(norm, 0.0, 1.0) * 255.0));
        }
      }
    }
  }
  return img;
}

}  // namespace zae
