#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace colocal {

/// Interleaved 8-bit RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // 3 * width * height bytes

  static RgbImage filled(int w, int h, std::uint8_t r, std::uint8_t g,
                         std::uint8_t b);

  const std::uint8_t* pixel(int x, int y) const {
    return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  std::uint8_t* pixel(int x, int y) {
    return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }

  bool operator==(const RgbImage&) const = default;
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width * height bytes

  bool operator==(const GrayImage&) const = default;
};

/// Reads a raster, sniffing the format from the file's magic bytes.
/// PNG (any 8/16-bit color type, normalized to 8-bit RGB) and binary
/// PPM (P6, maxval 255) are accepted.
RgbImage read_raster(const std::filesystem::path& path);

void write_ppm(const std::filesystem::path& path, const RgbImage& img);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);
void write_png(const std::filesystem::path& path, const GrayImage& img);

/// Writes `bytes` to `path` via a temp file in the same directory followed
/// by an atomic rename.
void atomic_write_file(const std::filesystem::path& path,
                       const std::string& bytes);

}  // namespace colocal
