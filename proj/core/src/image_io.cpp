#include "colocal/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "colocal/types.hpp"

namespace colocal {

namespace fs = std::filesystem;

RgbImage RgbImage::filled(int w, int h, std::uint8_t r, std::uint8_t g,
                          std::uint8_t b) {
  RgbImage img;
  img.width = w;
  img.height = h;
  img.data.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    img.data[i] = r;
    img.data[i + 1] = g;
    img.data[i + 2] = b;
  }
  return img;
}

void atomic_write_file(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

namespace {

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Skips whitespace and '#' comment lines in a PNM header.
void skip_pnm_space(const std::string& buf, std::size_t& pos) {
  while (pos < buf.size()) {
    char c = buf[pos];
    if (c == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
}

int parse_pnm_int(const std::string& buf, std::size_t& pos, const fs::path& path) {
  skip_pnm_space(buf, pos);
  std::size_t start = pos;
  while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) ++pos;
  if (pos == start) throw IoError("malformed PNM header: " + path.string());
  return std::stoi(buf.substr(start, pos - start));
}

RgbImage read_ppm(const std::string& buf, const fs::path& path) {
  std::size_t pos = 2;  // past "P6"
  RgbImage img;
  img.width = parse_pnm_int(buf, pos, path);
  img.height = parse_pnm_int(buf, pos, path);
  int maxval = parse_pnm_int(buf, pos, path);
  if (img.width <= 0 || img.height <= 0)
    throw IoError("bad PPM dimensions: " + path.string());
  if (maxval != 255)
    throw IoError("only maxval 255 PPM supported: " + path.string());
  ++pos;  // single whitespace byte after maxval
  std::size_t need = static_cast<std::size_t>(img.width) * img.height * 3;
  if (buf.size() - pos < need)
    throw IoError("truncated PPM payload: " + path.string());
  img.data.assign(buf.begin() + static_cast<std::ptrdiff_t>(pos),
                  buf.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return img;
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

RgbImage read_png_file(const fs::path& path) {
  PngReadCloser h;
  h.fp = std::fopen(path.string().c_str(), "rb");
  if (!h.fp) throw IoError("cannot open: " + path.string());
  h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!h.png) throw IoError("png_create_read_struct failed");
  h.info = png_create_info_struct(h.png);
  if (!h.info) throw IoError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(h.png)))
    throw IoError("libpng failed to decode: " + path.string());

  png_init_io(h.png, h.fp);
  png_read_info(h.png, h.info);

  png_set_expand(h.png);
  png_set_strip_16(h.png);
  png_set_strip_alpha(h.png);
  png_set_gray_to_rgb(h.png);
  png_read_update_info(h.png, h.info);

  RgbImage img;
  img.width = static_cast<int>(png_get_image_width(h.png, h.info));
  img.height = static_cast<int>(png_get_image_height(h.png, h.info));
  std::size_t rowbytes = png_get_rowbytes(h.png, h.info);
  if (rowbytes != static_cast<std::size_t>(img.width) * 3)
    throw IoError("unexpected PNG row size: " + path.string());

  img.data.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = img.data.data() + static_cast<std::size_t>(y) * rowbytes;
  png_read_image(h.png, rows.data());
  png_read_end(h.png, nullptr);
  return img;
}

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

void write_png_impl(const fs::path& path, int width, int height, int color_type,
                    int channels, const std::uint8_t* data) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    PngWriteCloser h;
    h.fp = std::fopen(tmp.string().c_str(), "wb");
    if (!h.fp) throw IoError("cannot open for writing: " + tmp.string());
    h.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!h.png) throw IoError("png_create_write_struct failed");
    h.info = png_create_info_struct(h.png);
    if (!h.info) throw IoError("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(h.png)))
      throw IoError("libpng failed to encode: " + tmp.string());

    png_init_io(h.png, h.fp);
    png_set_IHDR(h.png, h.info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(h.png, h.info);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
      rows[y] = const_cast<png_bytep>(
          data + static_cast<std::size_t>(y) * width * channels);
    png_write_image(h.png, rows.data());
    png_write_end(h.png, nullptr);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

}  // namespace

RgbImage read_raster(const fs::path& path) {
  std::string buf = read_all(path);
  if (buf.size() >= 8 && std::memcmp(buf.data(), "\x89PNG\r\n\x1a\n", 8) == 0)
    return read_png_file(path);
  if (buf.size() >= 2 && buf[0] == 'P' && buf[1] == '6')
    return read_ppm(buf, path);
  throw IoError("unrecognized raster format (want PNG or P6 PPM): " + path.string());
}

void write_ppm(const fs::path& path, const RgbImage& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  atomic_write_file(path, out);
}

void write_pgm(const fs::path& path, const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  atomic_write_file(path, out);
}

void write_png(const fs::path& path, const RgbImage& img) {
  write_png_impl(path, img.width, img.height, PNG_COLOR_TYPE_RGB, 3,
                 img.data.data());
}

void write_png(const fs::path& path, const GrayImage& img) {
  write_png_impl(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, 1,
                 img.data.data());
}

}  // namespace colocal
