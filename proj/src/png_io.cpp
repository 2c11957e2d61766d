#include "graspme/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>

#include "graspme/error.hpp"

namespace graspme {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

[[noreturn]] void on_png_error(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// libpng reports errors through longjmp; this keeps the setjmp frame in one
// place and converts failures into IoError.
template <class Body>
void write_rows(const std::filesystem::path& path, int width, int height, int bit_depth,
                int color_type, int compression, Body rows_of) {
  FilePtr file = open_file(path, "wb");
  std::string error;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error, on_png_warning);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  std::vector<png_bytep> rows = rows_of();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("writing " + path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, compression);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw IoError("writing " + path.string() + " failed");
}

struct ReadResult {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> bytes;
};

ReadResult read_any(const std::filesystem::path& path, bool want16) {
  FilePtr file = open_file(path, "rb");
  std::string error;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error, on_png_warning);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  ReadResult out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("reading " + path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (!want16 && depth == 16) png_set_strip_16(png);
  if (want16 && depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace

void write_png(const std::filesystem::path& path, const Image8& image, int compression) {
  if (image.channels != 1 && image.channels != 3) throw IoError("write_png: 1 or 3 channels");
  if (image.data.size() != static_cast<std::size_t>(image.width) * image.height * image.channels) {
    throw IoError("write_png: buffer size mismatch");
  }
  write_rows(path, image.width, image.height, 8,
             image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, compression, [&] {
               std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
               const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
               for (int y = 0; y < image.height; ++y) {
                 rows[y] = const_cast<png_bytep>(image.data.data() + stride * y);
               }
               return rows;
             });
}

void write_png16(const std::filesystem::path& path, const Image16& image, int compression) {
  if (image.data.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw IoError("write_png16: buffer size mismatch");
  }
  write_rows(path, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY, compression, [&] {
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
    for (int y = 0; y < image.height; ++y) {
      rows[y] = reinterpret_cast<png_bytep>(
          const_cast<std::uint16_t*>(image.data.data() + static_cast<std::size_t>(image.width) * y));
    }
    return rows;
  });
}

Image8 read_png(const std::filesystem::path& path) {
  ReadResult r = read_any(path, false);
  if (r.channels != 1 && r.channels != 3) throw IoError(path.string() + ": unsupported channel layout");
  return Image8{r.width, r.height, r.channels, std::move(r.bytes)};
}

Image16 read_png16(const std::filesystem::path& path) {
  ReadResult r = read_any(path, true);
  if (r.channels != 1 || r.bit_depth != 16) throw IoError(path.string() + ": expected 16-bit gray");
  Image16 out{r.width, r.height, {}};
  out.data.resize(static_cast<std::size_t>(r.width) * r.height);
  std::memcpy(out.data.data(), r.bytes.data(), out.data.size() * sizeof(std::uint16_t));
  return out;
}

}  // namespace graspme
