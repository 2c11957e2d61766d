#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace graspme {

struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 (gray) or 3 (RGB)
  std::vector<std::uint8_t> data;
};

struct Image16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> data;  // gray
};

// All functions throw IoError on failure.
void write_png(const std::filesystem::path& path, const Image8& image, int compression = 3);
void write_png16(const std::filesystem::path& path, const Image16& image, int compression = 3);
/// Reads 8-bit gray or RGB PNGs (palette and alpha are expanded/stripped).
Image8 read_png(const std::filesystem::path& path);
Image16 read_png16(const std::filesystem::path& path);

}  // namespace graspme
