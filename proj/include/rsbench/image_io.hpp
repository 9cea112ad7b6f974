#pragma once

// 8-bit raster I/O for the lossless formats the tiler accepts: binary
// PGM/PPM (P5/P6) and PNG. Grayscale rasters have 1 channel, color rasters
// 3 (RGBA PNGs keep their 4 channels).

#include <png.h>

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "rsbench/corpus.hpp"
#include "rsbench/error.hpp"
#include "rsbench/tiler.hpp"

namespace rsbench::image_io {

using Image = tiler::Raster<std::uint8_t>;

enum class Format { pnm, png };

inline std::optional<Format> format_for(const std::filesystem::path& p) {
  std::string ext = text::to_lower(p.extension().string());
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return Format::pnm;
  if (ext == ".png") return Format::png;
  return std::nullopt;
}

/// MIME type used when serving a raster file.
inline std::string_view content_type_for(const std::filesystem::path& p) {
  std::string ext = text::to_lower(p.extension().string());
  if (ext == ".png") return "image/png";
  if (ext == ".pgm") return "image/x-portable-graymap";
  if (ext == ".ppm") return "image/x-portable-pixmap";
  if (ext == ".pnm") return "image/x-portable-anymap";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".tif" || ext == ".tiff") return "image/tiff";
  return "application/octet-stream";
}

inline Modality modality_of(const Image& img) {
  return img.channels == 1 ? Modality::panchromatic : Modality::color;
}

namespace detail {

inline std::string pnm_token(const std::string& data, std::size_t& pos) {
  for (;;) {
    while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (pos < data.size() && data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::size_t start = pos;
  while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
  return data.substr(start, pos - start);
}

inline Image read_pnm(const std::string& path) {
  std::string data = rsbench::detail::read_file(path);
  std::size_t pos = 0;
  std::string magic = pnm_token(data, pos);
  int channels = magic == "P5" ? 1 : magic == "P6" ? 3 : 0;
  if (!channels) throw DataError(path + ": unsupported PNM variant \"" + magic + "\" (need P5 or P6)");
  long w = 0, h = 0, maxval = 0;
  try {
    w = std::stol(pnm_token(data, pos));
    h = std::stol(pnm_token(data, pos));
    maxval = std::stol(pnm_token(data, pos));
  } catch (const std::exception&) {
    throw DataError(path + ": malformed PNM header");
  }
  if (w < 1 || h < 1) throw DataError(path + ": non-positive PNM dimensions");
  if (maxval < 1 || maxval > 255) throw DataError(path + ": only 8-bit PNM is supported");
  ++pos;  // single whitespace byte before the raster
  std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (data.size() < pos + need) throw DataError(path + ": truncated PNM raster");
  Image img(w, h, channels);
  std::copy(data.begin() + pos, data.begin() + pos + need, img.pixels.begin());
  return img;
}

inline void write_pnm(const std::string& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw InvalidArgument(path + ": PNM output needs 1 or 3 channels");
  std::string out = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(img.pixels.begin(), img.pixels.end());
  rsbench::detail::write_file(path, out);
}

inline Image read_png(const std::string& path) {
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&pi, path.c_str()))
    throw DataError(path + ": " + pi.message);
  if (pi.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&pi);
    throw DataError(path + ": only 8-bit PNG is supported");
  }
  bool has_color = (pi.format & PNG_FORMAT_FLAG_COLOR) != 0;
  bool has_alpha = (pi.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  if (has_color)
    pi.format = has_alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  else
    pi.format = has_alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY;
  Image img(pi.width, pi.height, static_cast<int>(PNG_IMAGE_PIXEL_CHANNELS(pi.format)));
  if (!png_image_finish_read(&pi, nullptr, img.pixels.data(), 0, nullptr)) {
    std::string msg = pi.message;
    png_image_free(&pi);
    throw DataError(path + ": " + msg);
  }
  return img;
}

inline void write_png(const std::string& path, const Image& img) {
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.width);
  pi.height = static_cast<png_uint_32>(img.height);
  switch (img.channels) {
    case 1: pi.format = PNG_FORMAT_GRAY; break;
    case 2: pi.format = PNG_FORMAT_GA; break;
    case 3: pi.format = PNG_FORMAT_RGB; break;
    case 4: pi.format = PNG_FORMAT_RGBA; break;
    default: throw InvalidArgument(path + ": unsupported channel count");
  }
  if (!png_image_write_to_file(&pi, path.c_str(), 0, img.pixels.data(), 0, nullptr))
    throw DataError(path + ": " + pi.message);
}

}  // namespace detail

struct RasterInfo {
  std::int64_t width = 0;
  std::int64_t height = 0;
  int channels = 0;
};

/// Dimensions without decoding the pixels (PNG) or copying them (PNM).
inline RasterInfo raster_info(const std::filesystem::path& path) {
  auto fmt = format_for(path);
  if (!fmt) throw DataError(path.string() + ": unsupported raster format");
  if (*fmt == Format::png) {
    png_image pi{};
    pi.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&pi, path.c_str())) throw DataError(path.string() + ": " + pi.message);
    RasterInfo info{pi.width, pi.height, static_cast<int>(PNG_IMAGE_SAMPLE_CHANNELS(pi.format))};
    png_image_free(&pi);
    return info;
  }
  auto img = detail::read_pnm(path.string());
  return {img.width, img.height, img.channels};
}

inline Image read_raster(const std::filesystem::path& path) {
  auto fmt = format_for(path);
  if (!fmt) throw DataError(path.string() + ": unsupported raster format");
  return *fmt == Format::png ? detail::read_png(path.string()) : detail::read_pnm(path.string());
}

inline void write_raster(const std::filesystem::path& path, const Image& img) {
  auto fmt = format_for(path);
  if (!fmt) throw DataError(path.string() + ": unsupported raster format");
  if (*fmt == Format::png)
    detail::write_png(path.string(), img);
  else
    detail::write_pnm(path.string(), img);
}

}  // namespace rsbench::image_io
