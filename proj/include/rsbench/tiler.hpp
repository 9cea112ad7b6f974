#pragma once

// Sliding-window tiling of large scenes into fixed-size square patches.
//
// Stride equals the tile size. When a dimension is not a multiple of the
// tile size the last window on that axis is shifted back to abut the image
// edge, so every emitted patch is full resolution. A dimension smaller than
// the tile yields one window of that dimension, flagged as padded.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "rsbench/error.hpp"

namespace rsbench::tiler {

inline constexpr std::int64_t kDefaultTileSize = 512;

struct TileWindow {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t w = 0;
  std::int64_t h = 0;
  bool padded = false;

  friend bool operator==(const TileWindow&, const TileWindow&) = default;
};

/// Interleaved row-major pixel grid.
template <typename T>
struct Raster {
  std::int64_t width = 0;
  std::int64_t height = 0;
  int channels = 1;
  std::vector<T> pixels;

  Raster() = default;
  Raster(std::int64_t w, std::int64_t h, int c = 1, T fill = T{})
      : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w * h * c), fill) {}

  T& at(std::int64_t x, std::int64_t y, int c = 0) {
    return pixels[static_cast<std::size_t>((y * width + x) * channels + c)];
  }
  const T& at(std::int64_t x, std::int64_t y, int c = 0) const {
    return pixels[static_cast<std::size_t>((y * width + x) * channels + c)];
  }

  friend bool operator==(const Raster&, const Raster&) = default;
};

struct AxisSpan {
  std::int64_t origin;
  std::int64_t extent;
};

/// Window origins along one axis: ceil(dim / tile) of them.
inline std::vector<AxisSpan> plan_axis(std::int64_t dim, std::int64_t tile) {
  if (dim < 1 || tile < 1) throw InvalidArgument("plan_axis: dimension and tile size must be >= 1");
  if (dim <= tile) return {{0, dim}};
  std::int64_t count = (dim + tile - 1) / tile;
  std::vector<AxisSpan> spans;
  spans.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i + 1 < count; ++i) spans.push_back({i * tile, tile});
  spans.push_back({dim - tile, tile});
  return spans;
}

/// Windows covering a width x height raster, sorted by (y, x).
inline std::vector<TileWindow> plan_tiles(std::int64_t width, std::int64_t height,
                                          std::int64_t tile = kDefaultTileSize) {
  if (width < 1 || height < 1) throw InvalidArgument("plan_tiles: raster dimensions must be >= 1");
  if (tile < 1) throw InvalidArgument("plan_tiles: tile size must be >= 1");
  auto xs = plan_axis(width, tile);
  auto ys = plan_axis(height, tile);
  std::vector<TileWindow> out;
  out.reserve(xs.size() * ys.size());
  for (const auto& ys_ : ys)
    for (const auto& xs_ : xs)
      out.push_back({xs_.origin, ys_.origin, xs_.extent, ys_.extent,
                     xs_.extent < tile || ys_.extent < tile});
  return out;
}

/// Copies the window out of `src`. Pixels of a padded window that fall
/// outside the source are zero. A non-padded window must lie inside `src`.
template <typename T>
Raster<T> crop(const Raster<T>& src, const TileWindow& win) {
  if (win.x < 0 || win.y < 0 || win.x >= src.width || win.y >= src.height)
    throw InvalidArgument("crop: window origin outside raster");
  if (win.w < 1 || win.h < 1) throw InvalidArgument("crop: empty window");
  bool overflows = win.x + win.w > src.width || win.y + win.h > src.height;
  if (overflows && !win.padded) throw InvalidArgument("crop: window exceeds raster and is not padded");

  Raster<T> out(win.w, win.h, src.channels);
  std::int64_t copy_w = std::min(win.w, src.width - win.x);
  std::int64_t copy_h = std::min(win.h, src.height - win.y);
  for (std::int64_t r = 0; r < copy_h; ++r) {
    auto first = src.pixels.begin() + ((win.y + r) * src.width + win.x) * src.channels;
    std::copy(first, first + copy_w * src.channels,
              out.pixels.begin() + r * win.w * src.channels);
  }
  return out;
}

/// Grows a padded window to tile x tile so `crop` zero-fills the remainder.
inline TileWindow pad_to_tile(TileWindow win, std::int64_t tile) {
  if (!win.padded) return win;
  win.w = std::max(win.w, tile);
  win.h = std::max(win.h, tile);
  return win;
}

/// `<image_id>__y<y>_x<x>`
inline std::string patch_name(const std::string& image_id, const TileWindow& win) {
  return image_id + "__y" + std::to_string(win.y) + "_x" + std::to_string(win.x);
}

/// Uniform integer in [0, bound) drawn from the raw mt19937_64 stream by
/// rejection, so results do not depend on the standard library's
/// distribution implementation.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

/// Chooses `count` distinct indices out of [0, population) with a seeded
/// partial Fisher-Yates shuffle. Returned indices are ascending. If
/// count >= population, every index is returned.
inline std::vector<std::size_t> sample_indices(std::size_t population, std::size_t count,
                                               std::uint64_t seed) {
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (count >= population) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    auto j = i + static_cast<std::size_t>(bounded_draw(rng, population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace rsbench::tiler
