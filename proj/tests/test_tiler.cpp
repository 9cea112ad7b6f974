#include <gtest/gtest.h>

#include <set>

#include "rsbench/error.hpp"
#include "rsbench/image_io.hpp"
#include "rsbench/tiler.hpp"
#include "test_support.hpp"

using namespace rsbench;
using namespace rsbench::tiler;
using rsbench::test::Gen;
using rsbench::test::TempDir;
using rsbench::image_io::Image;

namespace {

// Marks every window on a width x height grid; true when no pixel is left
// uncovered and no window leaves the grid.
bool covers(std::int64_t width, std::int64_t height, const std::vector<TileWindow>& wins) {
  std::vector<char> hit(static_cast<std::size_t>(width * height), 0);
  for (const auto& w : wins) {
    if (w.x < 0 || w.y < 0 || w.x + w.w > width || w.y + w.h > height) return false;
    for (auto y = w.y; y < w.y + w.h; ++y)
      for (auto x = w.x; x < w.x + w.w; ++x) hit[static_cast<std::size_t>(y * width + x)] = 1;
  }
  return std::all_of(hit.begin(), hit.end(), [](char c) { return c == 1; });
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

Image gradient(std::int64_t w, std::int64_t h, int channels) {
  Image img(w, h, channels);
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) img.at(x, y, c) = static_cast<std::uint8_t>((x * 7 + y * 13 + c * 50) % 256);
  return img;
}

}  // namespace

TEST(PlanTiles, ExactFitIsOneWindow) {
  auto w = plan_tiles(512, 512, 512);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0], (TileWindow{0, 0, 512, 512, false}));
}

TEST(PlanTiles, EightHundredShiftsLastWindowToEdge) {
  auto w = plan_tiles(800, 800, 512);
  ASSERT_EQ(w.size(), 4u);
  std::set<std::pair<std::int64_t, std::int64_t>> origins;
  for (const auto& t : w) {
    origins.insert({t.x, t.y});
    EXPECT_EQ(t.w, 512);
    EXPECT_EQ(t.h, 512);
    EXPECT_FALSE(t.padded);
  }
  EXPECT_EQ(origins, (std::set<std::pair<std::int64_t, std::int64_t>>{{0, 0}, {288, 0}, {0, 288}, {288, 288}}));
  EXPECT_TRUE(covers(800, 800, w));
}

TEST(PlanTiles, FourThousandIsSixtyFourWindows) {
  auto w = plan_tiles(4000, 4000, 512);
  EXPECT_EQ(w.size(), 64u);
  EXPECT_TRUE(covers(4000, 4000, w));
}

TEST(PlanTiles, RowMajorOrder) {
  auto w = plan_tiles(1100, 600, 512);
  ASSERT_EQ(w.size(), 6u);
  for (std::size_t i = 1; i < w.size(); ++i)
    EXPECT_TRUE(std::make_pair(w[i - 1].y, w[i - 1].x) < std::make_pair(w[i].y, w[i].x));
}

TEST(PlanTiles, SmallerThanTileIsPaddedSingleWindow) {
  auto w = plan_tiles(300, 700, 512);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0], (TileWindow{0, 0, 300, 512, true}));
  EXPECT_EQ(w[1], (TileWindow{0, 188, 300, 512, true}));
}

TEST(PlanTiles, RejectsDegenerateInput) {
  EXPECT_THROW(plan_tiles(0, 10, 512), InvalidArgument);
  EXPECT_THROW(plan_tiles(10, 10, 0), InvalidArgument);
}

TEST(PlanTilesProperty, CoverageAndCountOverRandomGeometries) {
  Gen g(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    auto width = g.uniform(1, 5000), height = g.uniform(1, 5000);
    auto wins = plan_tiles(width, height, 512);
    // Window count per axis is ceil(dim / tile).
    std::set<std::int64_t> xs, ys;
    for (const auto& w : wins) xs.insert(w.x), ys.insert(w.y);
    ASSERT_EQ(static_cast<std::int64_t>(xs.size()), ceil_div(width, 512)) << width;
    ASSERT_EQ(static_cast<std::int64_t>(ys.size()), ceil_div(height, 512)) << height;
    ASSERT_EQ(wins.size(), xs.size() * ys.size());
    // Deterministic.
    ASSERT_EQ(plan_tiles(width, height, 512), wins);
    // Brute-force marking on the same geometry scaled down 16x.
    auto sw = ceil_div(width, 16), sh = ceil_div(height, 16);
    ASSERT_TRUE(covers(sw, sh, plan_tiles(sw, sh, 32))) << sw << "x" << sh;
  }
}

TEST(Crop, IdentityOnFullWindow) {
  auto img = gradient(2, 2, 1);
  EXPECT_EQ(crop(img, {0, 0, 2, 2, false}).pixels, img.pixels);
}

TEST(Crop, BottomRightBlock) {
  Raster<int> r(3, 3);
  for (int i = 0; i < 9; ++i) r.pixels[static_cast<std::size_t>(i)] = i;
  auto p = crop(r, {1, 1, 2, 2, false});
  EXPECT_EQ(p.pixels, (std::vector<int>{4, 5, 7, 8}));
}

TEST(Crop, SinglePixel) {
  Raster<int> r(1, 1, 1, 42);
  auto p = crop(r, {0, 0, 1, 1, false});
  EXPECT_EQ(p.pixels, std::vector<int>{42});
}

TEST(Crop, MultiChannelMatchesIndexArithmetic) {
  auto img = gradient(17, 11, 3);
  TileWindow win{5, 3, 8, 6, false};
  auto p = crop(img, win);
  for (std::int64_t y = 0; y < win.h; ++y)
    for (std::int64_t x = 0; x < win.w; ++x)
      for (int c = 0; c < 3; ++c) ASSERT_EQ(p.at(x, y, c), img.at(win.x + x, win.y + y, c));
}

TEST(Crop, OutOfBoundsRejectedUnlessPadded) {
  Raster<int> r(4, 4, 1, 1);
  EXPECT_THROW(crop(r, {2, 2, 4, 4, false}), InvalidArgument);
  EXPECT_THROW(crop(r, {4, 0, 1, 1, false}), InvalidArgument);
  auto p = crop(r, {2, 2, 4, 4, true});
  EXPECT_EQ(p.at(0, 0), 1);
  EXPECT_EQ(p.at(1, 1), 1);
  EXPECT_EQ(p.at(2, 0), 0);
  EXPECT_EQ(p.at(0, 3), 0);
}

TEST(PadToTile, GrowsOnlyPaddedWindows) {
  EXPECT_EQ(pad_to_tile({0, 0, 300, 512, true}, 512), (TileWindow{0, 0, 512, 512, true}));
  EXPECT_EQ(pad_to_tile({288, 0, 512, 512, false}, 512), (TileWindow{288, 0, 512, 512, false}));
}

TEST(PatchName, SortableConvention) {
  EXPECT_EQ(patch_name("P0001", {288, 0, 512, 512, false}), "P0001__y0_x288");
}

TEST(SampleIndices, DeterministicDistinctSorted) {
  auto a = sample_indices(64, 10, 7);
  EXPECT_EQ(a, sample_indices(64, 10, 7));
  EXPECT_EQ(a.size(), 10u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 10u);
  EXPECT_LT(a.back(), 64u);
  EXPECT_NE(a, sample_indices(64, 10, 8));
  EXPECT_EQ(sample_indices(5, 9, 1), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(SampleIndices, RoughlyUniform) {
  std::vector<int> hits(20, 0);
  for (std::uint64_t seed = 0; seed < 2000; ++seed)
    for (auto i : sample_indices(20, 5, seed)) ++hits[i];
  // Expected 500 per index.
  for (int h : hits) {
    EXPECT_GT(h, 400);
    EXPECT_LT(h, 600);
  }
}

TEST(ImageIo, PngRoundTrip) {
  TempDir dir;
  for (int channels : {1, 3, 4}) {
    auto img = gradient(13, 9, channels);
    auto path = dir / ("x" + std::to_string(channels) + ".png");
    image_io::write_raster(path, img);
    auto back = image_io::read_raster(path);
    EXPECT_EQ(back.width, 13);
    EXPECT_EQ(back.height, 9);
    EXPECT_EQ(back.channels, channels);
    EXPECT_EQ(back.pixels, img.pixels);
    auto info = image_io::raster_info(path);
    EXPECT_EQ(info.width, 13);
    EXPECT_EQ(info.channels, channels);
  }
}

TEST(ImageIo, PnmRoundTrip) {
  TempDir dir;
  auto gray = gradient(7, 5, 1);
  image_io::write_raster(dir / "g.pgm", gray);
  EXPECT_EQ(image_io::read_raster(dir / "g.pgm").pixels, gray.pixels);
  auto rgb = gradient(7, 5, 3);
  image_io::write_raster(dir / "c.ppm", rgb);
  auto back = image_io::read_raster(dir / "c.ppm");
  EXPECT_EQ(back.channels, 3);
  EXPECT_EQ(back.pixels, rgb.pixels);
  EXPECT_EQ(image_io::modality_of(gray), Modality::panchromatic);
  EXPECT_EQ(image_io::modality_of(rgb), Modality::color);
}

TEST(ImageIo, CorruptFileIsDataError) {
  TempDir dir;
  test::write_text(dir / "bad.png", "not a png");
  test::write_text(dir / "bad.pgm", "P5\n3 3\n255\nab");
  EXPECT_THROW(image_io::read_raster(dir / "bad.png"), DataError);
  EXPECT_THROW(image_io::read_raster(dir / "bad.pgm"), DataError);
}

TEST(ImageIo, ContentTypes) {
  EXPECT_EQ(image_io::content_type_for("a/b.PNG"), "image/png");
  EXPECT_EQ(image_io::content_type_for("x.pgm"), "image/x-portable-graymap");
}
