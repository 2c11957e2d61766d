#include <gtest/gtest.h>

#include "graspme/error.hpp"
#include "graspme/mask.hpp"
#include "support.hpp"

using namespace graspme;

TEST(BboxFromMask, TwoPixels) {
  BinaryMask m(12, 10);
  m.set(3, 4);
  m.set(10, 7);
  EXPECT_EQ(bbox_from_mask(m), (BBox{3, 4, 7, 3}));
}

TEST(BboxFromMask, SinglePixelAndEmpty) {
  BinaryMask m(8, 8);
  EXPECT_FALSE(bbox_from_mask(m));
  m.set(5, 5);
  EXPECT_EQ(bbox_from_mask(m), (BBox{5, 5, 0, 0}));
}

TEST(BboxFromMask, MatchesExtremesProperty) {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    const auto m = testing_support::random_mask(rng);
    int x0 = m.width, y0 = m.height, x1 = -1, y1 = -1;
    for (int y = 0; y < m.height; ++y) {
      for (int x = 0; x < m.width; ++x) {
        if (!m.at(x, y)) continue;
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
    }
    const auto b = bbox_from_mask(m);
    if (x1 < 0) {
      EXPECT_FALSE(b);
    } else {
      EXPECT_EQ(b, (BBox{double(x0), double(y0), double(x1 - x0), double(y1 - y0)}));
    }
  }
}

TEST(Rle, Examples) {
  BinaryMask empty(2, 2);
  EXPECT_EQ(encode_rle(empty).counts, (std::vector<std::uint32_t>{4}));
  BinaryMask full(2, 2);
  for (auto& p : full.pixels) p = 1;
  EXPECT_EQ(encode_rle(full).counts, (std::vector<std::uint32_t>{0, 4}));
  BinaryMask one(2, 2);
  one.set(0, 0);
  EXPECT_EQ(encode_rle(one).counts, (std::vector<std::uint32_t>{0, 1, 3}));
  BinaryMask col(2, 2);
  col.set(1, 0);  // column-major position 2
  EXPECT_EQ(encode_rle(col).counts, (std::vector<std::uint32_t>{2, 1, 1}));
  const auto r = encode_rle(col);
  EXPECT_EQ(r.height, 2);
  EXPECT_EQ(r.width, 2);
  EXPECT_EQ(r.area(), 1u);
}

TEST(Rle, RoundTripProperty) {
  Rng rng(99);
  for (int i = 0; i < 10000; ++i) {
    const auto m = testing_support::random_mask(rng, 16);
    const auto rle = encode_rle(m);
    std::uint64_t sum = 0;
    for (auto c : rle.counts) sum += c;
    ASSERT_EQ(sum, static_cast<std::uint64_t>(m.width) * m.height);
    for (std::size_t k = 1; k < rle.counts.size(); ++k) ASSERT_GT(rle.counts[k], 0u);
    ASSERT_EQ(rle.area(), m.count());
    ASSERT_EQ(decode_rle(rle), m);
  }
}

TEST(Rle, DecodeSizeMismatch) {
  RleMask bad{2, 2, {1, 2}};
  EXPECT_THROW(decode_rle(bad), InvalidArgument);
}

TEST(Rle, IntersectionMatchesDense) {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    auto a = testing_support::random_mask(rng, 12);
    BinaryMask b(a.width, a.height);
    const double density = rng.uniform();
    for (auto& p : b.pixels) p = rng.bernoulli(density);
    std::uint64_t inter = 0, uni = 0;
    for (std::size_t k = 0; k < a.pixels.size(); ++k) {
      inter += a.pixels[k] && b.pixels[k];
      uni += a.pixels[k] || b.pixels[k];
    }
    const auto ra = encode_rle(a), rb = encode_rle(b);
    ASSERT_EQ(rle_intersection(ra, rb), inter);
    const double iou = uni == 0 ? 0.0 : double(inter) / double(uni);
    ASSERT_DOUBLE_EQ(rle_iou(ra, rb), iou);
    ASSERT_DOUBLE_EQ(rle_iou(ra, rb), rle_iou(rb, ra));
  }
}
