#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <random>

#include "parkseg/error.hpp"
#include "parkseg/parkdetect.hpp"
#include "test_support.hpp"

namespace parkseg {
namespace {

const Palette kPalette = Palette::default_four_class();
constexpr ClassId kBg = 0, kRoad = 1, kCar = 2, kParked = 3;

void paint(Mask& m, int x0, int y0, int w, int h, ClassId c) {
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) m.at(x, y) = c;
}

// Independent vote count for the component containing the given car rect:
// every pixel within Chebyshev distance r of some contour pixel of the rect.
std::pair<int, int> enumerate_votes(const Mask& m, int x0, int y0, int w, int h, int r) {
  auto on_contour = [&](int x, int y) { return x == x0 || y == y0 || x == x0 + w - 1 || y == y0 + h - 1; };
  int bg = 0, road = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool near = false;
      for (int cy = y0; cy < y0 + h && !near; ++cy)
        for (int cx = x0; cx < x0 + w && !near; ++cx)
          near = on_contour(cx, cy) && std::abs(cx - x) <= r && std::abs(cy - y) <= r;
      if (!near) continue;
      bg += m.at(x, y) == kBg;
      road += m.at(x, y) == kRoad;
    }
  }
  return {bg, road};
}

TEST(DetectParkedTest, CarOnRoadStaysMoving) {
  Mask m(40, 40, kRoad);
  paint(m, 18, 18, 4, 6, kCar);
  const auto r = detect_parked(m, kPalette);
  EXPECT_EQ(r.mask, m);
  ASSERT_EQ(r.verdicts.size(), 1u);
  EXPECT_EQ(r.verdicts[0].background_votes, 0u);
  EXPECT_GT(r.verdicts[0].road_votes, 0u);
  EXPECT_FALSE(r.verdicts[0].reclassified);
}

TEST(DetectParkedTest, CarOnBackgroundIsParked) {
  Mask m(40, 40, kBg);
  paint(m, 18, 18, 4, 6, kCar);
  const auto r = detect_parked(m, kPalette);
  ASSERT_EQ(r.verdicts.size(), 1u);
  EXPECT_TRUE(r.verdicts[0].reclassified);
  Mask expected(40, 40, kBg);
  paint(expected, 18, 18, 4, 6, kParked);
  EXPECT_EQ(r.mask, expected);
}

TEST(DetectParkedTest, ThirtyThirtyTieIsNotReclassified) {
  // Band of a 4x4 car at (18,18) with kernel 15 spans [11, 28]^2. Inside it,
  // 30 background and 30 road pixels; the rest of the band is parked_car,
  // which does not vote. Background and road outside the band must not count.
  Mask m(40, 40, kParked);
  paint(m, 0, 0, 40, 11, kBg);
  paint(m, 0, 29, 40, 11, kRoad);
  paint(m, 11, 11, 15, 2, kBg);
  paint(m, 11, 27, 15, 2, kRoad);
  paint(m, 18, 18, 4, 4, kCar);

  const auto [bg, road] = enumerate_votes(m, 18, 18, 4, 4, 7);
  ASSERT_EQ(bg, 30);
  ASSERT_EQ(road, 30);

  for (const auto& r : {detect_parked(m, kPalette), detect_parked_naive(m, kPalette)}) {
    ASSERT_EQ(r.verdicts.size(), 1u);
    EXPECT_EQ(r.verdicts[0].background_votes, 30u);
    EXPECT_EQ(r.verdicts[0].road_votes, 30u);
    EXPECT_FALSE(r.verdicts[0].reclassified);
    EXPECT_EQ(r.mask, m);
  }
}

TEST(DetectParkedTest, HalfRoadHalfBackgroundTie) {
  Mask m(40, 40, kBg);
  paint(m, 20, 0, 20, 40, kRoad);
  paint(m, 18, 18, 4, 4, kCar);
  const auto [bg, road] = enumerate_votes(m, 18, 18, 4, 4, 7);
  ASSERT_EQ(bg, road);
  const auto r = detect_parked(m, kPalette);
  EXPECT_EQ(r.verdicts[0].background_votes, static_cast<std::size_t>(bg));
  EXPECT_FALSE(r.verdicts[0].reclassified);
  // One more background column tips the vote.
  paint(m, 20, 0, 1, 40, kBg);
  paint(m, 18, 18, 4, 4, kCar);
  EXPECT_TRUE(detect_parked(m, kPalette).verdicts[0].reclassified);
}

TEST(DetectParkedTest, OtherCarsDoNotVote) {
  Mask m(30, 30, kBg);
  paint(m, 0, 0, 30, 15, kRoad);
  paint(m, 10, 10, 3, 3, kCar);   // straddles road/background boundary
  paint(m, 16, 10, 3, 8, kCar);   // separate component nearby
  const auto r = detect_parked(m, kPalette, {7, std::nullopt});
  const auto n = detect_parked_naive(m, kPalette, {7, std::nullopt});
  EXPECT_EQ(r.verdicts, n.verdicts);
  EXPECT_EQ(r.mask, n.mask);
}

TEST(DetectParkedTest, UnitKernelNeverReclassifies) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const Mask m = testing::random_mask(rng, 32, 32, {kBg, kRoad, kCar});
    const auto r = detect_parked(m, kPalette, {1, std::nullopt});
    EXPECT_EQ(r.mask, m);
    for (const auto& v : r.verdicts) {
      EXPECT_EQ(v.background_votes, 0u);
      EXPECT_EQ(v.road_votes, 0u);
    }
  }
}

TEST(DetectParkedTest, NoCarsMeansNoVerdicts) {
  Mask m(10, 10, kRoad);
  paint(m, 0, 0, 5, 5, kBg);
  for (const auto& r : {detect_parked(m, kPalette), detect_parked_naive(m, kPalette)}) {
    EXPECT_TRUE(r.verdicts.empty());
    EXPECT_EQ(r.mask, m);
  }
}

TEST(DetectParkedTest, MissingRoles) {
  const Palette no_road({{0, "bg", {0, 0, 0}, Role::Background}, {2, "car", {0, 0, 255}, Role::Car}});
  try {
    detect_parked(Mask(4, 4, 0), no_road);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingRole);
  }
}

TEST(DetectParkedTest, ThreeClassPaletteNeedsTarget) {
  const auto p3 = Palette::default_three_class();
  Mask m(20, 20, kBg);
  paint(m, 8, 8, 3, 3, kCar);
  try {
    detect_parked(m, p3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingParkedTarget);
  }
  // Nothing to relabel: no target needed.
  Mask on_road(20, 20, kRoad);
  paint(on_road, 8, 8, 3, 3, kCar);
  EXPECT_NO_THROW(detect_parked(on_road, p3));
  // Substitute target.
  const auto r = detect_parked(m, p3, {15, kRoad});
  EXPECT_EQ(r.mask.at(9, 9), kRoad);
}

TEST(DetectParkedTest, EvenKernelRejected) {
  EXPECT_THROW(detect_parked(Mask(4, 4, 0), kPalette, {4, std::nullopt}), Error);
  EXPECT_THROW(detect_parked_naive(Mask(4, 4, 0), kPalette, {0, std::nullopt}), Error);
}

TEST(DetectParkedTest, IdempotentAndConservative) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 40; ++trial) {
    const Mask m = testing::random_blob_mask(rng, 64, 64, {kBg, kRoad, kCar}, 25);
    const auto r = detect_parked(m, kPalette);
    EXPECT_EQ(detect_parked(r.mask, kPalette).mask, r.mask);

    std::size_t car_pixels = 0;
    for (const auto& v : r.verdicts) {
      car_pixels += v.car_pixel_count;
      EXPECT_EQ(v.reclassified, v.background_votes > v.road_votes);
    }
    const auto hist = class_histogram(m);
    EXPECT_EQ(car_pixels, hist.count(kCar) ? hist.at(kCar) : 0u);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m.labels()[i] != kCar) EXPECT_EQ(r.mask.labels()[i], m.labels()[i]);
      else EXPECT_TRUE(r.mask.labels()[i] == kCar || r.mask.labels()[i] == kParked);
    }
  }
}

TEST(DetectParkedTest, AgreesWithNaiveOnRandomMasks) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const Mask m = trial % 2 ? testing::random_mask(rng, 48, 40, {kBg, kRoad, kCar, kParked})
                             : testing::random_blob_mask(rng, 48, 40, {kBg, kRoad, kCar, kParked}, 20);
    for (int k : {1, 3, 15}) {
      const auto a = detect_parked(m, kPalette, {k, std::nullopt});
      const auto b = detect_parked_naive(m, kPalette, {k, std::nullopt});
      ASSERT_EQ(a.mask, b.mask) << "trial " << trial << " k " << k;
      ASSERT_EQ(a.verdicts, b.verdicts) << "trial " << trial << " k " << k;
    }
  }
}

TEST(VerdictReportTest, Format) {
  std::vector<ComponentVerdict> v{{1, 0, 12, 5, 9, false}, {2, 40, 4, 30, 2, true}};
  EXPECT_EQ(verdict_report(v),
            "component_id,car_pixels,background_votes,road_votes,decision\n"
            "1,12,5,9,unchanged\n"
            "2,4,30,2,parked\n");
}

}  // namespace
}  // namespace parkseg
