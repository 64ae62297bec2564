#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "parkseg/error.hpp"
#include "parkseg/metrics.hpp"
#include "test_support.hpp"

namespace parkseg {
namespace {

const Palette kPalette = Palette::default_three_class();
constexpr ClassId kBg = 0, kRoad = 1, kCar = 2;

Mask row(std::vector<ClassId> v) {
  const int n = static_cast<int>(v.size());
  return Mask(n, 1, std::move(v));
}

TEST(ConfusionTest, IdenticalMasksAreDiagonal) {
  std::mt19937_64 rng(1);
  const Mask m = testing::random_mask(rng, 16, 16, {kBg, kRoad, kCar});
  const auto cm = confusion(m, m, kPalette);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) {
        EXPECT_EQ(cm.at(i, j), 0u);
      }
  EXPECT_EQ(cm.total(), 256u);
}

TEST(ConfusionTest, SmallExample) {
  const auto cm = confusion(row({kRoad, kCar}), row({kCar, kCar}), kPalette);
  EXPECT_EQ(cm.at(cm.index_of(kRoad), cm.index_of(kCar)), 1u);
  EXPECT_EQ(cm.at(cm.index_of(kCar), cm.index_of(kCar)), 1u);
  EXPECT_EQ(cm.total(), 2u);
}

TEST(ConfusionTest, MatchesNaiveTallyAndMarginals) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Mask gt = testing::random_mask(rng, 32, 32, {kBg, kRoad, kCar});
    const Mask pred = testing::random_mask(rng, 32, 32, {kBg, kRoad, kCar});
    const auto cm = confusion(gt, pred, kPalette);
    std::uint64_t naive[3][3] = {};
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) ++naive[gt.at(x, y)][pred.at(x, y)];
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(cm.at(i, j), naive[i][j]);

    const auto hg = class_histogram(gt), hp = class_histogram(pred);
    for (ClassId c : {kBg, kRoad, kCar}) {
      EXPECT_EQ(cm.row_sum(cm.index_of(c)), hg.count(c) ? hg.at(c) : 0u);
      EXPECT_EQ(cm.column_sum(cm.index_of(c)), hp.count(c) ? hp.at(c) : 0u);
      EXPECT_EQ(cm.tp(c) + cm.fp(c) + cm.fn(c) + cm.tn(c), cm.total());
    }
  }
}

TEST(ConfusionTest, DimensionMismatch) {
  try {
    confusion(Mask(2, 2), Mask(2, 3), kPalette);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(ForegroundAccuracyTest, Examples) {
  EXPECT_DOUBLE_EQ(*foreground_accuracy(row({kRoad, kCar, kBg}), row({kRoad, kCar, kBg}), kPalette), 1.0);
  // Background-gt pixel excluded; one of two foreground pixels correct.
  EXPECT_DOUBLE_EQ(*foreground_accuracy(row({kRoad, kCar, kBg}), row({kRoad, kRoad, kCar}), kPalette), 0.5);
  EXPECT_FALSE(foreground_accuracy(row({kBg, kBg}), row({kCar, kBg}), kPalette).has_value());
}

TEST(DiceJaccardTest, FormulaAndMaskFixtureAgree) {
  // gt car on 3 pixels, pred car on 3 pixels, overlap 2: TP=2, FP=1, FN=1.
  const Mask gt(3, 2, std::vector<ClassId>{kCar, kCar, kCar, kRoad, kRoad, kBg});
  const Mask pred(3, 2, std::vector<ClassId>{kCar, kCar, kRoad, kCar, kRoad, kBg});
  const auto cm = confusion(gt, pred, kPalette);
  ASSERT_EQ(cm.tp(kCar), 2u);
  ASSERT_EQ(cm.fp(kCar), 1u);
  ASSERT_EQ(cm.fn(kCar), 1u);
  const double dice = *dice_per_class(cm, kCar);
  const double jac = *jaccard_per_class(cm, kCar);
  EXPECT_NEAR(dice, 4.0 / 6.0, 1e-15);
  EXPECT_NEAR(jac, 0.5, 1e-15);
  EXPECT_NEAR(dice / (2.0 - dice), jac, 1e-15);
}

TEST(DiceJaccardTest, EdgeValues) {
  const Mask gt = row({kRoad, kRoad, kBg});
  EXPECT_FALSE(dice_per_class(confusion(gt, gt, kPalette), kCar).has_value());
  EXPECT_FALSE(jaccard_per_class(confusion(gt, gt, kPalette), kCar).has_value());
  EXPECT_DOUBLE_EQ(*dice_per_class(confusion(gt, gt, kPalette), kRoad), 1.0);
  EXPECT_DOUBLE_EQ(*jaccard_per_class(confusion(gt, gt, kPalette), kRoad), 1.0);
  const auto disjoint = confusion(row({kCar, kBg}), row({kBg, kCar}), kPalette);
  EXPECT_DOUBLE_EQ(*jaccard_per_class(disjoint, kCar), 0.0);
  EXPECT_DOUBLE_EQ(*dice_per_class(disjoint, kCar), 0.0);
  EXPECT_THROW(dice_per_class(disjoint, 9), Error);
  EXPECT_THROW(jaccard_per_class(disjoint, 9), Error);
}

TEST(DiceJaccardTest, SymmetricUnderSwap) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Mask a = testing::random_mask(rng, 20, 20, {kBg, kRoad, kCar});
    const Mask b = testing::random_mask(rng, 20, 20, {kBg, kRoad, kCar});
    const auto ab = confusion(a, b, kPalette), ba = confusion(b, a, kPalette);
    for (ClassId c : {kBg, kRoad, kCar}) {
      EXPECT_EQ(dice_per_class(ab, c), dice_per_class(ba, c));
      EXPECT_EQ(jaccard_per_class(ab, c), jaccard_per_class(ba, c));
    }
  }
}

TEST(MacroAverageTest, Examples) {
  const std::vector<ClassScore> s{{kBg, 0.2}, {kRoad, 1.0}, {kCar, 0.5}};
  EXPECT_DOUBLE_EQ(macro_average(s, kBg), 0.75);
  EXPECT_NEAR(macro_average(s), (0.2 + 1.0 + 0.5) / 3.0, 1e-15);
  const std::vector<ClassScore> u{{kBg, 0.2}, {kRoad, std::nullopt}, {kCar, 0.5}};
  EXPECT_DOUBLE_EQ(macro_average(u, kBg), 0.5);
  const std::vector<ClassScore> none{{kBg, 0.2}, {kRoad, std::nullopt}};
  try {
    macro_average(none, kBg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AllUndefined);
  }
}

TEST(MacroAverageTest, PublishedMacroValuesBreakThePerClassIdentity) {
  EXPECT_NEAR(0.7955 / (2.0 - 0.7955), 0.6605, 1e-4);
  EXPECT_GT(std::abs(0.7955 / (2.0 - 0.7955) - 0.6836), 1e-2);

  // Rows: ground truth bg/road/car; columns: prediction.
  const ConfusionMatrix cm({kBg, kRoad, kCar}, {1000, 24, 155, 25, 363, 0, 160, 0, 298});
  const double md = macro_average(dice_scores(cm), kBg);
  const double mj = macro_average(jaccard_scores(cm), kBg);
  EXPECT_NEAR(md, 0.7955, 1e-4);
  EXPECT_NEAR(mj, 0.6836, 1e-4);
  EXPECT_NEAR(md / (2.0 - md), 0.6605, 1e-4);
  for (ClassId c : {kRoad, kCar}) {
    const double d = *dice_per_class(cm, c);
    EXPECT_NEAR(*jaccard_per_class(cm, c), d / (2.0 - d), 1e-12);
  }
}

TEST(FocalLossTest, Examples) {
  const Mask gt = row({kCar});
  ProbabilityMap one{1, 1, 3, {0.0, 0.0, 1.0}};
  EXPECT_DOUBLE_EQ(focal_loss(one, gt, kPalette, FocalParams::uniform(3)), 0.0);

  ProbabilityMap half{1, 1, 3, {0.25, 0.25, 0.5}};
  EXPECT_NEAR(focal_loss(half, gt, kPalette, FocalParams::uniform(3, 2.0)), 0.25 * std::log(2.0), 1e-15);
  EXPECT_NEAR(focal_loss(half, gt, kPalette, FocalParams::uniform(3, 2.0)), 0.1733, 1e-4);
}

TEST(FocalLossTest, GammaZeroIsCrossEntropy) {
  std::mt19937_64 rng(4);
  const Mask gt = testing::random_mask(rng, 8, 6, {kBg, kRoad, kCar});
  ProbabilityMap probs{8, 6, 3, {}};
  std::uniform_real_distribution<double> u(0.01, 1.0);
  double ce = 0.0;
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 8; ++x) {
      double p[3] = {u(rng), u(rng), u(rng)};
      const double s = p[0] + p[1] + p[2];
      for (double& v : p) {
        v /= s;
        probs.values.push_back(v);
      }
      ce -= std::log(p[kPalette.index_of(gt.at(x, y))]);
    }
  }
  ce /= 48.0;
  EXPECT_NEAR(focal_loss(probs, gt, kPalette, FocalParams::uniform(3, 0.0)), ce, 1e-12);
  EXPECT_LT(focal_loss(probs, gt, kPalette, FocalParams::uniform(3, 2.0)), ce);
}

TEST(FocalLossTest, ClampsZeroProbability) {
  ProbabilityMap p{1, 1, 3, {1.0, 0.0, 0.0}};
  EXPECT_NEAR(focal_loss(p, row({kCar}), kPalette, FocalParams::uniform(3)), -std::log(kFocalEpsilon), 1e-9);
}

TEST(FocalLossTest, Errors) {
  ProbabilityMap bad{1, 1, 3, {0.5, 0.2, 0.2}};
  try {
    focal_loss(bad, row({kCar}), kPalette, FocalParams::uniform(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadDistribution);
  }
  ProbabilityMap ok{1, 1, 3, {0.5, 0.25, 0.25}};
  try {
    focal_loss(ok, row({kCar, kCar}), kPalette, FocalParams::uniform(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(EvaluateTest, ReportsBothMacroVariants) {
  const Mask gt = row({kBg, kRoad, kCar, kCar});
  const Mask pred = row({kBg, kRoad, kCar, kRoad});
  const auto r = evaluate(confusion(gt, pred, kPalette), kPalette);
  ASSERT_EQ(r.classes.size(), 3u);
  EXPECT_DOUBLE_EQ(*r.foreground_accuracy, 2.0 / 3.0);
  // road: TP1 FP1 FN0 -> 2/3 ; car: TP1 FP0 FN1 -> 2/3 ; bg: 1
  EXPECT_NEAR(*r.macro_dice, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(*r.macro_dice_with_bg, (1.0 + 4.0 / 3.0) / 3.0, 1e-15);
  const auto csv = report_csv(r, "img");
  EXPECT_NE(csv.find("img,car,1,0,1,2,"), std::string::npos);
  EXPECT_NE(report_json(r).find("\"macro_jaccard_with_background\""), std::string::npos);
}

}  // namespace
}  // namespace parkseg
