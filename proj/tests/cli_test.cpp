#include <gtest/gtest.h>

#include <sstream>

#include "cli.hpp"
#include "parkseg/errmask.hpp"
#include "parkseg/png_codec.hpp"
#include "parkseg/synthscene.hpp"
#include "test_support.hpp"

namespace parkseg {
namespace {

namespace fs = std::filesystem;
using testing::ScratchDir;
using testing::snapshot_tree;

const Palette kPalette = Palette::default_four_class();
constexpr ClassId kBg = 0, kRoad = 1, kCar = 2, kParked = 3;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void put_mask(const std::string& path, const Mask& m) { write_file_atomic(path, encode_mask(m, kPalette)); }

Mask load_mask(const std::string& path) { return decode_mask(read_file(path), kPalette); }

// One car in open background, one car on a road.
Mask two_car_mask() {
  Mask m(40, 30, kBg);
  for (int y = 18; y < 30; ++y)
    for (int x = 0; x < 40; ++x) m.at(x, y) = kRoad;
  for (int y = 4; y < 8; ++y)
    for (int x = 5; x < 10; ++x) m.at(x, y) = kCar;
  for (int y = 22; y < 25; ++y)
    for (int x = 20; x < 26; ++x) m.at(x, y) = kCar;
  return m;
}

TEST(CliDetectTest, RelabelsParkedCar) {
  ScratchDir in("cli_in"), out("cli_out");
  put_mask(in / "scene.png", two_car_mask());
  const auto r = run({"detect-parked", "--out", out.path().string(), in.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Mask result = load_mask(out / "scene.png");
  EXPECT_EQ(result.at(5, 4), kParked);
  EXPECT_EQ(result.at(20, 22), kCar);
  EXPECT_TRUE(fs::exists(out / "scene.verdicts.csv"));
  EXPECT_NE(r.out.find("1 component(s) relabeled parked"), std::string::npos);
}

TEST(CliDetectTest, OffPaletteColorNamesFileAndPixel) {
  ScratchDir in("cli_in"), out("cli_out");
  RgbImage img(4, 4);
  img.set(2, 1, {13, 14, 15});
  write_file_atomic(in / "bad.png", encode_png(img));
  const auto r = run({"detect-parked", "--out", out.path().string(), in / "bad.png"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("bad.png"), std::string::npos);
  EXPECT_NE(r.err.find("pixel (2,1)"), std::string::npos);
  EXPECT_FALSE(fs::exists(out / "bad.png"));
}

TEST(CliDetectTest, ParallelMatchesSequential) {
  ScratchDir in("cli_in"), seq("cli_seq"), par("cli_par");
  for (std::uint64_t s = 0; s < 6; ++s) {
    put_mask(in / ("s" + std::to_string(s) + ".png"), render(generate_random(s, SceneParams{}), kPalette).mask);
  }
  ASSERT_EQ(run({"detect-parked", "--out", seq.path().string(), in.path().string()}).code, 0);
  ASSERT_EQ(run({"detect-parked", "--jobs", "4", "--out", par.path().string(), in.path().string()}).code, 0);
  const auto a = snapshot_tree(seq.path());
  EXPECT_EQ(a.size(), 12u);
  EXPECT_EQ(a, snapshot_tree(par.path()));
}

TEST(CliDetectTest, UsageErrors) {
  ScratchDir in("cli_in"), out("cli_out");
  put_mask(in / "m.png", Mask(3, 3));
  EXPECT_EQ(run({"detect-parked", "--kernel", "4", "--out", out.path().string(), in.path().string()}).code, 2);
  EXPECT_EQ(run({"detect-parked", "--out", out.path().string(), in / "missing.png"}).code, 2);
  EXPECT_EQ(run({"detect-parked", in.path().string()}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"detect-parked", "--bogus", "--out", out.path().string(), in.path().string()}).code, 2);
}

TEST(CliEvalTest, IdenticalDirectoriesArePerfect) {
  ScratchDir gt("cli_gt"), out("cli_out");
  put_mask(gt / "a.png", two_car_mask());
  put_mask(gt / "b.png", render(generate_random(1, SceneParams{}), kPalette).mask);
  const auto r = run({"eval", "--gt", gt.path().string(), "--pred", gt.path().string(), "--out", out.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("foreground_accuracy: 1\n"), std::string::npos);
  EXPECT_NE(r.out.find("macro_dice: 1\n"), std::string::npos);
  EXPECT_NE(r.out.find("macro_jaccard: 1\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "eval.csv"));
  EXPECT_TRUE(fs::exists(out / "eval.json"));
}

TEST(CliEvalTest, CraftedPairScores) {
  ScratchDir gt("cli_gt"), pred("cli_pred"), out("cli_out");
  put_mask(gt / "x.png", Mask(3, 2, std::vector<ClassId>{kCar, kCar, kCar, kRoad, kRoad, kBg}));
  put_mask(pred / "x.png", Mask(3, 2, std::vector<ClassId>{kCar, kCar, kRoad, kCar, kRoad, kBg}));
  const auto r = run({"eval", "--gt", gt.path().string(), "--pred", pred.path().string(), "--out", out.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  // car dice 4/6, road dice 2/4 (parked_car absent, undefined)
  const auto csv = snapshot_tree(out.path()).at("eval.csv");
  EXPECT_NE(csv.find("x,car,2,1,1,2,0.6666666667,0.5"), std::string::npos) << csv;
}

TEST(CliEvalTest, UnpairedFileFails) {
  ScratchDir gt("cli_gt"), pred("cli_pred"), out("cli_out");
  put_mask(gt / "a.png", Mask(2, 2));
  put_mask(gt / "b.png", Mask(2, 2));
  put_mask(pred / "a.png", Mask(2, 2));
  const auto r = run({"eval", "--gt", gt.path().string(), "--pred", pred.path().string(), "--out", out.path().string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("b.png"), std::string::npos);
}

TEST(CliErrmaskTest, IdenticalPairHasNoErrors) {
  ScratchDir gt("cli_gt"), out("cli_out");
  put_mask(gt / "a.png", two_car_mask());
  const auto r =
      run({"errmask", "--gt", gt.path().string(), "--pred", gt.path().string(), "--out", out.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto counts = count_error_colors(decode_png(read_file(out / "a.png")));
  EXPECT_EQ(counts.red + counts.green + counts.other, 0u);
  EXPECT_EQ(counts.white, 40u * 12u + 20u);
  EXPECT_EQ(run({"errmask", "--mode", "class:truck", "--gt", gt.path().string(), "--pred", gt.path().string(), "--out",
                 out.path().string()})
                .code,
            2);
}

TEST(CliSynthTest, WellSeparatedScenesAreAllCorrect) {
  ScratchDir out("cli_out");
  const auto r = run({"synth", "--seeds", "30", "--out", out.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("accuracy: 1\n"), std::string::npos) << r.out;
  const auto csv = snapshot_tree(out.path()).at("synth_scores.csv");
  EXPECT_EQ(csv.rfind("seed,cars,correct,flagged_parked,accuracy\n", 0), 0u);
  EXPECT_NE(csv.find("aggregate,180,180,,1\n"), std::string::npos);
}

TEST(CliSynthTest, WriteMasksIsDeterministic) {
  ScratchDir a("cli_a"), b("cli_b");
  ASSERT_EQ(run({"synth", "--seeds", "4", "--seed", "9", "--write-masks", "--out", a.path().string()}).code, 0);
  ASSERT_EQ(run({"synth", "--seeds", "4", "--seed", "9", "--write-masks", "--jobs", "3", "--out", b.path().string()})
                .code,
            0);
  const auto snap = snapshot_tree(a.path());
  EXPECT_EQ(snap.size(), 13u);
  EXPECT_EQ(snap, snapshot_tree(b.path()));
  EXPECT_EQ(parse_scene(snap.at("scene_9.json")), generate_random(9, SceneParams{}));
}

TEST(CliAugmentTest, SameSeedSameTree) {
  ScratchDir img("cli_img"), msk("cli_msk"), a("cli_a"), b("cli_b"), c("cli_c");
  std::mt19937_64 rng(3);
  for (const std::string stem : {"p", "q"}) {
    const Mask m = testing::random_blob_mask(rng, 32, 24, {kBg, kRoad, kCar}, 6);
    put_mask(msk / (stem + ".png"), m);
    write_file_atomic(img / (stem + ".png"), encode_mask(m, kPalette));
  }
  const std::vector<std::string> base{"augment", "--images", img.path().string(), "--masks", msk.path().string(),
                                      "--count", "3", "--seed", "5", "--out"};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  };
  ASSERT_EQ(with({a.path().string()}).code, 0);
  ASSERT_EQ(with({b.path().string(), "--jobs", "2"}).code, 0);
  const auto snap = snapshot_tree(a.path());
  EXPECT_EQ(snap.size(), 18u);
  EXPECT_EQ(snap, snapshot_tree(b.path()));
  EXPECT_TRUE(snap.count("q_aug2_mask.png"));

  auto args = base;
  args[8] = "6";
  args.push_back(c.path().string());
  ASSERT_EQ(run(args).code, 0);
  EXPECT_NE(snap, snapshot_tree(c.path()));
}

TEST(CliValidateTest, ReportsCollisionsAndMissingFiles) {
  ScratchDir dir("cli_manifest");
  put_mask(dir / "m1.png", Mask(2, 2));
  write_file_atomic(dir / "i1.png", encode_png(RgbImage(2, 2)));
  {
    std::ofstream f(dir / "ok.csv");
    f << "# image,mask,split\ni1.png,m1.png,train\n";
  }
  {
    std::ofstream f(dir / "bad.csv");
    f << "i1.png,m1.png,train\ni1.png,m1.png,test\ni2.png,m1.png,valid\n";
  }
  const auto ok = run({"validate", "--manifest", dir / "ok.csv"});
  EXPECT_EQ(ok.code, 0) << ok.err;
  const auto bad = run({"validate", "--manifest", dir / "bad.csv"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("DuplicateAcrossSplits"), std::string::npos) << bad.err;
  EXPECT_NE(bad.err.find("MissingImage"), std::string::npos) << bad.err;
  EXPECT_EQ(run({"validate", "--manifest", dir / "nope.csv"}).code, 2);
}

}  // namespace
}  // namespace parkseg
