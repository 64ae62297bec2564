#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "parkseg/augment.hpp"
#include "parkseg/errmask.hpp"
#include "parkseg/error.hpp"
#include "parkseg/manifest.hpp"
#include "parkseg/metrics.hpp"
#include "parkseg/parkdetect.hpp"
#include "parkseg/png_codec.hpp"
#include "parkseg/synthscene.hpp"

namespace parkseg::cli {

namespace fs = std::filesystem;

namespace {

// Seed used when --seed is absent.
constexpr std::uint64_t kDefaultSeed = 0;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string palette_path;
  std::string out_dir;
  int kernel = 15;
  int tolerance = 0;
  int jobs = 1;
};

Palette load_palette(const Common& c) {
  if (c.palette_path.empty()) return Palette::default_four_class();
  if (!fs::is_regular_file(c.palette_path)) throw UsageError("palette file not found: " + c.palette_path);
  return Palette::load(c.palette_path);
}

void check_kernel(int kernel) {
  if (kernel < 1 || kernel % 2 == 0) throw UsageError("--kernel must be odd and positive");
}

void prepare_out(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out is required");
  fs::create_directories(dir);
}

// Expands files and directories (non-recursive, *.png) into a sorted list.
std::vector<fs::path> collect_pngs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
      }
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw UsageError("input not found: " + in);
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::map<std::string, fs::path> by_stem(const std::vector<fs::path>& files, std::vector<std::string>& problems) {
  std::map<std::string, fs::path> out;
  for (const auto& f : files) {
    const auto stem = f.stem().string();
    if (!out.emplace(stem, f).second)
      problems.push_back("stem collision: " + out[stem].string() + " and " + f.string());
  }
  return out;
}

std::string join(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

// Runs task(i) for i in [0, n) on up to `jobs` threads. Each task writes only
// its own slot, so the results do not depend on scheduling.
template <class Task>
void parallel_for(std::size_t n, int jobs, Task task) {
  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 64));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct Outcome {
  bool ok = true;
  std::string message;
};

int report_outcomes(const std::vector<Outcome>& outcomes, std::ostream& err) {
  int status = kExitOk;
  for (const auto& o : outcomes) {
    if (!o.ok) {
      err << o.message << '\n';
      status = kExitFailure;
    }
  }
  return status;
}

std::optional<ClassId> resolve_class_name(const Palette& palette, const std::string& name) {
  if (name.empty()) return std::nullopt;
  const auto* e = palette.find_name(name);
  if (!e) throw UsageError("class '" + name + "' is not in the palette");
  return e->id;
}

ErrorMode parse_mode(const Palette& palette, const std::string& mode) {
  if (mode == "all-foreground") return ErrorMode::all_foreground();
  if (mode.rfind("class:", 0) == 0) return ErrorMode::only(*resolve_class_name(palette, mode.substr(6)));
  throw UsageError("--mode must be all-foreground or class:NAME");
}

// ---------------------------------------------------------------------------

int cmd_detect_parked(const Common& c, const std::vector<std::string>& inputs, const std::string& parked_class,
                      std::ostream& out, std::ostream& err) {
  check_kernel(c.kernel);
  const Palette palette = load_palette(c);
  ParkedOptions options{c.kernel, resolve_class_name(palette, parked_class)};
  const auto files = collect_pngs(inputs);
  std::vector<std::string> problems;
  by_stem(files, problems);
  if (!problems.empty()) {
    for (const auto& p : problems) err << p << '\n';
    return kExitFailure;
  }
  prepare_out(c.out_dir);

  std::vector<Outcome> outcomes(files.size());
  std::vector<std::size_t> relabeled(files.size(), 0);
  parallel_for(files.size(), c.jobs, [&](std::size_t i) {
    const auto& f = files[i];
    try {
      const Mask mask = decode_mask(read_file(f.string()), palette, c.tolerance);
      const auto result = detect_parked(mask, palette, options);
      const auto stem = f.stem().string();
      write_file_atomic(join(c.out_dir, stem + ".png"), encode_mask(result.mask, palette));
      write_file_atomic(join(c.out_dir, stem + ".verdicts.csv"), verdict_report(result.verdicts));
      relabeled[i] = static_cast<std::size_t>(
          std::count_if(result.verdicts.begin(), result.verdicts.end(), [](const auto& v) { return v.reclassified; }));
    } catch (const std::exception& e) {
      outcomes[i] = {false, f.string() + ": " + e.what()};
    }
  });
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (outcomes[i].ok) out << files[i].string() << ": " << relabeled[i] << " component(s) relabeled parked\n";
  }
  return report_outcomes(outcomes, err);
}

struct Pairing {
  std::vector<std::pair<fs::path, fs::path>> pairs;
  std::vector<std::string> problems;
};

Pairing pair_dirs(const std::string& left, const std::string& right, const char* left_name, const char* right_name) {
  Pairing p;
  const auto l = by_stem(collect_pngs({left}), p.problems);
  const auto r = by_stem(collect_pngs({right}), p.problems);
  for (const auto& [stem, path] : l) {
    auto it = r.find(stem);
    if (it == r.end()) p.problems.push_back(std::string("unpaired ") + left_name + " file: " + path.string());
    else p.pairs.emplace_back(path, it->second);
  }
  for (const auto& [stem, path] : r) {
    if (!l.count(stem)) p.problems.push_back(std::string("unpaired ") + right_name + " file: " + path.string());
  }
  return p;
}

int cmd_eval(const Common& c, const std::string& gt_dir, const std::string& pred_dir, std::ostream& out,
             std::ostream& err) {
  const Palette palette = load_palette(c);
  const auto pairing = pair_dirs(gt_dir, pred_dir, "ground-truth", "prediction");
  if (!pairing.problems.empty()) {
    for (const auto& p : pairing.problems) err << p << '\n';
    return kExitFailure;
  }
  prepare_out(c.out_dir);

  const auto n = pairing.pairs.size();
  std::vector<Outcome> outcomes(n);
  std::vector<std::optional<ConfusionMatrix>> matrices(n);
  parallel_for(n, c.jobs, [&](std::size_t i) {
    const auto& [g, p] = pairing.pairs[i];
    try {
      const Mask gt = decode_mask(read_file(g.string()), palette, c.tolerance);
      const Mask pred = decode_mask(read_file(p.string()), palette, c.tolerance);
      matrices[i] = confusion(gt, pred, palette);
    } catch (const std::exception& e) {
      outcomes[i] = {false, g.string() + " vs " + p.string() + ": " + e.what()};
    }
  });
  if (const int status = report_outcomes(outcomes, err); status != kExitOk) return status;

  ConfusionMatrix total = make_confusion(palette);
  std::string csv = "scope,class,tp,fp,fn,tn,dice,jaccard\n";
  nlohmann::json images = nlohmann::json::object();
  for (std::size_t i = 0; i < n; ++i) {
    total += *matrices[i];
    const auto stem = pairing.pairs[i].first.stem().string();
    const auto report = evaluate(*matrices[i], palette);
    csv += report_csv(report, stem);
    images[stem] = nlohmann::json::parse(report_json(report));
  }
  const auto aggregate = evaluate(total, palette);
  csv += report_csv(aggregate, "aggregate");
  const nlohmann::json doc{{"images", images}, {"aggregate", nlohmann::json::parse(report_json(aggregate))}};
  write_file_atomic(join(c.out_dir, "eval.csv"), csv);
  write_file_atomic(join(c.out_dir, "eval.json"), doc.dump(2) + "\n");

  auto show = [](const std::optional<double>& v) {
    std::ostringstream os;
    if (v) os << *v;
    else os << "undefined";
    return os.str();
  };
  out << "images: " << n << '\n'
      << "foreground_accuracy: " << show(aggregate.foreground_accuracy) << '\n'
      << "macro_dice: " << show(aggregate.macro_dice) << '\n'
      << "macro_jaccard: " << show(aggregate.macro_jaccard) << '\n';
  return kExitOk;
}

int cmd_errmask(const Common& c, const std::string& gt_dir, const std::string& pred_dir, const std::string& mode_text,
                std::ostream& out, std::ostream& err) {
  const Palette palette = load_palette(c);
  const ErrorMode mode = parse_mode(palette, mode_text);
  const auto pairing = pair_dirs(gt_dir, pred_dir, "ground-truth", "prediction");
  if (!pairing.problems.empty()) {
    for (const auto& p : pairing.problems) err << p << '\n';
    return kExitFailure;
  }
  prepare_out(c.out_dir);

  std::vector<Outcome> outcomes(pairing.pairs.size());
  parallel_for(pairing.pairs.size(), c.jobs, [&](std::size_t i) {
    const auto& [g, p] = pairing.pairs[i];
    try {
      const Mask gt = decode_mask(read_file(g.string()), palette, c.tolerance);
      const Mask pred = decode_mask(read_file(p.string()), palette, c.tolerance);
      write_file_atomic(join(c.out_dir, g.stem().string() + ".png"), encode_png(error_mask(gt, pred, palette, mode)));
    } catch (const std::exception& e) {
      outcomes[i] = {false, g.string() + " vs " + p.string() + ": " + e.what()};
    }
  });
  out << "error masks: " << pairing.pairs.size() << '\n';
  return report_outcomes(outcomes, err);
}

int cmd_augment(const Common& c, const std::string& images_dir, const std::string& masks_dir,
                const std::string& spec_path, int count, std::optional<std::uint64_t> seed, std::ostream& out,
                std::ostream& err) {
  if (count < 0) throw UsageError("--count must be non-negative");
  const Palette palette = load_palette(c);
  AugmentSpec spec = AugmentSpec::defaults(kDefaultSeed);
  if (!spec_path.empty()) {
    if (!fs::is_regular_file(spec_path)) throw UsageError("augmentation spec not found: " + spec_path);
    const auto bytes = read_file(spec_path);
    spec = parse_augment_spec(std::string(bytes.begin(), bytes.end()));
  }
  if (seed) spec.seed = *seed;

  const auto pairing = pair_dirs(images_dir, masks_dir, "image", "mask");
  if (!pairing.problems.empty()) {
    for (const auto& p : pairing.problems) err << p << '\n';
    return kExitFailure;
  }
  prepare_out(c.out_dir);

  const auto k = static_cast<std::size_t>(count);
  std::vector<Outcome> outcomes(pairing.pairs.size());
  parallel_for(pairing.pairs.size(), c.jobs, [&](std::size_t i) {
    const auto& [img_path, mask_path] = pairing.pairs[i];
    try {
      const RgbImage image = decode_png(read_file(img_path.string()));
      const Mask mask = decode_mask(read_file(mask_path.string()), palette, c.tolerance);
      const auto stem = img_path.stem().string();
      for (std::size_t j = 0; j < k; ++j) {
        const std::uint64_t index = i * k + j;
        const auto ops = sample_augmentation(spec, index, image.width(), image.height());
        const auto [aug_img, aug_mask] = apply_ops(image, mask, ops);
        const auto base = stem + "_aug" + std::to_string(j);
        write_file_atomic(join(c.out_dir, base + ".png"), encode_png(aug_img));
        write_file_atomic(join(c.out_dir, base + "_mask.png"), encode_mask(aug_mask, palette));
        const nlohmann::json provenance{{"source_image", img_path.filename().string()},
                                        {"source_mask", mask_path.filename().string()},
                                        {"seed", spec.seed},
                                        {"index", index},
                                        {"ops", nlohmann::json::parse(ops_to_json(ops))}};
        write_file_atomic(join(c.out_dir, base + ".json"), provenance.dump(2) + "\n");
      }
    } catch (const std::exception& e) {
      outcomes[i] = {false, img_path.string() + ": " + e.what()};
    }
  });
  out << "augmented pairs: " << pairing.pairs.size() * k << '\n';
  return report_outcomes(outcomes, err);
}

struct SynthArgs {
  int seeds = 100;
  std::uint64_t seed = kDefaultSeed;
  SceneParams params;
  bool write_masks = false;
};

int cmd_synth(const Common& c, const SynthArgs& a, std::ostream& out, std::ostream& err) {
  check_kernel(c.kernel);
  if (a.seeds < 0) throw UsageError("--seeds must be non-negative");
  const Palette palette = load_palette(c);
  prepare_out(c.out_dir);

  const auto n = static_cast<std::size_t>(a.seeds);
  std::vector<Outcome> outcomes(n);
  std::vector<SceneScore> scores(n);
  parallel_for(n, c.jobs, [&](std::size_t i) {
    const std::uint64_t seed = a.seed + i;
    try {
      const auto spec = generate_random(seed, a.params);
      scores[i] = score_heuristic(spec, palette, c.kernel);
      if (a.write_masks) {
        const auto base = "scene_" + std::to_string(seed);
        const auto scene = render(spec, palette);
        const auto detected = detect_parked(scene.mask, palette, ParkedOptions{c.kernel, std::nullopt});
        write_file_atomic(join(c.out_dir, base + ".json"), to_json(spec) + "\n");
        write_file_atomic(join(c.out_dir, base + ".png"), encode_mask(scene.mask, palette));
        write_file_atomic(join(c.out_dir, base + "_detected.png"), encode_mask(detected.mask, palette));
      }
    } catch (const std::exception& e) {
      outcomes[i] = {false, "seed " + std::to_string(seed) + ": " + e.what()};
    }
  });
  if (const int status = report_outcomes(outcomes, err); status != kExitOk) return status;

  std::ostringstream csv;
  csv << "seed,cars,correct,flagged_parked,accuracy\n";
  std::size_t cars = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = scores[i];
    csv << a.seed + i << ',' << s.cars.size() << ',' << s.correct << ',' << s.flagged_parked << ',';
    if (s.accuracy) csv << *s.accuracy;
    else csv << "no_cars";
    csv << '\n';
    cars += s.cars.size();
    correct += s.correct;
  }
  if (cars == 0) {
    csv << "aggregate," << cars << ',' << correct << ",,no_cars\n";
    out << "scenes: " << n << "\naccuracy: no cars\n";
  } else {
    const double acc = static_cast<double>(correct) / static_cast<double>(cars);
    csv << "aggregate," << cars << ',' << correct << ",," << acc << '\n';
    out << "scenes: " << n << "\ncars: " << cars << "\naccuracy: " << acc << '\n';
  }
  write_file_atomic(join(c.out_dir, "synth_scores.csv"), csv.str());
  return kExitOk;
}

int cmd_validate(const Common& c, const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  if (!fs::is_regular_file(manifest_path)) throw UsageError("manifest not found: " + manifest_path);
  const Palette palette = load_palette(c);
  const auto entries = load_manifest(manifest_path);
  ManifestCheck check{&palette, c.tolerance, fs::path(manifest_path).parent_path().string()};
  if (check.base_dir.empty()) check.base_dir = ".";
  const auto violations = validate_manifest(entries, check);
  for (const auto& v : violations) {
    err << manifest_path << ":" << entries[v.entry_index].line << ": " << to_string(v.kind) << ": " << v.detail
        << '\n';
  }
  out << "entries: " << entries.size() << ", violations: " << violations.size() << '\n';
  return violations.empty() ? kExitOk : kExitFailure;
}

void add_common(CLI::App* sub, Common& c, bool with_out = true) {
  sub->add_option("--palette", c.palette_path, "Palette JSON (default: built-in 4-class palette)");
  if (with_out) sub->add_option("--out", c.out_dir, "Output directory")->required();
  sub->add_option("--tolerance", c.tolerance, "Max RGB distance when decoding masks")->check(CLI::NonNegativeNumber);
  sub->add_option("--jobs", c.jobs, "Files processed in parallel")->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parked-car post-processing and segmentation evaluation"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::string> inputs;
  std::string parked_class;
  std::string gt_dir, pred_dir, mode = "all-foreground";
  std::string images_dir, masks_dir, spec_path, manifest_path;
  int count = 4;
  std::optional<std::uint64_t> aug_seed;
  SynthArgs synth;

  auto* detect = app.add_subcommand("detect-parked", "Relabel parked car components");
  add_common(detect, common);
  detect->add_option("--kernel", common.kernel, "Dilation kernel side (odd)");
  detect->add_option("--parked-class", parked_class, "Target class when the palette has no parked_car role");
  detect->add_option("inputs", inputs, "Mask files or directories")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate predicted masks against ground truth");
  add_common(eval, common);
  eval->add_option("--gt", gt_dir, "Ground-truth mask directory")->required();
  eval->add_option("--pred", pred_dir, "Predicted mask directory")->required();

  auto* errmask = app.add_subcommand("errmask", "Render error masks");
  add_common(errmask, common);
  errmask->add_option("--gt", gt_dir, "Ground-truth mask directory")->required();
  errmask->add_option("--pred", pred_dir, "Predicted mask directory")->required();
  errmask->add_option("--mode", mode, "all-foreground or class:NAME");

  auto* augment = app.add_subcommand("augment", "Write augmented image/mask pairs");
  add_common(augment, common);
  augment->add_option("--images", images_dir, "Image directory")->required();
  augment->add_option("--masks", masks_dir, "Mask directory")->required();
  augment->add_option("--spec", spec_path, "Augmentation spec JSON");
  augment->add_option("--count", count, "Augmented pairs per input");
  augment->add_option("--seed", aug_seed, "Random seed (default 0)");

  auto* synth_cmd = app.add_subcommand("synth", "Generate and score synthetic scenes");
  add_common(synth_cmd, common);
  synth_cmd->add_option("--kernel", common.kernel, "Dilation kernel side (odd)");
  synth_cmd->add_option("--seeds", synth.seeds, "Number of scenes");
  synth_cmd->add_option("--seed", synth.seed, "First seed (default 0)");
  synth_cmd->add_option("--width", synth.params.width);
  synth_cmd->add_option("--height", synth.params.height);
  synth_cmd->add_option("--roads", synth.params.roads);
  synth_cmd->add_option("--cars", synth.params.cars);
  synth_cmd->add_option("--parked-fraction", synth.params.parked_fraction);
  synth_cmd->add_option("--margin", synth.params.margin);
  synth_cmd->add_flag("--write-masks", synth.write_masks, "Also write scene specs and rendered masks");

  auto* validate = app.add_subcommand("validate", "Check a dataset manifest");
  add_common(validate, common, false);
  validate->add_option("--manifest", manifest_path, "Manifest file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*detect) return cmd_detect_parked(common, inputs, parked_class, out, err);
    if (*eval) return cmd_eval(common, gt_dir, pred_dir, out, err);
    if (*errmask) return cmd_errmask(common, gt_dir, pred_dir, mode, out, err);
    if (*augment) return cmd_augment(common, images_dir, masks_dir, spec_path, count, aug_seed, out, err);
    if (*synth_cmd) return cmd_synth(common, synth, out, err);
    if (*validate) return cmd_validate(common, manifest_path, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace parkseg::cli
