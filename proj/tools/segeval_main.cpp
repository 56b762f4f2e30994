// segeval: validate, augment, split, evaluate, and synthesize
// instance-segmentation datasets from the command line.

#include "segeval/augment.hpp"
#include "segeval/dataset_io.hpp"
#include "segeval/eval.hpp"
#include "segeval/model.hpp"
#include "segeval/png_io.hpp"
#include "segeval/report.hpp"
#include "segeval/split.hpp"
#include "segeval/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace segeval;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitUsage = 2;

void echo_config(const std::string& command, const json& resolved) {
  json j;
  j["command"] = command;
  j["config"] = resolved;
  std::cerr << j.dump() << "\n";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EvalConfig make_eval_config(const std::string& iou, const std::string& mode,
                            const std::string& threshold_set, bool exclude_other) {
  EvalConfig cfg;
  cfg.iou_kind = iou == "bbox" ? IouKind::bbox : IouKind::mask;
  cfg.mode = mode == "binary" ? EvalMode::binary : EvalMode::multiclass;
  cfg.thresholds = threshold_set == "50-90" ? narrow_thresholds() : coco_thresholds();
  cfg.include_other = !exclude_other;
  return cfg;
}

struct EvalArgs {
  std::string gt_path, pred_path;
  std::string mode = "multiclass";
  std::string iou = "mask";
  std::string thresholds = "coco";
  std::string out_json, out_csv;
  std::string label = "run";
  bool exclude_other = false;
  bool no_check_images = false;
  bool per_class = false;
  int threads = 1;
};

int run_evaluate(const EvalArgs& a) {
  echo_config("evaluate", {{"gt", a.gt_path},
                           {"pred", a.pred_path},
                           {"mode", a.mode},
                           {"iou", a.iou},
                           {"thresholds", a.thresholds},
                           {"exclude_other", a.exclude_other},
                           {"label", a.label},
                           {"threads", a.threads}});
  LoadOptions opts;
  opts.check_images = !a.no_check_images;
  const Dataset gt = load_dataset(fs::path(a.gt_path), opts);
  const PredictionSet preds = load_predictions(a.pred_path, gt);

  std::vector<EvalReport> reports;
  const std::vector<std::string> kinds =
      a.iou == "both" ? std::vector<std::string>{"mask", "bbox"}
                      : std::vector<std::string>{a.iou};
  for (const auto& kind : kinds) {
    EvalConfig cfg = make_eval_config(kind, a.mode, a.thresholds, a.exclude_other);
    EvalReport report = evaluate(gt, preds, cfg, a.threads);
    report.label = a.label;
    reports.push_back(std::move(report));
  }

  std::cout << render_summary(reports, ReportFormat::text) << "\n";
  if (a.per_class || a.mode != "binary")
    std::cout << render_class_table(reports, ReportFormat::text);

  if (!a.out_json.empty()) {
    if (reports.size() == 1) {
      write_file_atomic(a.out_json, report_to_json_string(reports[0]));
    } else {
      for (const auto& r : reports) {
        fs::path p(a.out_json);
        const std::string kind = iou_kind_name(r.config.iou_kind);
        fs::path named = p.parent_path() / (p.stem().string() + "." + kind + p.extension().string());
        write_file_atomic(named, report_to_json_string(r));
      }
    }
  }
  if (!a.out_csv.empty())
    write_file_atomic(a.out_csv, render_class_table(reports, ReportFormat::csv));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"instance-segmentation dataset tooling: validation, augmentation, "
               "splitting, COCO-style evaluation, synthetic scenes"};
  app.require_subcommand(1);

  // ---- validate ----
  auto* validate_cmd = app.add_subcommand("validate", "check dataset invariants");
  std::string validate_input;
  bool validate_no_images = false;
  validate_cmd->add_option("--manifest", validate_input, "manifest or annotations JSON")
      ->required();
  validate_cmd->add_flag("--no-check-images", validate_no_images,
                         "do not require image files to exist");

  // ---- augment ----
  auto* augment_cmd = app.add_subcommand("augment", "offline label-preserving augmentation");
  struct {
    std::string manifest, out;
    double threshold = 0.9;
    std::string grid = "default";
    std::string fill = "mean-rgb";
    std::vector<int> fill_color{0, 0, 0};
    std::uint64_t seed = 0;
    int threads = 1;
  } aug;
  augment_cmd->add_option("--manifest", aug.manifest, "input manifest")->required();
  augment_cmd->add_option("--out", aug.out, "output dataset directory")->required();
  augment_cmd->add_option("--area-threshold", aug.threshold,
                          "minimum kept-area ratio per instance (0,1]");
  augment_cmd->add_option("--grid", aug.grid, "offline grid: default|rotation-scale|none")
      ->check(CLI::IsMember({"default", "rotation-scale", "none"}));
  augment_cmd->add_option("--fill", aug.fill, "fill policy: mean-rgb|constant")
      ->check(CLI::IsMember({"mean-rgb", "constant"}));
  augment_cmd->add_option("--fill-color", aug.fill_color, "constant fill R G B")
      ->expected(3);
  augment_cmd->add_option("--seed", aug.seed, "rng seed recorded in the output");
  augment_cmd->add_option("--threads", aug.threads, "worker threads");

  // ---- split ----
  auto* split_cmd = app.add_subcommand("split", "class-balanced stratified splitting");
  struct {
    std::string manifest, out_csv, out_annotations;
    double train = 0.6, val = 0.2, test = 0.2;
    int quota = 7, tolerance = 1, attempts = 8;
    std::uint64_t seed = 0;
    bool best_effort = false, force = false, no_check_images = false;
    int threads = 1;
  } sp;
  split_cmd->add_option("--manifest", sp.manifest, "input manifest")->required();
  split_cmd->add_option("--train", sp.train, "train fraction");
  split_cmd->add_option("--val", sp.val, "val fraction");
  split_cmd->add_option("--test", sp.test, "test fraction");
  split_cmd->add_option("--quota", sp.quota, "target instances per class in val/test");
  split_cmd->add_option("--tolerance", sp.tolerance, "allowed deviation from the quota");
  split_cmd->add_option("--attempts", sp.attempts, "randomized restarts");
  split_cmd->add_option("--seed", sp.seed, "rng seed");
  split_cmd->add_option("--out-csv", sp.out_csv, "write frame_id,split CSV here");
  split_cmd->add_option("--out-annotations", sp.out_annotations,
                        "write the tagged annotation JSON here");
  split_cmd->add_flag("--best-effort", sp.best_effort, "tolerate infeasible quotas");
  split_cmd->add_flag("--force", sp.force, "allow re-splitting tagged data");
  split_cmd->add_flag("--no-check-images", sp.no_check_images,
                      "do not require image files to exist");
  split_cmd->add_option("--threads", sp.threads, "worker threads");

  // ---- evaluate ----
  auto* eval_cmd = app.add_subcommand("evaluate", "COCO-style AP/AR evaluation");
  EvalArgs ev;
  eval_cmd->add_option("--gt", ev.gt_path, "ground-truth manifest or annotations JSON")
      ->required();
  eval_cmd->add_option("--pred", ev.pred_path, "predictions JSON")->required();
  eval_cmd->add_option("--mode", ev.mode, "binary|multiclass")
      ->check(CLI::IsMember({"binary", "multiclass"}));
  eval_cmd->add_option("--iou", ev.iou, "mask|bbox|both")
      ->check(CLI::IsMember({"mask", "bbox", "both"}));
  eval_cmd->add_option("--thresholds", ev.thresholds, "coco (0.50:0.95) or 50-90")
      ->check(CLI::IsMember({"coco", "50-90"}));
  eval_cmd->add_option("--label", ev.label, "run label shown in tables");
  eval_cmd->add_option("--out-json", ev.out_json, "write the report JSON here");
  eval_cmd->add_option("--out-csv", ev.out_csv, "write the per-class CSV here");
  eval_cmd->add_flag("--exclude-other", ev.exclude_other,
                     "leave the Other class out of the aggregate");
  eval_cmd->add_flag("--no-check-images", ev.no_check_images,
                     "do not require image files to exist");
  eval_cmd->add_flag("--per-class", ev.per_class, "always print the per-class table");
  eval_cmd->add_option("--threads", ev.threads, "worker threads");

  // ---- synth ----
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  struct {
    std::string out;
    int frames = 20;
    int width = 540, height = 360;
    int min_inst = 1, max_inst = 3;
    std::string shape = "capsule";
    std::uint64_t seed = 0;
    std::string pred_out;
    double jitter = 0, drop = 0, spurious = 0, flip = 0;
    int threads = 1;
  } sy;
  synth_cmd->add_option("--out", sy.out, "output dataset directory")->required();
  synth_cmd->add_option("--frames", sy.frames, "number of frames");
  synth_cmd->add_option("--width", sy.width, "frame width");
  synth_cmd->add_option("--height", sy.height, "frame height");
  synth_cmd->add_option("--min-instances", sy.min_inst, "min instruments per frame");
  synth_cmd->add_option("--max-instances", sy.max_inst, "max instruments per frame");
  synth_cmd->add_option("--shape", sy.shape, "capsule|rotated-rect")
      ->check(CLI::IsMember({"capsule", "rotated-rect"}));
  synth_cmd->add_option("--seed", sy.seed, "rng seed");
  synth_cmd->add_option("--pred-out", sy.pred_out,
                        "also write perturbed predictions to this file");
  synth_cmd->add_option("--jitter", sy.jitter, "prediction jitter amplitude, px");
  synth_cmd->add_option("--drop", sy.drop, "prediction drop probability");
  synth_cmd->add_option("--spurious", sy.spurious, "spurious predictions per frame");
  synth_cmd->add_option("--flip", sy.flip, "class flip probability");
  synth_cmd->add_option("--threads", sy.threads, "worker threads");

  // ---- report ----
  auto* report_cmd = app.add_subcommand("report", "render stored report JSON");
  struct {
    std::vector<std::string> inputs;
    std::string style = "summary";
    std::string format = "text";
    std::string out;
  } rp;
  report_cmd->add_option("--in", rp.inputs, "report JSON files (one per IoU kind)")
      ->required()
      ->expected(1, 2);
  report_cmd->add_option("--style", rp.style, "summary|per-class")
      ->check(CLI::IsMember({"summary", "per-class"}));
  report_cmd->add_option("--format", rp.format, "text|csv")
      ->check(CLI::IsMember({"text", "csv"}));
  report_cmd->add_option("--out", rp.out, "write rendering here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*validate_cmd) {
      echo_config("validate", {{"manifest", validate_input},
                               {"check_images", !validate_no_images}});
      LoadOptions opts;
      opts.check_images = !validate_no_images;
      // Loading already fails on hard violations; report soft ones explicitly.
      Dataset ds;
      try {
        ds = load_dataset(fs::path(validate_input), opts);
      } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitDataError;
      }
      const auto violations = validate_dataset(ds);
      if (violations.empty()) {
        std::cout << "ok: " << ds.frames.size() << " frames, " << total_instances(ds)
                  << " instances, " << ds.taxonomy.size() << " categories\n";
        return kExitOk;
      }
      for (const auto& v : violations)
        std::cout << v.rule << "\t" << v.frame_id << "\t" << v.detail << "\n";
      return kExitDataError;
    }

    if (*augment_cmd) {
      echo_config("augment", {{"manifest", aug.manifest},
                              {"out", aug.out},
                              {"area_threshold", aug.threshold},
                              {"grid", aug.grid},
                              {"fill", aug.fill},
                              {"seed", aug.seed},
                              {"threads", aug.threads}});
      const Dataset ds = load_dataset(fs::path(aug.manifest));

      AugmentationConfig cfg;
      cfg.preservation_threshold = aug.threshold;
      cfg.seed = aug.seed;
      cfg.fill_policy = aug.fill == "constant" ? FillPolicy::constant : FillPolicy::mean_rgb;
      cfg.fill_color = {static_cast<std::uint8_t>(aug.fill_color[0]),
                        static_cast<std::uint8_t>(aug.fill_color[1]),
                        static_cast<std::uint8_t>(aug.fill_color[2])};
      if (aug.grid == "default") cfg.offline_grid = default_offline_grid();
      else if (aug.grid == "rotation-scale") cfg.offline_grid = rotation_scale_grid();

      const fs::path out_root(aug.out);
      DatasetManifest out_manifest;
      out_manifest.root = out_root;
      out_manifest.images = "images";

      const ImageLoader loader = [](const AnnotatedFrame& f) {
        return read_image_png(f.image_ref);
      };
      const FrameSink sink = [&](const AnnotatedFrame& meta, const Image& image) {
        const fs::path rel = fs::path("images") / (meta.frame_id + ".png");
        write_image_png((out_root / rel).string(), image);
        return (out_root / rel).string();
      };

      const AugmentResult result = offline_augment(ds, cfg, loader, sink, aug.threads);
      save_dataset(result.dataset, out_manifest);
      save_manifest(out_manifest, out_root / "manifest.json");
      std::cout << "frames in: " << ds.frames.size() << "\n"
                << "frames out: " << result.dataset.frames.size() << "\n"
                << "augmented kept: " << result.kept << "\n"
                << "augmented dropped: " << result.dropped << "\n";
      for (const auto& [chain, n] : result.dropped_by_chain)
        std::cout << "  dropped by " << chain << ": " << n << "\n";
      return kExitOk;
    }

    if (*split_cmd) {
      echo_config("split", {{"manifest", sp.manifest},
                            {"train", sp.train},
                            {"val", sp.val},
                            {"test", sp.test},
                            {"quota", sp.quota},
                            {"tolerance", sp.tolerance},
                            {"attempts", sp.attempts},
                            {"seed", sp.seed},
                            {"best_effort", sp.best_effort},
                            {"force", sp.force},
                            {"threads", sp.threads}});
      LoadOptions opts;
      opts.check_images = !sp.no_check_images;
      const Dataset ds = load_dataset(fs::path(sp.manifest), opts);

      SplitConfig cfg;
      cfg.train_fraction = sp.train;
      cfg.val_fraction = sp.val;
      cfg.test_fraction = sp.test;
      cfg.quota = sp.quota;
      cfg.quota_tolerance = sp.tolerance;
      cfg.max_attempts = sp.attempts;
      cfg.seed = sp.seed;
      cfg.best_effort = sp.best_effort;
      cfg.force = sp.force;

      const SplitOutcome outcome = stratified_split(ds, cfg, sp.threads);
      std::cout << "quota violation score: " << outcome.violation_score << " (attempt "
                << outcome.attempt << ")\n";
      for (const auto& row : split_report(outcome.dataset)) {
        std::cout << split_name(row.split) << ": " << row.frames << " frames;";
        for (const auto& cat : outcome.dataset.taxonomy)
          std::cout << " " << cat.name << "=" << row.instances.at(cat.id);
        std::cout << "\n";
      }
      if (!sp.out_csv.empty()) write_file_atomic(sp.out_csv, split_csv(outcome.dataset));
      if (!sp.out_annotations.empty())
        write_file_atomic(sp.out_annotations, dataset_to_json_string(outcome.dataset));
      return kExitOk;
    }

    if (*eval_cmd) return run_evaluate(ev);

    if (*synth_cmd) {
      echo_config("synth", {{"out", sy.out},
                            {"frames", sy.frames},
                            {"width", sy.width},
                            {"height", sy.height},
                            {"seed", sy.seed},
                            {"shape", sy.shape},
                            {"pred_out", sy.pred_out},
                            {"jitter", sy.jitter},
                            {"drop", sy.drop},
                            {"spurious", sy.spurious},
                            {"flip", sy.flip},
                            {"threads", sy.threads}});
      SceneConfig cfg;
      cfg.width = sy.width;
      cfg.height = sy.height;
      cfg.min_instruments = sy.min_inst;
      cfg.max_instruments = sy.max_inst;
      cfg.shape = sy.shape == "rotated-rect" ? ShapeFamily::rotated_rect : ShapeFamily::capsule;
      cfg.seed = sy.seed;

      const Taxonomy taxonomy = default_taxonomy();
      Dataset ds = generate_dataset(cfg, taxonomy, sy.frames, sy.threads);

      const fs::path out_root(sy.out);
      const ImageLoader loader = scene_image_loader(cfg, taxonomy);
      for (auto& frame : ds.frames) {
        const fs::path rel = fs::path("images") / (frame.frame_id + ".png");
        write_image_png((out_root / rel).string(), loader(frame));
        frame.image_ref = (out_root / rel).string();
      }
      DatasetManifest manifest;
      manifest.root = out_root;
      save_dataset(ds, manifest);
      save_manifest(manifest, out_root / "manifest.json");
      std::cout << "wrote " << ds.frames.size() << " frames, " << total_instances(ds)
                << " instances to " << out_root.string() << "\n";

      if (!sy.pred_out.empty()) {
        PerturbationConfig pcfg;
        pcfg.jitter_px = sy.jitter;
        pcfg.drop_prob = sy.drop;
        pcfg.spurious_rate = sy.spurious;
        pcfg.class_flip_prob = sy.flip;
        pcfg.seed = sy.seed;
        save_predictions(perturb_dataset(ds, pcfg), sy.pred_out);
        std::cout << "wrote predictions to " << sy.pred_out << "\n";
      }
      return kExitOk;
    }

    if (*report_cmd) {
      echo_config("report", {{"in", rp.inputs}, {"style", rp.style}, {"format", rp.format}});
      std::vector<EvalReport> reports;
      for (const auto& path : rp.inputs)
        reports.push_back(report_from_json_string(read_file(path)));
      const ReportFormat fmt = rp.format == "csv" ? ReportFormat::csv : ReportFormat::text;
      const std::string text = rp.style == "per-class"
                                   ? render_class_table(reports, fmt)
                                   : render_summary(reports, fmt);
      if (rp.out.empty()) std::cout << text;
      else write_file_atomic(rp.out, text);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}
