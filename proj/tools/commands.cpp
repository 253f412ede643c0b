#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "thermoface/atomic_file.hpp"
#include "thermoface/config.hpp"
#include "thermoface/error.hpp"
#include "thermoface/evaluation.hpp"
#include "thermoface/image.hpp"
#include "thermoface/manifest.hpp"
#include "thermoface/model_file.hpp"
#include "thermoface/random.hpp"
#include "thermoface/synth.hpp"

namespace thermoface::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

int exit_code_for(const Error& e) { return is_numerical_failure(e.code()) ? kExitNumerical : kExitInput; }

PipelineConfig resolve_config(const GlobalOptions& g, std::optional<std::uint64_t> command_seed) {
  PipelineConfig cfg;
  std::string path = g.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv(std::string(kConfigEnvVar).c_str()); env && *env) path = env;
  }
  if (!path.empty()) cfg = load_config(path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.seed = *g.seed;
  if (command_seed) cfg.seed = *command_seed;
  cfg.validate();
  return cfg;
}

std::vector<std::string> labels_for(std::size_t num_classes) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < num_classes; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "subject_%02zu", i);
    labels.emplace_back(buf);
  }
  return labels;
}

std::string format_real(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

// --- transform --------------------------------------------------------------

struct TransformArgs {
  std::string variant = "polar_line_skeletal";
  std::string output_dir;
  std::vector<std::string> inputs;
};

int cmd_transform(const GlobalOptions& g, const TransformArgs& a, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = resolve_config(g, std::nullopt);
  const TransformVariant variant = parse_variant(a.variant);
  int status = kExitOk;
  for (const auto& input : a.inputs) {
    const fs::path in(input);
    fs::path dir = a.output_dir.empty() ? in.parent_path() : fs::path(a.output_dir);
    const fs::path target = dir / (in.stem().string() + "." + std::string(to_string(variant)) + ".pgm");
    try {
      const GrayImage img = load_image(in);
      save_image(apply_transform(variant, cfg, img), target);
      out << "ok " << input << " -> " << target.string() << "\n";
    } catch (const Error& e) {
      err << "error " << input << ": " << e.what() << "\n";
      status = std::max(status, exit_code_for(e));
    }
  }
  return status;
}

// --- train --------------------------------------------------------------------

struct TrainArgs {
  std::string manifest;
  std::string output;
  std::optional<int> holdout_fold;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const GlobalOptions& g, const TrainArgs& a, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(g, a.seed);
  const std::string manifest_path = a.manifest.empty() ? cfg.io.manifest : a.manifest;
  const std::string model_path = a.output.empty() ? cfg.io.model : a.output;
  if (manifest_path.empty()) throw Error(ErrorCode::InvalidParameter, "train: no manifest given");
  if (model_path.empty()) throw Error(ErrorCode::InvalidParameter, "train: no model output path given");

  const DatasetManifest manifest = load_manifest(manifest_path);
  if (a.holdout_fold && !manifest.has_folds()) {
    throw Error(ErrorCode::InvalidParameter, "--holdout-fold needs a manifest with a fold column");
  }
  const FeatureFn pipeline = make_pipeline(cfg.eval.variant, cfg);
  std::vector<FeatureVector> features;
  std::vector<std::size_t> labels;
  for (const auto& e : manifest.entries) {
    if (a.holdout_fold && e.fold == *a.holdout_fold) continue;
    features.push_back(pipeline(load_image(resolve_entry_path(manifest_path, e))));
    labels.push_back(e.subject);
  }

  ModelFile file;
  file.config = cfg;
  file.model = train_pipeline(features, labels, manifest.num_subjects, cfg, mix_seed(cfg.seed, 0));
  file.labels = labels_for(manifest.num_subjects);
  save_model(file, model_path);

  const auto& h = file.model.loss_history;
  out << "trained on " << features.size() << " images, " << manifest.num_subjects << " classes, k="
      << file.model.eigenspace.k() << "\n";
  out << "epochs " << h.size() << " final loss " << (h.empty() ? 0.0 : h.back()) << "\n";
  out << "model written to " << model_path << "\n";
  return kExitOk;
}

// --- identify -------------------------------------------------------------------

struct IdentifyArgs {
  std::string model;
  std::size_t k = 3;
  std::vector<std::string> images;
};

int cmd_identify(const GlobalOptions& g, const IdentifyArgs& a, std::ostream& out, std::ostream& err) {
  (void)g;
  const ModelFile file = load_model(a.model);
  const std::size_t classes = file.model.network.num_classes();
  if (a.k < 1 || a.k > classes) {
    throw Error(ErrorCode::InvalidK, "k=" + std::to_string(a.k) + " must be in 1.." + std::to_string(classes));
  }
  const FeatureFn pipeline = make_pipeline(file.config.eval.variant, file.config);
  int status = kExitOk;
  for (const auto& path : a.images) {
    try {
      const Prediction p = classify(file.model, pipeline(load_image(path)));
      out << path << "\n";
      for (std::size_t r = 0; r < a.k; ++r) {
        const auto label = p.ranking[r];
        out << "  " << (r + 1) << ". " << file.labels[label] << " "
            << format_real(p.scores(static_cast<Eigen::Index>(label)), "%.6f") << "\n";
      }
    } catch (const Error& e) {
      err << "error " << path << ": " << e.what() << "\n";
      status = std::max(status, exit_code_for(e));
    }
  }
  return status;
}

// --- eval -------------------------------------------------------------------------

struct EvalArgs {
  std::string manifest;
  std::string output_dir;
  std::string variant;
  bool all_variants = false;
  std::optional<std::uint64_t> seed;
};

int cmd_eval(const GlobalOptions& g, const EvalArgs& a, std::ostream& out) {
  PipelineConfig cfg = resolve_config(g, a.seed);
  if (!a.variant.empty()) cfg.eval.variant = parse_variant(a.variant);
  const std::string manifest_path = a.manifest.empty() ? cfg.io.manifest : a.manifest;
  const std::string output_dir = a.output_dir.empty() ? cfg.io.output_dir : a.output_dir;
  if (manifest_path.empty()) throw Error(ErrorCode::InvalidParameter, "eval: no manifest given");
  if (output_dir.empty()) throw Error(ErrorCode::InvalidParameter, "eval: no output directory given");

  const DatasetManifest manifest = load_manifest(manifest_path);
  const auto images = load_manifest_images(manifest, manifest_path);
  std::vector<EvaluationReport> reports;
  if (a.all_variants) {
    reports = compare_transforms(images, manifest, cfg);
  } else {
    reports.push_back(run_cross_validation(images, manifest, cfg.eval.variant, cfg));
  }

  // Everything is computed before the first file is written.
  const fs::path dir(output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::WriteFailure, "cannot create " + dir.string() + ": " + ec.message());
  write_file_atomic(dir / "report.csv", report_csv(reports));
  std::string summary;
  for (const auto& r : reports) {
    const std::string suffix = a.all_variants ? "_" + std::string(to_string(r.variant)) : "";
    write_file_atomic(dir / ("confusion" + suffix + ".csv"), confusion_csv(r));
    summary += summary_text(r) + "\n";
  }
  write_file_atomic(dir / "summary.txt", summary);
  out << summary;
  out << "reports written to " << dir.string() << "\n";
  return kExitOk;
}

// --- synth ------------------------------------------------------------------------

struct SynthArgs {
  std::size_t subjects = 4;
  std::size_t images_per_subject = 10;
  std::vector<double> rotations = {0, 15, -15, 45, -45};
  std::vector<double> scales = {1.0};
  std::optional<std::size_t> size;
  std::optional<double> noise;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
};

std::string synth_filename(std::size_t subject, std::size_t index, double rotation, double scale) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "s%02zu_i%03zu_rot%+g_sc%.2f.pgm", subject, index, rotation, scale);
  return buf;
}

int cmd_synth(const GlobalOptions& g, const SynthArgs& a, std::ostream& out) {
  PipelineConfig cfg = resolve_config(g, a.seed);
  if (a.size) cfg.synth.size = *a.size;
  if (a.noise) cfg.synth.noise = *a.noise;
  cfg.validate();
  if (a.subjects < 1 || a.images_per_subject < 1) {
    throw Error(ErrorCode::InvalidParameter, "synth: subject and image counts must be >= 1");
  }
  if (a.rotations.empty() || a.scales.empty()) {
    throw Error(ErrorCode::InvalidParameter, "synth: rotations and scales must be non-empty");
  }
  const std::string output_dir = a.output_dir.empty() ? cfg.io.output_dir : a.output_dir;
  if (output_dir.empty()) throw Error(ErrorCode::InvalidParameter, "synth: no output directory given");
  const fs::path dir(output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::WriteFailure, "cannot create " + dir.string() + ": " + ec.message());

  DatasetManifest manifest;
  manifest.num_subjects = a.subjects;
  for (std::size_t s = 0; s < a.subjects; ++s) {
    const std::uint64_t subject_seed = mix_seed(cfg.seed, s);
    for (std::size_t i = 0; i < a.images_per_subject; ++i) {
      const double rotation = a.rotations[i % a.rotations.size()];
      const double scale = a.scales[(i / a.rotations.size()) % a.scales.size()];
      GrayImage img = synth_face(subject_seed, rotation, scale, cfg.synth.size);
      if (cfg.synth.noise > 0.0) img = add_sensor_noise(img, cfg.synth.noise, mix_seed(subject_seed, 1000 + i));
      const std::string name = synth_filename(s, i, rotation, scale);
      save_image(img, dir / name);
      manifest.entries.push_back({name, s, std::nullopt});
    }
  }
  save_manifest(manifest, dir / "manifest.csv");
  out << "wrote " << manifest.entries.size() << " images and manifest.csv to " << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Thermal face recognition: log-polar line features, PCA and an MLP classifier", "thermoface"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Config file (key = value); default from $THERMOFACE_CONFIG");
  app.add_option("--set", g.overrides, "Override a config key, e.g. --set mlp.max_epochs=200");
  app.add_option("--seed", g.seed, "Global seed");
  app.add_flag("-v,--verbose", g.verbose, "Log informational messages");

  TransformArgs ta;
  auto* transform = app.add_subcommand("transform", "Write transformed images as PGM");
  transform->add_option("--variant", ta.variant, "raw | line_skeletal | polar | polar_line_skeletal");
  transform->add_option("--output-dir", ta.output_dir, "Directory for outputs (default: next to inputs)");
  transform->add_option("inputs", ta.inputs, "Input images")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Fit eigenspace and network, write a model file");
  train_cmd->add_option("--manifest", tr.manifest, "Manifest CSV");
  train_cmd->add_option("-o,--output", tr.output, "Model file to write");
  train_cmd->add_option("--holdout-fold", tr.holdout_fold, "Exclude this fold from training")
      ->check(CLI::Range(0, 2));
  train_cmd->add_option("--seed", tr.seed, "Seed");

  IdentifyArgs ia;
  auto* identify = app.add_subcommand("identify", "Rank subjects for each image");
  identify->add_option("--model", ia.model, "Model file")->required();
  identify->add_option("-k", ia.k, "Number of ranked labels to print");
  identify->add_option("images", ia.images, "Images to identify")->required();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "3-fold cross-validation report");
  eval->add_option("--manifest", ea.manifest, "Manifest CSV");
  eval->add_option("--output-dir", ea.output_dir, "Directory for report CSVs");
  eval->add_option("--variant", ea.variant, "Transform variant (default from config)");
  eval->add_flag("--all-variants", ea.all_variants, "Compare all four transform variants");
  eval->add_option("--seed", ea.seed, "Seed");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic thermal face corpus");
  synth->add_option("--subjects", sa.subjects, "Number of subjects");
  synth->add_option("--images-per-subject", sa.images_per_subject, "Images per subject");
  synth->add_option("--rotations", sa.rotations, "Rotation angles in degrees")->delimiter(',');
  synth->add_option("--scales", sa.scales, "Scale factors")->delimiter(',');
  synth->add_option("--size", sa.size, "Image side in pixels");
  synth->add_option("--noise", sa.noise, "Sensor noise sigma");
  synth->add_option("--output-dir", sa.output_dir, "Output directory")->required();
  synth->add_option("--seed", sa.seed, "Seed");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  spdlog::set_level(g.verbose ? spdlog::level::info : spdlog::level::warn);
  try {
    if (*transform) return cmd_transform(g, ta, out, err);
    if (*train_cmd) return cmd_train(g, tr, out);
    if (*identify) return cmd_identify(g, ia, out, err);
    if (*eval) return cmd_eval(g, ea, out);
    if (*synth) return cmd_synth(g, sa, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace thermoface::cli
