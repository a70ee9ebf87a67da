/* Copyright 2026 The fundus-prep Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// fundus_prep: command-line front end for the preprocessing pipeline, the
// round-trip downscaler evaluation, dataset splitting and metric reporting.
//
// Exit status: 0 success, 1 some records failed, 2 configuration or fatal error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fprep/csv.hpp"
#include "fprep/dataset.hpp"
#include "fprep/harness.hpp"
#include "fprep/image_io.hpp"
#include "fprep/iqa.hpp"
#include "fprep/metrics.hpp"
#include "fprep/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitFatal = 2;

struct ManifestInput {
  fs::path file;
  std::string source;  // empty: taken from a source column
  fs::path image_dir;  // empty: the manifest's directory
  std::string ext = ".png";
  // Commands that ignore the source may read plain id,label files.
  bool source_required = true;

  void add_options(CLI::App* cmd, bool required = true) {
    cmd->add_option("-m,--manifest", file, "Label CSV or manifest")->required(required);
    cmd->add_option("--source", source, "Tag every record with this source")
        ->check(CLI::IsMember({"kaggle", "idrid"}));
    cmd->add_option("--image-dir", image_dir,
                    "Directory for records without a path column (default: manifest directory)");
    cmd->add_option("--ext", ext, "Extension appended to ids without a path")
        ->capture_default_str();
  }

  fprep::Manifest load() const {
    std::optional<fprep::Source> tag;
    if (!source.empty()) {
      tag = fprep::parse_source(source);
    } else if (!source_required && !has_source_column()) {
      tag = fprep::Source::kaggle;
    }
    return fprep::load_manifest(file, tag);
  }

  bool has_source_column() const {
    std::ifstream in(file);
    std::string header;
    std::getline(in, header);
    for (const auto& field : fprep::csv::split_line(header)) {
      if (fprep::csv::lower_trim(field) == "source") return true;
    }
    return false;
  }

  // Relative paths are taken relative to the manifest; missing paths become
  // <image-dir>/<id><ext>.
  fprep::PathResolver resolver() const {
    const fs::path base = file.parent_path();
    const fs::path dir = image_dir.empty() ? base : image_dir;
    const std::string e = ext;
    return [base, dir, e](const fprep::DatasetRecord& r) -> fs::path {
      if (r.path.empty()) return dir / (r.id + e);
      return r.path.is_absolute() ? r.path : base / r.path;
    };
  }

  json to_json() const {
    return {{"manifest", file.string()},
            {"source", source.empty() ? json(nullptr) : json(source)},
            {"image_dir", image_dir.string()},
            {"ext", ext}};
  }
};

struct DownscaleOptions {
  std::string algorithm = "bilinear";
  int scale = 8;
  int lanczos_taps = 4;
  double rdip_lambda = 1.0;
  double rdip_epsilon = 1e-6;
  bool no_antialias = false;

  void add_options(CLI::App* cmd, bool with_algorithm) {
    if (with_algorithm) {
      cmd->add_option("--algo", algorithm, "Downscaler")
          ->check(CLI::IsMember({"nearest", "bilinear", "bicubic", "lanczos", "rdip"}))
          ->capture_default_str();
    }
    cmd->add_option("--scale", scale, "Integer downscale factor")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--lanczos-taps", lanczos_taps, "Lanczos window: 4, 6 or 8")
        ->check(CLI::IsMember({4, 6, 8}))
        ->capture_default_str();
    cmd->add_option("--rdip-lambda", rdip_lambda)->capture_default_str();
    cmd->add_option("--rdip-epsilon", rdip_epsilon)->capture_default_str();
    cmd->add_flag("--no-antialias", no_antialias,
                  "Plain interpolation: do not widen kernels by the scale factor");
  }

  fprep::ResampleSpec spec(const std::string& name) const {
    fprep::ResampleSpec s;
    s.algorithm = fprep::parse_algorithm(name);
    s.scale = scale;
    s.lanczos_taps = lanczos_taps;
    s.rdip_lambda = rdip_lambda;
    s.rdip_epsilon = rdip_epsilon;
    s.antialias = !no_antialias;
    return s;
  }
};

struct SsimOptions {
  fprep::SsimParams params;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--ssim-window", params.window)->capture_default_str();
    cmd->add_option("--ssim-stride", params.stride)->capture_default_str();
    cmd->add_option("--ssim-L", params.dynamic_range, "SSIM dynamic range")->capture_default_str();
  }
};

int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// CLI11 skips environment values that fail validation; reject them instead.
void check_workers_env() {
  const char* raw = std::getenv("FUNDUS_PREP_WORKERS");
  if (raw == nullptr || *raw == '\0') return;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) {
    throw std::invalid_argument(std::string("FUNDUS_PREP_WORKERS must be a positive integer, got '") +
                                raw + "'");
  }
}

void add_workers(CLI::App* cmd, int& workers) {
  cmd->add_option("-j,--workers", workers, "Records processed concurrently")
      ->envname("FUNDUS_PREP_WORKERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_resolved_config(const fs::path& dir, const std::string& command, json settings) {
  settings["command"] = command;
  write_text(dir / "resolved_config.json", settings.dump(2) + "\n");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw fprep::ImageIoError(fprep::ImageIoError::Kind::io, dir, "cannot create output directory");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = fprep::csv::lower_trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------- preprocess

struct PreprocessCommand {
  ManifestInput input;
  DownscaleOptions down;
  fs::path out_dir;
  int threshold = fprep::kDefaultCropThreshold;
  int target_width = 600;
  int target_height = 600;
  bool center_crop = false;
  bool tile = false;
  int workers = default_workers();

  void attach(CLI::App& app, int& result) {
    auto* cmd = app.add_subcommand("preprocess", "Crop, downscale, pad and optionally tile");
    input.add_options(cmd);
    down.add_options(cmd, true);
    cmd->add_option("-o,--out-dir", out_dir, "Output directory")->required();
    cmd->add_option("--threshold", threshold, "Border crop threshold")
        ->check(CLI::Range(0, 255))
        ->capture_default_str();
    cmd->add_option("--target-width", target_width)->capture_default_str();
    cmd->add_option("--target-height", target_height)->capture_default_str();
    cmd->add_flag("--center-crop", center_crop,
                  "Center-crop images still larger than the target instead of failing them");
    cmd->add_flag("--tile", tile, "Also write the four quadrants as <id>_tl/_tr/_bl/_br.png");
    add_workers(cmd, workers);
    cmd->callback([this, &result] { result = run(); });
  }

  int run() {
    fprep::PreprocessConfig cfg;
    cfg.crop_threshold = threshold;
    cfg.downscale = down.spec(down.algorithm);
    cfg.target_width = target_width;
    cfg.target_height = target_height;
    cfg.center_crop = center_crop;
    cfg.tile = tile;
    cfg.workers = workers;
    cfg.validate();

    const fprep::Manifest manifest = input.load();
    const fprep::PreprocessSummary summary =
        fprep::preprocess_batch(manifest, cfg, out_dir, input.resolver());
    fprep::save_manifest(summary.manifest, out_dir / "manifest.csv");

    std::ostringstream failures;
    failures << "id,path,error\n";
    for (const auto& f : summary.failures) {
      failures << fprep::csv::join({f.id, f.path.string(), f.message}) << '\n';
      std::cerr << "failed: " << f.id << ": " << f.message << '\n';
    }
    write_text(out_dir / "failures.csv", failures.str());
    write_resolved_config(out_dir, "preprocess",
                          {{"input", input.to_json()},
                           {"crop_threshold", threshold},
                           {"downscale", fprep::to_json(cfg.downscale)},
                           {"scale", cfg.downscale.scale},
                           {"target", {target_width, target_height}},
                           {"center_crop", center_crop},
                           {"tile", tile},
                           {"workers", workers},
                           {"output_format", "png"}});
    std::cout << summary.manifest.records.size() << " of " << manifest.records.size()
              << " images written to " << out_dir.string() << '\n';
    return summary.failures.empty() ? kExitOk : kExitPartial;
  }
};

// ----------------------------------------------------------------- roundtrip

struct RoundtripCommand {
  ManifestInput input;
  DownscaleOptions down;
  SsimOptions ssim;
  std::string algos = "nearest,bilinear,bicubic,lanczos,rdip";
  fs::path external_dir;
  fs::path out_dir;
  int workers = default_workers();

  void attach(CLI::App& app, int& result) {
    auto* cmd = app.add_subcommand("roundtrip",
                                   "Downscale, upscale with Lanczos and score PSNR/SSIM per class");
    input.source_required = false;
    input.add_options(cmd);
    down.add_options(cmd, false);
    ssim.add_options(cmd);
    cmd->add_option("--algos", algos, "Comma-separated downscalers")->capture_default_str();
    cmd->add_option("--external-dir", external_dir,
                    "Directory of precomputed <id>.png downscales, scored as 'external'");
    cmd->add_option("-o,--out-dir", out_dir, "Output directory")->required();
    add_workers(cmd, workers);
    cmd->callback([this, &result] { result = run(); });
  }

  int run() {
    fprep::RoundTripConfig cfg;
    cfg.scale = down.scale;
    cfg.ssim = ssim.params;
    cfg.workers = workers;
    for (const auto& name : split_list(algos)) {
      if (name == "external") throw std::invalid_argument("use --external-dir for 'external'");
      cfg.specs.push_back(down.spec(name));
    }
    if (!external_dir.empty()) {
      fprep::ResampleSpec e;
      e.algorithm = fprep::Algorithm::external;
      e.scale = down.scale;
      e.external_dir = external_dir;
      cfg.specs.push_back(e);
    }
    if (cfg.specs.empty()) throw std::invalid_argument("no algorithms selected");

    const fprep::Manifest manifest = input.load();
    ensure_dir(out_dir);
    const fprep::RoundTripReport report = fprep::roundtrip_eval(manifest, cfg, input.resolver());

    std::ostringstream rows, table;
    fprep::write_rows_csv(report, rows);
    fprep::write_table(report, table);
    table << '\n';
    for (auto metric : {fprep::RankMetric::psnr, fprep::RankMetric::ssim}) {
      table << "Ranking by " << (metric == fprep::RankMetric::psnr ? "PSNR" : "SSIM") << '\n';
      for (const auto& r : fprep::rank_algorithms(report, metric)) {
        table << "class " << r.label << ":";
        for (const auto& e : r.entries) table << ' ' << e.algorithm << (e.tied ? "(tie)" : "");
        table << '\n';
      }
    }
    json doc = fprep::to_json(report);
    write_text(out_dir / "roundtrip_rows.csv", rows.str());
    write_text(out_dir / "roundtrip.json", doc.dump(2) + "\n");
    write_text(out_dir / "roundtrip_table.txt", table.str());
    write_resolved_config(out_dir, "roundtrip",
                          {{"input", input.to_json()},
                           {"report", doc["config"]},
                           {"workers", workers}});
    std::cout << table.str();
    if (report.error_count() > 0) {
      std::cerr << report.error_count() << " row(s) failed; see roundtrip_rows.csv\n";
      return kExitPartial;
    }
    return kExitOk;
  }
};

// --------------------------------------------------------------------- split

struct SplitCommand {
  std::vector<std::string> manifests;
  fs::path out;
  std::uint64_t seed = 0;
  double test_frac = 0.2;
  double val_frac = 0.2;

  void attach(CLI::App& app, int& result) {
    auto* cmd = app.add_subcommand("split", "Amalgamate manifests and assign class-wise splits");
    cmd->add_option("-m,--manifest", manifests, "Manifest as path[:kaggle|:idrid]; repeatable")
        ->required();
    cmd->add_option("-o,--out", out, "Output manifest CSV")->required();
    cmd->add_option("--seed", seed)->capture_default_str();
    cmd->add_option("--test-frac", test_frac)->capture_default_str();
    cmd->add_option("--val-frac", val_frac)->capture_default_str();
    cmd->callback([this, &result] { result = run(); });
  }

  int run() {
    std::vector<fprep::Manifest> parts;
    json inputs = json::array();
    for (const auto& arg : manifests) {
      std::string path = arg;
      std::optional<fprep::Source> source;
      const auto colon = arg.rfind(':');
      if (colon != std::string::npos) {
        const std::string tag = fprep::csv::lower_trim(arg.substr(colon + 1));
        if (tag == "kaggle" || tag == "idrid") {
          source = fprep::parse_source(tag);
          path = arg.substr(0, colon);
        }
      }
      parts.push_back(fprep::load_manifest(path, source));
      inputs.push_back({{"path", path},
                        {"source", source ? json(std::string(fprep::to_string(*source)))
                                          : json(nullptr)}});
    }
    const fprep::Manifest all = fprep::amalgamate(parts);
    const fprep::Manifest split = fprep::stratified_split(all, {test_frac, val_frac}, seed);
    const fs::path dir = out.parent_path().empty() ? fs::path(".") : out.parent_path();
    ensure_dir(dir);
    fprep::save_manifest(split, out);

    std::ostringstream summary;
    summary << "class    total    train      val     test\n";
    const auto counts = split.class_counts();
    for (int c = 0; c < fprep::kNumClasses; ++c) {
      std::size_t n[4] = {0, 0, 0, 0};
      for (const auto& r : split.records) {
        if (r.label == c) ++n[static_cast<int>(r.split)];
      }
      char line[96];
      std::snprintf(line, sizeof line, "%5d %8zu %8zu %8zu %8zu\n", c, counts[c], n[1], n[2],
                    n[3]);
      summary << line;
    }
    std::cout << summary.str() << split.records.size() << " records written to " << out.string()
              << '\n';
    write_resolved_config(dir, "split",
                          {{"inputs", inputs},
                           {"output", out.string()},
                           {"seed", seed},
                           {"test_frac", test_frac},
                           {"val_frac", val_frac},
                           {"prng", "splitmix64, per-class seed + 0x9E3779B97F4A7C15 * (label + 1)"}});
    return kExitOk;
  }
};

// ---------------------------------------------------------------------- tile

struct TileCommand {
  fs::path input;
  fs::path out_dir;

  void attach(CLI::App& app, int& result) {
    auto* cmd = app.add_subcommand("tile", "Split one image into four quadrant PNGs");
    cmd->add_option("input", input, "Image with even width and height")->required();
    cmd->add_option("-o,--out-dir", out_dir, "Output directory")->required();
    cmd->callback([this, &result] { result = run(); });
  }

  int run() {
    const fprep::Quadrants q = fprep::tile_quadrants(fprep::load_image(input));
    ensure_dir(out_dir);
    const fprep::Image* tiles[4] = {&q.top_left, &q.top_right, &q.bottom_left, &q.bottom_right};
    for (int t = 0; t < 4; ++t) {
      const fs::path p = out_dir / (input.stem().string() + fprep::kTileSuffixes[t] + ".png");
      fprep::save_image(*tiles[t], p);
      std::cout << p.string() << '\n';
    }
    return kExitOk;
  }
};

// ------------------------------------------------------------------- metrics

struct MetricsCommand {
  fs::path predictions;
  fs::path out_dir;
  bool conventional = false;

  void attach(CLI::App& app, int& result) {
    auto* cmd = app.add_subcommand(
        "metrics", "Binary DR accuracy, sensitivity and specificity from predictions");
    cmd->add_option("predictions", predictions, "CSV with id,actual,predicted")->required();
    cmd->add_option("-o,--out-dir", out_dir, "Write metrics.json and metrics.csv here");
    cmd->add_flag("--conventional", conventional,
                  "Also emit the matrix with fp/fn in their usual sense");
    cmd->callback([this, &result] { result = run(); });
  }

  int run() {
    const auto preds = fprep::load_predictions(predictions);
    const fprep::ConfusionResult r = fprep::confusion(preds);
    const fprep::Metrics m = fprep::metrics(r.binary);
    std::cout << "accuracy sensitivity specificity\n" << fprep::metrics_row(m) << '\n';
    if (!out_dir.empty()) {
      ensure_dir(out_dir);
      write_text(out_dir / "metrics.json", fprep::metrics_json(r, conventional).dump(2) + "\n");
      std::ostringstream csv;
      fprep::write_metrics_csv(m, csv);
      write_text(out_dir / "metrics.csv", csv.str());
      write_resolved_config(out_dir, "metrics",
                            {{"predictions", predictions.string()},
                             {"conventional", conventional}});
    }
    return kExitOk;
  }
};

// --------------------------------------------------------------- psnr / ssim

struct PairCommand {
  fs::path a;
  fs::path b;
  SsimOptions ssim;
  bool is_ssim = false;

  void attach(CLI::App& app, int& result, bool ssim_command) {
    is_ssim = ssim_command;
    auto* cmd = app.add_subcommand(ssim_command ? "ssim" : "psnr",
                                   ssim_command ? "SSIM of two images" : "PSNR of two images, dB");
    cmd->add_option("reference", a)->required()->check(CLI::ExistingFile);
    cmd->add_option("test", b)->required()->check(CLI::ExistingFile);
    if (ssim_command) ssim.add_options(cmd);
    cmd->callback([this, &result] { result = run(); });
  }

  int run() {
    const fprep::Image x = fprep::load_image(a);
    const fprep::Image y = fprep::load_image(b);
    if (is_ssim) {
      std::printf("%.10f\n", fprep::ssim(x, y, ssim.params));
    } else {
      const double p = fprep::psnr(x, y);
      if (std::isinf(p)) {
        std::printf("inf\n");
      } else {
        std::printf("%.6f\n", p);
      }
    }
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fundus image preprocessing and downscaler evaluation"};
  app.set_config("--config", "", "TOML/INI file of option values; command-line flags win");
  app.require_subcommand(1);

  int result = kExitOk;
  PreprocessCommand preprocess;
  RoundtripCommand roundtrip;
  SplitCommand split;
  TileCommand tile;
  MetricsCommand metrics;
  PairCommand psnr, ssim;
  preprocess.attach(app, result);
  roundtrip.attach(app, result);
  split.attach(app, result);
  tile.attach(app, result);
  metrics.attach(app, result);
  psnr.attach(app, result, false);
  ssim.attach(app, result, true);

  try {
    check_workers_env();
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitFatal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFatal;
  }
  return result;
}
