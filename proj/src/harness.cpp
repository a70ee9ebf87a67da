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

#include "fprep/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "fprep/csv.hpp"
#include "fprep/external.hpp"
#include "fprep/image_io.hpp"

namespace fprep {

RoundTripScore roundtrip_from_downscaled(const Image& original, const Image& downscaled,
                                         int scale, const SsimParams& ssim_params) {
  Image restored = upscale_lanczos4(downscaled, scale);
  if (restored.width() < original.width() || restored.height() < original.height()) {
    throw std::invalid_argument(
        "upscaled image " + std::to_string(restored.width()) + "x" +
        std::to_string(restored.height()) + " is smaller than the original " +
        std::to_string(original.width()) + "x" + std::to_string(original.height()));
  }
  if (restored.width() != original.width() || restored.height() != original.height()) {
    restored = extract(restored, CropBox{0, 0, original.width(), original.height()});
  }
  return {psnr(original, restored), ssim(original, restored, ssim_params)};
}

RoundTripScore roundtrip_one(const Image& image, const ResampleSpec& spec, int scale,
                             const SsimParams& ssim_params) {
  if (image.width() < scale || image.height() < scale) {
    throw std::invalid_argument("image smaller than the scale factor");
  }
  ResampleSpec s = spec;
  s.scale = scale;
  return roundtrip_from_downscaled(image, downscale(image, s), scale, ssim_params);
}

std::string_view to_string(RowStatus status) {
  switch (status) {
    case RowStatus::ok: return "ok";
    case RowStatus::warning: return "warning";
    case RowStatus::error: return "error";
  }
  return "error";
}

std::vector<std::string> RoundTripReport::algorithms() const {
  std::vector<std::string> out;
  for (const auto& spec : config.specs) out.push_back(spec.label());
  return out;
}

std::size_t RoundTripReport::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const QualityRow& r) { return !r.scored(); }));
}

std::vector<Aggregate> aggregate(const std::vector<QualityRow>& rows,
                                 const std::vector<std::string>& algorithm_order) {
  struct Acc {
    std::size_t count = 0;
    std::size_t inf = 0;
    double psnr = 0.0;
    double ssim = 0.0;
  };
  std::map<std::pair<int, std::string>, Acc> groups;
  for (const auto& row : rows) {
    if (!row.scored()) continue;
    Acc& a = groups[{row.label, row.algorithm}];
    ++a.count;
    a.ssim += row.ssim;
    if (std::isinf(row.psnr)) {
      ++a.inf;
    } else {
      a.psnr += row.psnr;
    }
  }
  std::vector<Aggregate> out;
  for (int label = 0; label < kNumClasses; ++label) {
    for (const auto& algorithm : algorithm_order) {
      const auto it = groups.find({label, algorithm});
      if (it == groups.end()) continue;
      const Acc& a = it->second;
      Aggregate agg;
      agg.label = label;
      agg.algorithm = algorithm;
      agg.count = a.count;
      agg.infinite_psnr = a.inf;
      agg.mean_psnr = a.count == a.inf ? kInfinitePsnr : a.psnr / static_cast<double>(a.count - a.inf);
      agg.mean_ssim = a.ssim / static_cast<double>(a.count);
      out.push_back(agg);
    }
  }
  return out;
}

namespace {

std::vector<QualityRow> evaluate_record(const DatasetRecord& record,
                                        const std::filesystem::path& path,
                                        const RoundTripConfig& config) {
  std::vector<QualityRow> rows;
  auto base_row = [&](const ResampleSpec& spec) {
    QualityRow row;
    row.id = record.id;
    row.label = record.label;
    row.algorithm = spec.label();
    return row;
  };

  Image original;
  try {
    original = load_image(path);
  } catch (const std::exception& e) {
    for (const auto& spec : config.specs) {
      QualityRow row = base_row(spec);
      row.status = RowStatus::error;
      row.message = e.what();
      rows.push_back(std::move(row));
    }
    return rows;
  }

  for (const auto& spec : config.specs) {
    QualityRow row = base_row(spec);
    try {
      RoundTripScore score;
      if (spec.algorithm == Algorithm::external) {
        ExternalImage ext = import_external_one(spec.external_dir, record, original.width(),
                                                original.height(), config.scale);
        if (ext.warning) {
          row.status = RowStatus::warning;
          row.message = ext.warning->message();
        }
        score = roundtrip_from_downscaled(original, ext.image, config.scale, config.ssim);
      } else {
        score = roundtrip_one(original, spec, config.scale, config.ssim);
      }
      row.psnr = score.psnr;
      row.ssim = score.ssim;
    } catch (const std::exception& e) {
      row.status = RowStatus::error;
      row.message = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

RoundTripReport roundtrip_eval(const Manifest& manifest, const RoundTripConfig& config,
                               const PathResolver& resolve) {
  if (manifest.records.empty()) throw EmptyBatchError("manifest has no records");
  if (config.specs.empty()) throw std::invalid_argument("no downscaling algorithms configured");
  config.ssim.validate();
  for (const auto& spec : config.specs) {
    ResampleSpec s = spec;
    s.scale = config.scale;
    s.validate();
  }

  const auto n = static_cast<long>(manifest.records.size());
  std::vector<std::vector<QualityRow>> per_record(manifest.records.size());
  auto run = [&](long i) {
    const auto& rec = manifest.records[i];
    per_record[i] = evaluate_record(rec, resolve_path(resolve, rec), config);
  };
  if (config.workers == 1) {
    for (long i = 0; i < n; ++i) run(i);
  } else if (config.workers > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(config.workers)
    for (long i = 0; i < n; ++i) run(i);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) run(i);
  }

  RoundTripReport report;
  report.config = config;
  for (auto& rows : per_record) {
    for (auto& row : rows) report.rows.push_back(std::move(row));
  }
  if (report.error_count() == report.rows.size()) {
    throw EmptyBatchError("no image in the manifest could be scored");
  }
  report.aggregates = aggregate(report.rows, report.algorithms());
  return report;
}

std::vector<ClassRanking> rank_algorithms(const std::vector<Aggregate>& aggregates,
                                          RankMetric metric) {
  std::vector<ClassRanking> out;
  for (int label = 0; label < kNumClasses; ++label) {
    ClassRanking ranking;
    ranking.label = label;
    ranking.metric = metric;
    for (const auto& a : aggregates) {
      if (a.label != label) continue;
      ranking.entries.push_back(
          {a.algorithm, metric == RankMetric::psnr ? a.mean_psnr : a.mean_ssim, false});
    }
    if (ranking.entries.empty()) continue;
    auto& e = ranking.entries;
    std::sort(e.begin(), e.end(), [](const RankEntry& x, const RankEntry& y) {
      if (x.value != y.value) return x.value > y.value;
      return x.algorithm < y.algorithm;
    });
    for (std::size_t i = 0; i + 1 < e.size(); ++i) {
      if (e[i].value == e[i + 1].value) e[i].tied = e[i + 1].tied = true;
    }
    out.push_back(std::move(ranking));
  }
  return out;
}

std::vector<ClassRanking> rank_algorithms(const RoundTripReport& report, RankMetric metric) {
  return rank_algorithms(report.aggregates, metric);
}

namespace {

std::string format_number(double v, const char* fmt = "%.10f") {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

nlohmann::json number_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

}  // namespace

void write_rows_csv(const RoundTripReport& report, std::ostream& out) {
  out << "id,label,algorithm,psnr,ssim,status,message\n";
  for (const auto& r : report.rows) {
    const bool scored = r.scored();
    out << csv::join({r.id, std::to_string(r.label), r.algorithm,
                      scored ? format_number(r.psnr) : "", scored ? format_number(r.ssim) : "",
                      std::string(to_string(r.status)), r.message})
        << '\n';
  }
}

nlohmann::json to_json(const ResampleSpec& spec) {
  nlohmann::json j = {{"algorithm", std::string(to_string(spec.algorithm))},
                      {"label", spec.label()},
                      {"antialias", spec.antialias}};
  if (spec.algorithm == Algorithm::lanczos) j["lanczos_taps"] = spec.lanczos_taps;
  if (spec.algorithm == Algorithm::rdip) {
    j["rdip_lambda"] = spec.rdip_lambda;
    j["rdip_epsilon"] = spec.rdip_epsilon;
  }
  if (spec.algorithm == Algorithm::external) j["external_dir"] = spec.external_dir.string();
  return j;
}

nlohmann::json to_json(const SsimParams& p) {
  return {{"window", p.window},           {"stride", p.stride}, {"k1", p.k1},
          {"k2", p.k2},                   {"dynamic_range", p.dynamic_range},
          {"channel_pooling", "mean of per-channel SSIM"}};
}

nlohmann::json to_json(const RoundTripReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row = {{"id", r.id},
                          {"label", r.label},
                          {"algorithm", r.algorithm},
                          {"status", std::string(to_string(r.status))}};
    if (r.scored()) {
      row["psnr"] = number_or_inf(r.psnr);
      row["ssim"] = r.ssim;
    }
    if (!r.message.empty()) row["message"] = r.message;
    rows.push_back(std::move(row));
  }
  nlohmann::json aggregates = nlohmann::json::array();
  for (const auto& a : report.aggregates) {
    aggregates.push_back({{"label", a.label},
                          {"algorithm", a.algorithm},
                          {"count", a.count},
                          {"infinite_psnr", a.infinite_psnr},
                          {"mean_psnr", number_or_inf(a.mean_psnr)},
                          {"mean_ssim", a.mean_ssim}});
  }
  nlohmann::json specs = nlohmann::json::array();
  for (const auto& s : report.config.specs) specs.push_back(to_json(s));
  return {{"config",
           {{"scale", report.config.scale},
            {"downscalers", specs},
            {"upscaler", {{"algorithm", "lanczos"}, {"taps", 4}}},
            {"ssim", to_json(report.config.ssim)},
            {"psnr", {{"peak", 255}, {"channel_pooling", "all samples pooled"}}},
            {"dimension_reconciliation", "crop upscaled image to original size from top-left"}}},
          {"rows", rows},
          {"aggregates", aggregates},
          {"errors", report.error_count()}};
}

void write_table(const RoundTripReport& report, std::ostream& out) {
  const auto algorithms = report.algorithms();
  std::map<std::pair<int, std::string>, const Aggregate*> cells;
  std::vector<int> labels;
  for (const auto& a : report.aggregates) {
    cells[{a.label, a.algorithm}] = &a;
    if (labels.empty() || labels.back() != a.label) labels.push_back(a.label);
  }
  std::size_t width = 12;
  for (const auto& a : algorithms) width = std::max(width, a.size() + 2);

  auto grid = [&](const char* title, auto value) {
    out << title << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-6s", "class");
    out << buf;
    for (const auto& a : algorithms) {
      std::snprintf(buf, sizeof buf, "%*s", static_cast<int>(width), a.c_str());
      out << buf;
    }
    out << '\n';
    for (int label : labels) {
      std::snprintf(buf, sizeof buf, "%-6d", label);
      out << buf;
      for (const auto& a : algorithms) {
        const auto it = cells.find({label, a});
        const std::string v = it == cells.end() ? "-" : format_number(value(*it->second), "%.6f");
        std::snprintf(buf, sizeof buf, "%*s", static_cast<int>(width), v.c_str());
        out << buf;
      }
      out << '\n';
    }
  };
  grid("Mean PSNR (dB)", [](const Aggregate& a) { return a.mean_psnr; });
  out << '\n';
  grid("Mean SSIM", [](const Aggregate& a) { return a.mean_ssim; });
}

}  // namespace fprep
