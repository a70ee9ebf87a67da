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

#include "fprep/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "fprep/csv.hpp"

namespace fprep {

std::string_view to_string(Source source) {
  return source == Source::kaggle ? "kaggle" : "idrid";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::unassigned: return "unassigned";
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "unassigned";
}

Source parse_source(std::string_view name) {
  const std::string s = csv::lower_trim(name);
  if (s == "kaggle") return Source::kaggle;
  if (s == "idrid") return Source::idrid;
  throw std::invalid_argument("unknown dataset source '" + std::string(name) + "'");
}

Split parse_split(std::string_view name) {
  const std::string s = csv::lower_trim(name);
  if (s.empty() || s == "unassigned") return Split::unassigned;
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw std::invalid_argument("unknown split '" + std::string(name) + "'");
}

std::filesystem::path resolve_path(const PathResolver& resolve, const DatasetRecord& record) {
  return resolve ? resolve(record) : record.path;
}

std::array<std::size_t, kNumClasses> Manifest::class_counts() const {
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& r : records) ++counts[r.label];
  return counts;
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       std::initializer_list<std::string_view> names) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string h = csv::lower_trim(header[i]);
    for (auto name : names) {
      if (h == name) return i;
    }
  }
  return std::nullopt;
}

}  // namespace

Manifest parse_manifest(std::istream& in, std::string_view name, std::optional<Source> source) {
  csv::Reader reader(in);
  auto fail = [&](const std::string& what, int row) -> ManifestError {
    std::ostringstream msg;
    msg << name;
    if (row > 0) msg << ": row " << row;
    msg << ": " << what;
    return ManifestError(msg.str(), row);
  };

  std::optional<std::vector<std::string>> header;
  try {
    header = reader.next();
  } catch (const std::invalid_argument& e) {
    throw fail(e.what(), reader.line());
  }
  if (!header) throw fail("empty manifest file", 0);
  const auto id_col = find_column(*header, {"id", "image", "image name"});
  const auto label_col = find_column(*header, {"label", "level", "retinopathy grade"});
  const auto path_col = find_column(*header, {"path"});
  const auto source_col = find_column(*header, {"source"});
  const auto split_col = find_column(*header, {"split"});
  if (!id_col || !label_col) throw fail("header must contain id and label columns", 1);

  Manifest manifest;
  manifest.source_files.emplace_back(name);
  manifest.loaded_at = utc_timestamp();
  std::set<std::pair<Source, std::string>> seen;

  for (;;) {
    std::optional<std::vector<std::string>> row;
    try {
      row = reader.next();
    } catch (const std::invalid_argument& e) {
      throw fail(e.what(), reader.line());
    }
    if (!row) break;
    const int line = reader.line();
    auto field = [&](std::optional<std::size_t> col) -> std::string {
      if (!col) return {};
      if (*col >= row->size()) throw fail("missing column " + std::to_string(*col + 1), line);
      return (*row)[*col];
    };

    DatasetRecord rec;
    rec.id = csv::trim(field(id_col));
    if (rec.id.empty()) throw fail("empty id", line);

    const std::string label_text = csv::lower_trim(field(label_col));
    int label = -1;
    const auto [ptr, ec] =
        std::from_chars(label_text.data(), label_text.data() + label_text.size(), label);
    if (ec != std::errc() || ptr != label_text.data() + label_text.size()) {
      throw fail("unparsable label '" + label_text + "'", line);
    }
    if (label < 0 || label >= kNumClasses) {
      throw fail("label " + std::to_string(label) + " outside 0-4", line);
    }
    rec.label = label;
    rec.path = field(path_col);
    try {
      if (source) {
        rec.source = *source;
      } else if (source_col) {
        rec.source = parse_source(field(source_col));
      } else {
        throw std::invalid_argument("no source tag given and no source column");
      }
      if (split_col) rec.split = parse_split(field(split_col));
    } catch (const std::invalid_argument& e) {
      throw fail(e.what(), line);
    }
    if (!seen.emplace(rec.source, rec.id).second) {
      throw fail("duplicate id '" + rec.id + "'", line);
    }
    manifest.records.push_back(std::move(rec));
  }
  return manifest;
}

Manifest load_manifest(const std::filesystem::path& path, std::optional<Source> source) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError(path.string() + ": cannot open manifest");
  return parse_manifest(in, path.string(), source);
}

void write_manifest(const Manifest& manifest, std::ostream& out) {
  out << "id,path,label,source,split\n";
  for (const auto& r : manifest.records) {
    out << csv::join({r.id, r.path.string(), std::to_string(r.label),
                      std::string(to_string(r.source)), std::string(to_string(r.split))})
        << '\n';
  }
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ManifestError(path.string() + ": cannot write manifest");
  write_manifest(manifest, out);
  if (!out) throw ManifestError(path.string() + ": write failed");
}

Manifest amalgamate(std::span<const Manifest> manifests) {
  if (manifests.empty()) throw ManifestError("amalgamate needs at least one manifest");
  Manifest out;
  std::set<std::pair<Source, std::string>> seen;
  for (const auto& m : manifests) {
    for (const auto& r : m.records) {
      if (!seen.emplace(r.source, r.id).second) {
        throw ManifestError("duplicate record (" + std::string(to_string(r.source)) + ", " +
                            r.id + ") across manifests");
      }
      out.records.push_back(r);
    }
    out.source_files.insert(out.source_files.end(), m.source_files.begin(),
                            m.source_files.end());
  }
  out.loaded_at = manifests.front().loaded_at;
  return out;
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::size_t round_half_up(double x) {
  // The small bias keeps products such as 0.2 * 25 from landing just below
  // an exact integer.
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

}  // namespace

SplitCounts split_counts(std::size_t n, const SplitFractions& f) {
  if (!(f.test > 0.0 && f.test < 1.0) || !(f.val >= 0.0 && f.val < 1.0)) {
    throw std::invalid_argument("split fractions must lie in (0, 1) for test and [0, 1) for val");
  }
  SplitCounts c;
  c.test = std::min(n, round_half_up(f.test * static_cast<double>(n)));
  const std::size_t rest = n - c.test;
  c.val = std::min(rest, round_half_up(f.val * static_cast<double>(rest)));
  c.train = rest - c.val;
  return c;
}

Manifest stratified_split(const Manifest& manifest, const SplitFractions& fractions,
                          std::uint64_t seed) {
  Manifest out = manifest;
  for (int label = 0; label < kNumClasses; ++label) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
      if (out.records[i].label == label) members.push_back(i);
    }
    if (members.empty()) continue;
    const SplitCounts counts = split_counts(members.size(), fractions);
    if (counts.test == 0 || counts.val == 0 || counts.train == 0) {
      throw ManifestError("class " + std::to_string(label) + " has " +
                          std::to_string(members.size()) +
                          " records, too few to populate train, val and test");
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      const auto& ra = out.records[a];
      const auto& rb = out.records[b];
      return std::pair(ra.source, std::string_view(ra.id)) <
             std::pair(rb.source, std::string_view(rb.id));
    });
    SplitMix64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(label + 1));
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
      std::swap(members[i], members[j]);
    }
    for (std::size_t k = 0; k < members.size(); ++k) {
      Split s = Split::train;
      if (k < counts.test) {
        s = Split::test;
      } else if (k < counts.test + counts.val) {
        s = Split::val;
      }
      out.records[members[k]].split = s;
    }
  }
  return out;
}

}  // namespace fprep
