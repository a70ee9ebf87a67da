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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fprep {

inline constexpr int kNumClasses = 5;

enum class Source { kaggle, idrid };
enum class Split { unassigned, train, val, test };

std::string_view to_string(Source source);
std::string_view to_string(Split split);
Source parse_source(std::string_view name);
Split parse_split(std::string_view name);

struct DatasetRecord {
  std::string id;
  std::filesystem::path path;
  int label = 0;
  Source source = Source::kaggle;
  Split split = Split::unassigned;
};

/// Maps a record to the file to read; an empty resolver means `record.path`.
using PathResolver = std::function<std::filesystem::path(const DatasetRecord&)>;

std::filesystem::path resolve_path(const PathResolver& resolve, const DatasetRecord& record);

struct Manifest {
  std::vector<DatasetRecord> records;
  std::vector<std::filesystem::path> source_files;
  std::string loaded_at;

  std::array<std::size_t, kNumClasses> class_counts() const;
};

/// Parse or validation failure. `row` is the 1-based line (header = 1), or 0
/// when the error is not tied to a line.
class ManifestError : public std::runtime_error {
 public:
  ManifestError(const std::string& what, int row = 0) : std::runtime_error(what), row(row) {}
  int row;
};

/// Reads a label CSV. Required columns are `id` and `label` (the Kaggle
/// `image,level` and IDRiD `Image name,Retinopathy grade` headers are
/// accepted too). Optional `path`, `source` and `split` columns are honored;
/// anything else is ignored. `source` overrides any source column.
Manifest load_manifest(const std::filesystem::path& path,
                       std::optional<Source> source = std::nullopt);
Manifest parse_manifest(std::istream& in, std::string_view name,
                        std::optional<Source> source = std::nullopt);

/// Writes id,path,label,source,split with LF line endings.
void write_manifest(const Manifest& manifest, std::ostream& out);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Concatenates manifests in order; rejects duplicate (source, id) pairs.
Manifest amalgamate(std::span<const Manifest> manifests);

/// 64-bit SplitMix generator: state += 0x9E3779B97F4A7C15, then the
/// Stafford variant-13 finalizer.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();

 private:
  std::uint64_t state_;
};

struct SplitFractions {
  double test = 0.2;
  double val = 0.2;
};

struct SplitCounts {
  std::size_t test = 0;
  std::size_t val = 0;
  std::size_t train = 0;
};

/// test = round_half_up(test * n); val = round_half_up(val * (n - test));
/// train takes the rest.
SplitCounts split_counts(std::size_t n, const SplitFractions& fractions);

/// Class-wise split. Records of each class are ordered by (source, id),
/// shuffled with Fisher-Yates driven by SplitMix64 seeded with
/// seed + 0x9E3779B97F4A7C15 * (label + 1) (index = next() % (i + 1)), and
/// then assigned test, val, train in that order. Absent classes are skipped;
/// a present class that would leave any split empty is an error.
Manifest stratified_split(const Manifest& manifest, const SplitFractions& fractions,
                          std::uint64_t seed);

}  // namespace fprep
