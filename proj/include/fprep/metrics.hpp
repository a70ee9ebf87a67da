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
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fprep/dataset.hpp"

namespace fprep {

enum class Outcome { negative, positive };

/// Label 0 (no DR) is negative, 1-4 positive.
Outcome binarize(int label);

/// Binary DR matrix with the reference cell placement, where
/// the off-diagonal names are the reverse of the usual ones:
///   actual negative, predicted negative -> tn
///   actual negative, predicted positive -> fn
///   actual positive, predicted negative -> fp
///   actual positive, predicted positive -> tp
/// conventional() returns the matrix with fp/fn swapped into the usual sense.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  ConfusionMatrix conventional() const { return {tp, tn, fn, fp}; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

/// counts[actual][predicted].
struct MulticlassMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t total() const;
  ConfusionMatrix binarized() const;
  MulticlassMatrix& operator+=(const MulticlassMatrix& other);
  bool operator==(const MulticlassMatrix&) const = default;
};

struct ConfusionResult {
  ConfusionMatrix binary;
  MulticlassMatrix multiclass;
};

/// Throws std::invalid_argument on a length mismatch or an out-of-range label.
ConfusionResult confusion(std::span<const int> actual, std::span<const int> predicted);

/// Ratios in [0, 1]. A ratio whose denominator is zero is nullopt.
struct Metrics {
  double accuracy = 0.0;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
};

/// accuracy = (tp + tn) / total, sensitivity = tp / (tp + fn),
/// specificity = tn / (tn + fp). Throws std::invalid_argument for an empty matrix.
Metrics metrics(const ConfusionMatrix& cm);

struct Prediction {
  std::string id;
  int actual = 0;
  int predicted = 0;
};

/// Errors from the predictions CSV; `line` is 1-based (header = 1), 0 if none.
class PredictionsError : public std::runtime_error {
 public:
  PredictionsError(const std::string& what, int line = 0)
      : std::runtime_error(what), line(line) {}
  int line;
};

/// Columns id,actual,predicted (any order, extra columns ignored).
std::vector<Prediction> parse_predictions(std::istream& in, std::string_view name);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

ConfusionResult confusion(std::span<const Prediction> predictions);

/// "85.31%"; "undefined" for nullopt.
std::string format_percent(std::optional<double> ratio);

/// Accuracy, sensitivity and specificity separated by spaces.
std::string metrics_row(const Metrics& m);

/// Both matrices plus each metric as a full-precision ratio and a 2-decimal
/// percentage. `conventional` adds the fp/fn-swapped matrix.
nlohmann::json metrics_json(const ConfusionResult& result, bool conventional = false);

/// metric,ratio,percent
void write_metrics_csv(const Metrics& m, std::ostream& out);

}  // namespace fprep
