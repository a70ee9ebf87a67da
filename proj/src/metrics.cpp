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

#include "fprep/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "fprep/csv.hpp"

namespace fprep {

namespace {

void check_label(int label) {
  if (label < 0 || label >= kNumClasses) {
    throw std::invalid_argument("label " + std::to_string(label) + " outside 0-4");
  }
}

void count(ConfusionResult& r, int actual, int predicted) {
  r.multiclass.counts[actual][predicted] += 1;
  const bool a = binarize(actual) == Outcome::positive;
  const bool p = binarize(predicted) == Outcome::positive;
  if (a && p) {
    ++r.binary.tp;
  } else if (a) {
    ++r.binary.fp;
  } else if (p) {
    ++r.binary.fn;
  } else {
    ++r.binary.tn;
  }
}

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

int parse_label(const std::string& field, const char* column, std::string_view name, int line) {
  const std::string s = csv::trim(field);
  int value = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) {
    throw PredictionsError(std::string(name) + ": line " + std::to_string(line) + ": " +
                               column + " '" + s + "' is not an integer",
                           line);
  }
  if (value < 0 || value >= kNumClasses) {
    throw PredictionsError(std::string(name) + ": line " + std::to_string(line) + ": " +
                               column + " " + s + " outside 0-4",
                           line);
  }
  return value;
}

nlohmann::json optional_json(std::optional<double> v) {
  if (!v) return nullptr;
  return *v;
}

nlohmann::json binary_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}};
}

}  // namespace

Outcome binarize(int label) {
  check_label(label);
  return label == 0 ? Outcome::negative : Outcome::positive;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  tn += o.tn;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

std::uint64_t MulticlassMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) {
    for (auto c : row) t += c;
  }
  return t;
}

ConfusionMatrix MulticlassMatrix::binarized() const {
  ConfusionMatrix cm;
  for (int a = 0; a < kNumClasses; ++a) {
    for (int p = 0; p < kNumClasses; ++p) {
      const auto c = counts[a][p];
      if (a > 0 && p > 0) {
        cm.tp += c;
      } else if (a > 0) {
        cm.fp += c;
      } else if (p > 0) {
        cm.fn += c;
      } else {
        cm.tn += c;
      }
    }
  }
  return cm;
}

MulticlassMatrix& MulticlassMatrix::operator+=(const MulticlassMatrix& o) {
  for (int a = 0; a < kNumClasses; ++a) {
    for (int p = 0; p < kNumClasses; ++p) counts[a][p] += o.counts[a][p];
  }
  return *this;
}

ConfusionResult confusion(std::span<const int> actual, std::span<const int> predicted) {
  if (actual.size() != predicted.size()) {
    throw std::invalid_argument("length mismatch: " + std::to_string(actual.size()) +
                                " actual vs " + std::to_string(predicted.size()) + " predicted");
  }
  ConfusionResult r;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    check_label(actual[i]);
    check_label(predicted[i]);
    count(r, actual[i], predicted[i]);
  }
  return r;
}

ConfusionResult confusion(std::span<const Prediction> predictions) {
  ConfusionResult r;
  for (const auto& p : predictions) {
    check_label(p.actual);
    check_label(p.predicted);
    count(r, p.actual, p.predicted);
  }
  return r;
}

Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("empty confusion matrix");
  Metrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  m.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
  m.specificity = ratio(cm.tn, cm.tn + cm.fp);
  return m;
}

std::vector<Prediction> parse_predictions(std::istream& in, std::string_view name) {
  csv::Reader reader(in);
  std::optional<std::vector<std::string>> header;
  try {
    header = reader.next();
  } catch (const std::invalid_argument& e) {
    throw PredictionsError(std::string(name) + ": line " + std::to_string(reader.line()) + ": " +
                               e.what(),
                           reader.line());
  }
  if (!header) throw PredictionsError(std::string(name) + ": empty file");

  int id_col = -1, actual_col = -1, predicted_col = -1;
  for (std::size_t i = 0; i < header->size(); ++i) {
    const std::string h = csv::lower_trim((*header)[i]);
    if (h == "id") id_col = static_cast<int>(i);
    if (h == "actual") actual_col = static_cast<int>(i);
    if (h == "predicted") predicted_col = static_cast<int>(i);
  }
  if (id_col < 0 || actual_col < 0 || predicted_col < 0) {
    throw PredictionsError(std::string(name) + ": line 1: header must contain id,actual,predicted",
                           1);
  }
  const auto needed =
      static_cast<std::size_t>(std::max({id_col, actual_col, predicted_col})) + 1;

  std::vector<Prediction> out;
  for (;;) {
    std::optional<std::vector<std::string>> row;
    try {
      row = reader.next();
    } catch (const std::invalid_argument& e) {
      throw PredictionsError(std::string(name) + ": line " + std::to_string(reader.line()) +
                                 ": " + e.what(),
                             reader.line());
    }
    if (!row) break;
    const int line = reader.line();
    if (row->size() < needed) {
      throw PredictionsError(std::string(name) + ": line " + std::to_string(line) + ": expected " +
                                 std::to_string(needed) + " fields, got " +
                                 std::to_string(row->size()),
                             line);
    }
    Prediction p;
    p.id = csv::trim((*row)[id_col]);
    p.actual = parse_label((*row)[actual_col], "actual", name, line);
    p.predicted = parse_label((*row)[predicted_col], "predicted", name, line);
    out.push_back(std::move(p));
  }
  if (out.empty()) throw PredictionsError(std::string(name) + ": no prediction rows");
  return out;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PredictionsError(path.string() + ": cannot open");
  return parse_predictions(in, path.string());
}

std::string format_percent(std::optional<double> r) {
  if (!r) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *r * 100.0);
  return buf;
}

std::string metrics_row(const Metrics& m) {
  return format_percent(m.accuracy) + " " + format_percent(m.sensitivity) + " " +
         format_percent(m.specificity);
}

nlohmann::json metrics_json(const ConfusionResult& result, bool conventional) {
  const Metrics m = metrics(result.binary);
  nlohmann::json multiclass = nlohmann::json::array();
  for (const auto& row : result.multiclass.counts) multiclass.push_back(row);

  auto entry = [](std::optional<double> r) {
    nlohmann::json j = {{"ratio", optional_json(r)}};
    if (r) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", *r * 100.0);
      j["percent"] = buf;
    } else {
      j["percent"] = nullptr;
    }
    return j;
  };

  nlohmann::json j = {
      {"total", result.binary.total()},
      {"confusion",
       binary_json(result.binary)},
      {"cell_convention",
       "tn: actual 0, predicted 0; fn: actual 0, predicted 1-4; "
       "fp: actual 1-4, predicted 0; tp: actual 1-4, predicted 1-4"},
      {"multiclass", multiclass},
      {"accuracy", entry(m.accuracy)},
      {"sensitivity", entry(m.sensitivity)},
      {"specificity", entry(m.specificity)}};
  if (conventional) j["confusion_conventional"] = binary_json(result.binary.conventional());
  return j;
}

void write_metrics_csv(const Metrics& m, std::ostream& out) {
  out << "metric,ratio,percent\n";
  auto line = [&](const char* name, std::optional<double> r) {
    out << name << ',';
    if (r) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g,%.2f", *r, *r * 100.0);
      out << buf;
    } else {
      out << ',';
    }
    out << '\n';
  };
  line("accuracy", m.accuracy);
  line("sensitivity", m.sensitivity);
  line("specificity", m.specificity);
}

}  // namespace fprep
