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

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fprep::csv {

/// Splits one line into fields. Double-quoted fields may contain commas and
/// doubled quotes; fields never span lines. Throws std::invalid_argument on an
/// unterminated quote.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field only when it contains a comma, quote or line break.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Line-oriented reader that tracks 1-based line numbers (header is line 1).
/// Blank lines are skipped; a trailing CR is stripped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::optional<std::vector<std::string>> next();
  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

std::string trim(std::string_view s);
std::string lower_trim(std::string_view s);

}  // namespace fprep::csv
