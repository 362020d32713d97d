/*
 Copyright 2026 The gjump Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

// JSON views of the library's inputs and reports, JSON readers for the input
// types, and a small CSV writer.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gjump/adjoint.hpp"
#include "gjump/controls.hpp"
#include "gjump/cost.hpp"
#include "gjump/jumps.hpp"
#include "gjump/scenario.hpp"
#include "gjump/variational.hpp"

namespace gjump {

using json = nlohmann::json;

/// Shortest round-trip decimal form ("%.17g"); "nan" and "inf" spelled out.
std::string format_double(double v);

json to_json(const Matrix& m);
json to_json(const VolatilityBounds& b);
json to_json(const ScenarioFamily& f);
json to_json(const MarkSpace& m);
json to_json(const ActionGrid& a);
json to_json(const StrictControl& u);
json to_json(const RelaxedControl& mu);
json to_json(const CostReport& r);  // per-scenario means only, no samples
json to_json(const ValueSearchResult& r);
json to_json(const ChatteringReport& r);
json to_json(const QuotientReport& r);
json to_json(const DerivativeReport& r);
json to_json(const MPCheckReport& r);
json to_json(const NearReport& r);
json to_json(const LipschitzAudit& a);
json to_json(const StabilityReport& r);

/// Scalars and nested arrays are accepted; a number becomes a 1 x 1 matrix.
Matrix matrix_from_json(const json& j, const std::string& where);
ActionGrid actions_from_json(const json& j);
MarkSpace marks_from_json(const json& j);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> row);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

CsvTable mp_table(const MPCheckReport& r);
CsvTable chattering_table(const ChatteringReport& r);
CsvTable stability_table(const StabilityReport& r);

}  // namespace gjump
