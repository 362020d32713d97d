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

#include "gjump/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gjump {

namespace {

// JSON has no inf/nan; keep them readable instead of silently emitting null.
json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json mean_se_json(const MeanSe& m) { return {{"mean", num(m.mean)}, {"se", num(m.se)}}; }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(num(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const VolatilityBounds& b) {
  return {{"dim", b.dim}, {"sigma_low", to_json(b.sigma_low)}, {"sigma_high", to_json(b.sigma_high)},
          {"ellipticity_beta", num(b.ellipticity_beta)}};
}

json to_json(const ScenarioFamily& f) {
  json sc = json::array();
  for (const auto& s : f.scenarios) {
    // Scenarios are block-constant, so list the runs rather than every step.
    json runs = json::array();
    int start = 0;
    for (int k = 1; k <= static_cast<int>(s.values.size()); ++k) {
      if (k == static_cast<int>(s.values.size()) || !s.values[k].isApprox(s.values[start], 0.0)) {
        runs.push_back({{"first_step", start}, {"n_steps", k - start}, {"a", to_json(s.values[start])}});
        start = k;
      }
    }
    sc.push_back({{"id", s.id}, {"runs", std::move(runs)}});
  }
  return {{"bounds", to_json(f.bounds)},
          {"grid", {{"horizon", f.grid.horizon()}, {"n_steps", f.grid.n_steps()}}},
          {"scenarios", std::move(sc)}};
}

json to_json(const MarkSpace& m) {
  json marks = json::array();
  for (const auto& v : m.marks) {
    json mv = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) mv.push_back(num(v[i]));
    marks.push_back(std::move(mv));
  }
  return {{"marks", std::move(marks)}, {"intensities", m.intensities}};
}

json to_json(const ActionGrid& a) {
  json out = json::array();
  for (const auto& v : a.actions) {
    json av = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) av.push_back(num(v[i]));
    out.push_back(std::move(av));
  }
  return out;
}

json to_json(const StrictControl& u) {
  return {{"actions", to_json(u.actions)},
          {"grid", {{"horizon", u.grid.horizon()}, {"n_steps", u.grid.n_steps()}}},
          {"index", u.index}};
}

json to_json(const RelaxedControl& mu) {
  return {{"actions", to_json(mu.actions)},
          {"grid", {{"horizon", mu.grid.horizon()}, {"n_steps", mu.grid.n_steps()}}},
          {"weights", mu.weights}};
}

json to_json(const CostReport& r) {
  json per = json::array();
  for (const auto& m : r.per_scenario) per.push_back(mean_se_json(m));
  return {{"value", num(r.value)}, {"argmax", r.argmax}, {"se", num(r.se)},
          {"n_paths", r.n_paths}, {"seed", r.seed}, {"per_scenario", std::move(per)}};
}

json to_json(const ValueSearchResult& r) {
  json table = json::array();
  for (double v : r.table) table.push_back(num(v));
  json ses = json::array();
  for (const auto& rep : r.reports) ses.push_back(num(rep.se));
  return {{"value", num(r.value)}, {"argmin", r.argmin}, {"table", std::move(table)}, {"se", std::move(ses)}};
}

json to_json(const ChatteringReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"path_gap", num(row.path_gap)},
                    {"path_gap_se", num(row.path_gap_se)},
                    {"j_strict", num(row.j_strict)},
                    {"j_relaxed", num(row.j_relaxed)},
                    {"cost_gap", num(row.cost_gap)},
                    {"cost_gap_se", num(row.cost_gap_se)},
                    {"cost_gap_paired_se", num(row.cost_gap_paired_se)}});
  }
  return {{"rows", std::move(rows)},
          {"path_gap_non_increasing", r.path_gap_non_increasing},
          {"cost_gap_non_increasing", r.cost_gap_non_increasing},
          {"fitted_c", num(r.fitted_c)}};
}

json to_json(const QuotientReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"h", num(row.h)}, {"gap", num(row.gap)}, {"se", num(row.se)}, {"argmax", row.argmax}});
  return {{"rows", std::move(rows)}, {"non_increasing", r.non_increasing}, {"min_ratio", num(r.min_ratio)}};
}

json to_json(const DerivativeReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"h", num(row.h)}, {"fd", num(row.fd)}, {"fd_se", num(row.fd_se)},
                    {"fd_se_combined", num(row.fd_se_combined)}});
  }
  return {{"rows", std::move(rows)},
          {"formula", num(r.formula)},
          {"formula_se", num(r.formula_se)},
          {"formula_argmax", r.formula_argmax},
          {"formula_at_cost_argmax", num(r.formula_at_cost_argmax)},
          {"cost_argmax", r.cost_argmax},
          {"agrees", r.agrees},
          {"tolerance", num(r.tolerance)}};
}

json to_json(const MPCheckReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"block", e.block},
                       {"action", e.action},
                       {"estimate", num(e.estimate)},
                       {"se", num(e.se)},
                       {"slack", num(e.slack)},
                       {"pass", e.pass},
                       {"argmax_scenario", e.argmax},
                       {"hamiltonian_gap", num(e.hamiltonian_gap)},
                       {"f_gamma", num(e.f.gamma)},
                       {"f_q_sigma", num(e.f.q_sigma)},
                       {"f_s_diagnostic", num(e.f.s_term)}});
  }
  return {{"verdict", r.verdict ? "pass" : "fail"},
          {"worst_entry", num(r.worst_entry)},
          {"worst_block", r.worst_block},
          {"worst_action", r.worst_action},
          {"within_hypothesis", r.within_hypothesis},
          {"label", r.label},
          {"slack_sigmas", num(r.slack_sigmas)},
          {"extra_slack", num(r.extra_slack)},
          {"max_condition", num(r.max_condition)},
          {"entries", std::move(entries)}};
}

json to_json(const NearReport& r) {
  json ek = json::array();
  for (const auto& row : r.ekeland) {
    ek.push_back({{"j_candidate", num(row.j_candidate)}, {"distance", num(row.distance)},
                  {"margin", num(row.margin)}, {"se", num(row.se)}, {"holds", row.holds}});
  }
  return {{"mp", to_json(r.mp)},     {"epsilon", num(r.epsilon)}, {"c", num(r.c)},
          {"minimal_c", num(r.minimal_c)}, {"j_un", num(r.j_un)}, {"ekeland", std::move(ek)},
          {"ekeland_holds", r.ekeland_holds}};
}

json to_json(const LipschitzAudit& a) {
  return {{"n_probes", a.n_probes}, {"passed", a.passed}, {"c0", num(a.c0)},
          {"worst_ratio", num(a.worst_ratio)}, {"pass", a.pass()}};
}

json to_json(const StabilityReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"p_gap", num(row.p_gap)}, {"p_gap_se", num(row.p_gap_se)},
                    {"q_gap", num(row.q_gap)}, {"q_gap_se", num(row.q_gap_se)},
                    {"r_gap", num(row.r_gap)}, {"r_gap_se", num(row.r_gap_se)},
                    {"k_gap", num(row.k_gap)}});
  }
  return {{"rows", std::move(rows)},
          {"p_non_increasing", r.p_non_increasing},
          {"q_non_increasing", r.q_non_increasing},
          {"r_non_increasing", r.r_non_increasing},
          {"k_zero", r.k_zero},
          {"audit", to_json(r.audit)}};
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  if (j.is_number()) {
    Matrix m(1, 1);
    m(0, 0) = j.get<double>();
    return m;
  }
  if (!j.is_array() || j.empty()) throw InvalidArgument(where + ": expected a number or a nested array");
  const bool nested = j.front().is_array();
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = nested ? static_cast<Eigen::Index>(j.front().size()) : 1;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (nested) {
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
        throw InvalidArgument(where + ": ragged matrix");
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!row[static_cast<std::size_t>(c)].is_number()) throw InvalidArgument(where + ": non-numeric entry");
        m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
    } else {
      if (!row.is_number()) throw InvalidArgument(where + ": non-numeric entry");
      m(r, 0) = row.get<double>();
    }
  }
  return m;
}

ActionGrid actions_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw InvalidArgument("actions: expected a non-empty array");
  ActionGrid g;
  for (const auto& a : j) {
    if (a.is_number()) {
      g.actions.push_back(Vector::Constant(1, a.get<double>()));
    } else {
      g.actions.push_back(matrix_from_json(a, "actions").col(0));
    }
  }
  g.validate();
  return g;
}

MarkSpace marks_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("marks: expected an object with marks and intensities");
  MarkSpace m;
  for (const auto& v : j.at("marks")) {
    m.marks.push_back(v.is_number() ? Vector::Constant(1, v.get<double>()) : Vector(matrix_from_json(v, "marks").col(0)));
  }
  m.intensities = j.at("intensities").get<std::vector<double>>();
  m.validate();
  return m;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw InvalidArgument("CsvTable: row width does not match the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << csv_escape(cells[i]);
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return os.str();
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << str();
  if (!out) throw Error("write failed: " + path.string());
}

CsvTable mp_table(const MPCheckReport& r) {
  CsvTable t({"block", "action", "estimate", "stderr", "slack", "verdict"});
  for (const auto& e : r.entries) {
    t.add_row({std::to_string(e.block), std::to_string(e.action), format_double(e.estimate),
               format_double(e.se), format_double(e.slack), e.pass ? "pass" : "fail"});
  }
  return t;
}

CsvTable chattering_table(const ChatteringReport& r) {
  CsvTable t({"n", "path_gap", "path_gap_se", "j_strict", "j_relaxed", "cost_gap", "cost_gap_se",
              "cost_gap_paired_se"});
  for (const auto& row : r.rows) {
    t.add_row({std::to_string(row.n), format_double(row.path_gap), format_double(row.path_gap_se),
               format_double(row.j_strict), format_double(row.j_relaxed), format_double(row.cost_gap),
               format_double(row.cost_gap_se), format_double(row.cost_gap_paired_se)});
  }
  return t;
}

CsvTable stability_table(const StabilityReport& r) {
  CsvTable t({"n", "p_gap", "p_gap_se", "q_gap", "q_gap_se", "r_gap", "r_gap_se", "k_gap"});
  for (const auto& row : r.rows) {
    t.add_row({std::to_string(row.n), format_double(row.p_gap), format_double(row.p_gap_se),
               format_double(row.q_gap), format_double(row.q_gap_se), format_double(row.r_gap),
               format_double(row.r_gap_se), format_double(row.k_gap)});
  }
  return t;
}

}  // namespace gjump
