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

#include "runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include <gjump/adjoint.hpp>
#include <gjump/cost.hpp>
#include <gjump/models.hpp>
#include <gjump/variational.hpp>

namespace gjump::cli {

namespace {

// Validation --------------------------------------------------------------------

class Collector {
 public:
  explicit Collector(std::vector<Violation>& out) : out_(out) {}

  void add(const std::string& path, const std::string& msg) { out_.push_back({path, msg}); }
  std::size_t count() const { return out_.size(); }

  const json* require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) {
      add(path + "/" + key, "missing required field '" + key + "'");
      return nullptr;
    }
    return &obj.at(key);
  }
  static const json* optional(const json& obj, const std::string& key) {
    return obj.contains(key) ? &obj.at(key) : nullptr;
  }

  bool number(const json* j, const std::string& path) {
    if (j == nullptr) return false;
    if (!j->is_number()) {
      add(path, "expected a number, got " + j->dump());
      return false;
    }
    if (!std::isfinite(j->get<double>())) {
      add(path, "value must be finite");
      return false;
    }
    return true;
  }
  bool positive(const json* j, const std::string& path) {
    if (!number(j, path)) return false;
    if (!(j->get<double>() > 0.0)) {
      add(path, "must be > 0, got " + j->dump());
      return false;
    }
    return true;
  }
  bool non_negative(const json* j, const std::string& path) {
    if (!number(j, path)) return false;
    if (!(j->get<double>() >= 0.0)) {
      add(path, "must be >= 0, got " + j->dump());
      return false;
    }
    return true;
  }
  bool integer(const json* j, const std::string& path, long long lo) {
    if (j == nullptr) return false;
    if (!j->is_number_integer()) {
      add(path, "expected an integer, got " + j->dump());
      return false;
    }
    if (j->get<long long>() < lo) {
      add(path, "must be >= " + std::to_string(lo) + ", got " + j->dump());
      return false;
    }
    return true;
  }
  bool object(const json* j, const std::string& path) {
    if (j == nullptr) return false;
    if (!j->is_object()) {
      add(path, "expected an object, got " + j->dump());
      return false;
    }
    return true;
  }
  bool array(const json* j, const std::string& path) {
    if (j == nullptr) return false;
    if (!j->is_array()) {
      add(path, "expected an array, got " + j->dump());
      return false;
    }
    return true;
  }
  void unknown_keys(const json& obj, const std::string& path, const std::set<std::string>& known) {
    for (const auto& [k, v] : obj.items()) {
      if (!known.count(k)) add(path + "/" + k, "unknown field '" + k + "'");
    }
  }

 private:
  std::vector<Violation>& out_;
};

bool is_kind(const std::string& k) {
  return std::find_if(std::begin(kKinds), std::end(kKinds), [&](const char* s) { return k == s; }) !=
         std::end(kKinds);
}

bool needs_strict(const std::string& kind) { return kind == "variational" || kind == "mp-strict"; }
bool needs_relaxed(const std::string& kind) {
  return kind == "chattering" || kind == "mp-relaxed" || kind == "bsde-stability";
}
bool is_relaxed_type(const std::string& t) { return t == "relaxed" || t == "relaxed_constant" || t == "bruteforce_relaxed"; }
bool is_strict_type(const std::string& t) { return t == "strict" || t == "strict_blocks" || t == "bruteforce_strict"; }

void check_n_list(Collector& c, const json& e, const std::string& path, int n_steps, bool required) {
  const json* nl = required ? c.require(e, "n_list", path) : Collector::optional(e, "n_list");
  if (!c.array(nl, path + "/n_list")) return;
  if (nl->empty()) c.add(path + "/n_list", "must not be empty");
  long long prev = 0;
  for (std::size_t i = 0; i < nl->size(); ++i) {
    const std::string p = path + "/n_list/" + std::to_string(i);
    if (!c.integer(&(*nl)[i], p, 1)) continue;
    const long long v = (*nl)[i].get<long long>();
    if (v <= prev) c.add(p, "n_list must be strictly ascending, got " + std::to_string(v));
    if (n_steps > 0 && n_steps % v != 0)
      c.add(p, std::to_string(v) + " does not divide grid.n_steps = " + std::to_string(n_steps));
    prev = v;
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<Violation> v)
    : Error("invalid config (" + std::to_string(v.size()) + " violation" + (v.size() == 1 ? "" : "s") + ")"),
      violations_(std::move(v)) {}

std::vector<Violation> validate_config(const json& doc) {
  std::vector<Violation> out;
  Collector c(out);
  if (!doc.is_object()) {
    c.add("", "config must be a JSON object");
    return out;
  }
  c.unknown_keys(doc, "", {"name", "description", "kind", "model", "grid", "bounds", "scenarios", "marks",
                           "actions", "x0", "control", "n_paths", "seed", "output_dir", "experiment"});

  std::string kind;
  if (const json* k = c.require(doc, "kind", "")) {
    if (!k->is_string() || !is_kind(k->get<std::string>())) {
      std::string known;
      for (const char* s : kKinds) known += (known.empty() ? "" : ", ") + std::string(s);
      c.add("/kind", "must be one of " + known + ", got " + k->dump());
    } else {
      kind = k->get<std::string>();
    }
  }
  if (const json* s = c.require(doc, "seed", "")) {
    if (!s->is_number_unsigned()) c.add("/seed", "expected a non-negative integer, got " + s->dump());
  }
  c.integer(c.require(doc, "n_paths", ""), "/n_paths", 2);
  if (const json* name = Collector::optional(doc, "name"); name && !name->is_string()) c.add("/name", "expected a string");
  if (const json* od = Collector::optional(doc, "output_dir"); od && !od->is_string())
    c.add("/output_dir", "expected a string");

  // Model.
  std::string model_name;
  const json* model = c.require(doc, "model", "");
  if (c.object(model, "/model")) {
    c.unknown_keys(*model, "/model", {"name", "params"});
    if (const json* n = c.require(*model, "name", "/model")) {
      if (!n->is_string()) {
        c.add("/model/name", "expected a string");
      } else {
        model_name = n->get<std::string>();
        bool found = false;
        for (const auto& m : list_models()) found = found || m.name == model_name;
        if (!found) {
          c.add("/model/name", "unknown model '" + model_name + "'");
          model_name.clear();
        }
      }
    }
    if (const json* params = Collector::optional(*model, "params"); c.object(params, "/model/params")) {
      for (const auto& [k, v] : params->items()) {
        c.number(&v, "/model/params/" + k);
        if (!model_name.empty()) {
          bool known = false;
          for (const auto& m : list_models())
            if (m.name == model_name) known = m.defaults.count(k) > 0;
          if (!known) c.add("/model/params/" + k, "model '" + model_name + "' has no parameter '" + k + "'");
        }
      }
    }
  }

  // Grid.
  int n_steps = 0;
  const json* grid = c.require(doc, "grid", "");
  if (c.object(grid, "/grid")) {
    c.unknown_keys(*grid, "/grid", {"horizon", "n_steps"});
    c.positive(c.require(*grid, "horizon", "/grid"), "/grid/horizon");
    if (c.integer(c.require(*grid, "n_steps", "/grid"), "/grid/n_steps", 1)) n_steps = grid->at("n_steps").get<int>();
  }

  // Volatility bounds.
  const json* bounds = c.require(doc, "bounds", "");
  if (c.object(bounds, "/bounds")) {
    c.unknown_keys(*bounds, "/bounds", {"sigma_low", "sigma_high"});
    const json* lo = c.require(*bounds, "sigma_low", "/bounds");
    const json* hi = c.require(*bounds, "sigma_high", "/bounds");
    if (lo && hi) {
      try {
        VolatilityBounds::make(matrix_from_json(*lo, "sigma_low"), matrix_from_json(*hi, "sigma_high"));
      } catch (const std::exception& e) {
        c.add("/bounds", e.what());
      }
    }
  }

  if (const json* sc = Collector::optional(doc, "scenarios"); c.object(sc, "/scenarios")) {
    c.unknown_keys(*sc, "/scenarios", {"strategy", "blocks", "count", "seed"});
    std::string strategy = "corners";
    if (const json* st = Collector::optional(*sc, "strategy")) {
      if (!st->is_string() || (*st != "corners" && *st != "random")) {
        c.add("/scenarios/strategy", "must be \"corners\" or \"random\", got " + st->dump());
      } else {
        strategy = st->get<std::string>();
      }
    }
    if (const json* b = Collector::optional(*sc, "blocks")) {
      if (c.integer(b, "/scenarios/blocks", 1) && n_steps > 0 && b->get<long long>() > n_steps)
        c.add("/scenarios/blocks", "more blocks than grid steps");
    }
    if (strategy == "random") c.integer(c.require(*sc, "count", "/scenarios"), "/scenarios/count", 1);
    if (const json* s = Collector::optional(*sc, "seed"); s && !s->is_number_unsigned())
      c.add("/scenarios/seed", "expected a non-negative integer");
  }

  if (const json* marks = Collector::optional(doc, "marks"); c.object(marks, "/marks")) {
    try {
      marks_from_json(*marks);
    } catch (const std::exception& e) {
      c.add("/marks", e.what());
    }
  }

  int n_actions = 0;
  if (const json* actions = c.require(doc, "actions", "")) {
    try {
      n_actions = static_cast<int>(actions_from_json(*actions).size());
    } catch (const std::exception& e) {
      c.add("/actions", e.what());
    }
  }

  if (const json* x0 = c.require(doc, "x0", "")) {
    if (x0->is_number()) {
      c.number(x0, "/x0");
    } else if (c.array(x0, "/x0")) {
      if (x0->size() != 1) c.add("/x0", "registry models have a one-dimensional state; got length " + std::to_string(x0->size()));
      for (std::size_t i = 0; i < x0->size(); ++i) c.number(&(*x0)[i], "/x0/" + std::to_string(i));
    }
  }

  // Control.
  std::string ctype;
  const json* control = c.require(doc, "control", "");
  if (c.object(control, "/control")) {
    const json* t = c.require(*control, "type", "/control");
    const std::set<std::string> types{"strict", "strict_blocks", "relaxed", "relaxed_constant",
                                      "bruteforce_strict", "bruteforce_relaxed"};
    if (t && (!t->is_string() || !types.count(t->get<std::string>()))) {
      c.add("/control/type",
            "must be one of strict, strict_blocks, relaxed, relaxed_constant, bruteforce_strict, "
            "bruteforce_relaxed; got " + t->dump());
    } else if (t) {
      ctype = t->get<std::string>();
    }
    auto index_ok = [&](const json& v, const std::string& p) {
      if (c.integer(&v, p, 0) && n_actions > 0 && v.get<long long>() >= n_actions)
        c.add(p, "action index " + v.dump() + " out of range (" + std::to_string(n_actions) + " actions)");
    };
    auto weights_ok = [&](const json& w, const std::string& p) {
      if (!c.array(&w, p)) return;
      if (n_actions > 0 && static_cast<int>(w.size()) != n_actions)
        c.add(p, "expected " + std::to_string(n_actions) + " weights, got " + std::to_string(w.size()));
      double sum = 0.0;
      bool ok = true;
      for (std::size_t i = 0; i < w.size(); ++i) {
        ok = c.non_negative(&w[i], p + "/" + std::to_string(i)) && ok;
        if (ok) sum += w[i].get<double>();
      }
      if (ok && std::abs(sum - 1.0) > 1e-12) c.add(p, "weights must sum to 1, got " + format_double(sum));
    };
    if (ctype == "strict") {
      c.unknown_keys(*control, "/control", {"type", "index"});
      if (const json* idx = c.require(*control, "index", "/control"); c.array(idx, "/control/index")) {
        if (n_steps > 0 && static_cast<int>(idx->size()) != n_steps)
          c.add("/control/index", "expected " + std::to_string(n_steps) + " entries, got " + std::to_string(idx->size()));
        for (std::size_t i = 0; i < idx->size(); ++i) index_ok((*idx)[i], "/control/index/" + std::to_string(i));
      }
    } else if (ctype == "strict_blocks") {
      c.unknown_keys(*control, "/control", {"type", "blocks"});
      if (const json* b = c.require(*control, "blocks", "/control"); c.array(b, "/control/blocks")) {
        if (b->empty()) c.add("/control/blocks", "must not be empty");
        if (n_steps > 0 && static_cast<int>(b->size()) > n_steps) c.add("/control/blocks", "more blocks than grid steps");
        for (std::size_t i = 0; i < b->size(); ++i) index_ok((*b)[i], "/control/blocks/" + std::to_string(i));
      }
    } else if (ctype == "relaxed") {
      c.unknown_keys(*control, "/control", {"type", "weights"});
      if (const json* w = c.require(*control, "weights", "/control"); c.array(w, "/control/weights")) {
        if (n_steps > 0 && static_cast<int>(w->size()) != n_steps)
          c.add("/control/weights", "expected " + std::to_string(n_steps) + " rows, got " + std::to_string(w->size()));
        for (std::size_t i = 0; i < w->size(); ++i) weights_ok((*w)[i], "/control/weights/" + std::to_string(i));
      }
    } else if (ctype == "relaxed_constant") {
      c.unknown_keys(*control, "/control", {"type", "weights"});
      if (const json* w = c.require(*control, "weights", "/control")) weights_ok(*w, "/control/weights");
    } else if (ctype == "bruteforce_strict") {
      c.unknown_keys(*control, "/control", {"type", "blocks"});
      if (c.integer(c.require(*control, "blocks", "/control"), "/control/blocks", 1) && n_steps > 0 &&
          control->at("blocks").get<long long>() > n_steps)
        c.add("/control/blocks", "more blocks than grid steps");
    } else if (ctype == "bruteforce_relaxed") {
      c.unknown_keys(*control, "/control", {"type", "resolution"});
      c.integer(c.require(*control, "resolution", "/control"), "/control/resolution", 1);
    }
    if (!kind.empty() && !ctype.empty()) {
      if (needs_strict(kind) && !is_strict_type(ctype))
        c.add("/control/type", "kind '" + kind + "' needs a strict control, got '" + ctype + "'");
      if (needs_relaxed(kind) && !is_relaxed_type(ctype))
        c.add("/control/type", "kind '" + kind + "' needs a relaxed control, got '" + ctype + "'");
    }
  }

  // Experiment parameters.
  static const json kEmpty = json::object();
  const json* ex = Collector::optional(doc, "experiment");
  if (ex != nullptr && !c.object(ex, "/experiment")) ex = nullptr;
  const json& e = ex ? *ex : kEmpty;
  const std::string ep = "/experiment";
  auto mp_fields = [&]() {
    if (const json* b = Collector::optional(e, "blocks")) {
      if (c.integer(b, ep + "/blocks", 1) && n_steps > 0 && b->get<long long>() > n_steps)
        c.add(ep + "/blocks", "more blocks than grid steps");
    }
    if (const json* d = Collector::optional(e, "degree")) c.integer(d, ep + "/degree", 0);
    if (const json* m = Collector::optional(e, "min_jump_events")) c.integer(m, ep + "/min_jump_events", 1);
    if (const json* s = Collector::optional(e, "slack_sigmas")) c.non_negative(s, ep + "/slack_sigmas");
  };
  if (kind == "simulate") {
    c.unknown_keys(e, ep, {"write_paths"});
    if (const json* w = Collector::optional(e, "write_paths")) c.integer(w, ep + "/write_paths", 0);
  } else if (kind == "cost") {
    c.unknown_keys(e, ep, {});
  } else if (kind == "chattering") {
    c.unknown_keys(e, ep, {"n_list"});
    check_n_list(c, e, ep, n_steps, true);
  } else if (kind == "variational") {
    c.unknown_keys(e, ep, {"t0", "h_list", "action"});
    if (const json* t0 = c.require(e, "t0", ep)) c.non_negative(t0, ep + "/t0");
    if (const json* a = c.require(e, "action", ep)) {
      if (c.integer(a, ep + "/action", 0) && n_actions > 0 && a->get<long long>() >= n_actions)
        c.add(ep + "/action", "action index " + a->dump() + " out of range");
    }
    if (const json* hl = c.require(e, "h_list", ep); c.array(hl, ep + "/h_list")) {
      if (hl->empty()) c.add(ep + "/h_list", "must not be empty");
      double prev = INFINITY;
      for (std::size_t i = 0; i < hl->size(); ++i) {
        const std::string p = ep + "/h_list/" + std::to_string(i);
        if (!c.positive(&(*hl)[i], p)) continue;
        const double h = (*hl)[i].get<double>();
        if (!(h < prev)) c.add(p, "h_list must be strictly descending");
        prev = h;
      }
    }
  } else if (kind == "mp-strict" || kind == "mp-relaxed") {
    c.unknown_keys(e, ep, {"blocks", "degree", "min_jump_events", "slack_sigmas"});
    mp_fields();
  } else if (kind == "mp-near") {
    c.unknown_keys(e, ep, {"blocks", "degree", "min_jump_events", "slack_sigmas", "n", "epsilon", "c",
                           "candidate_blocks"});
    mp_fields();
    if (const json* cc = c.require(e, "c", ep)) c.non_negative(cc, ep + "/c");
    if (const json* eps = Collector::optional(e, "epsilon")) c.non_negative(eps, ep + "/epsilon");
    if (const json* cb = Collector::optional(e, "candidate_blocks")) c.integer(cb, ep + "/candidate_blocks", 1);
    if (is_relaxed_type(ctype)) {
      if (const json* n = c.require(e, "n", ep); c.integer(n, ep + "/n", 1) && n_steps > 0 &&
                                                 n_steps % n->get<long long>() != 0)
        c.add(ep + "/n", n->dump() + " does not divide grid.n_steps = " + std::to_string(n_steps));
    } else if (is_strict_type(ctype) && !e.contains("epsilon")) {
      c.add(ep + "/epsilon", "a strict u_n needs an explicit epsilon");
    }
  } else if (kind == "bsde-stability") {
    c.unknown_keys(e, ep, {"n_list", "degree", "min_jump_events", "audit_probes"});
    check_n_list(c, e, ep, n_steps, true);
    if (const json* d = Collector::optional(e, "degree")) c.integer(d, ep + "/degree", 0);
    if (const json* m = Collector::optional(e, "min_jump_events")) c.integer(m, ep + "/min_jump_events", 1);
    if (const json* a = Collector::optional(e, "audit_probes")) c.integer(a, ep + "/audit_probes", 1);
  }

  // Semantic model check only once the document is structurally sound.
  if (c.count() == 0) {
    try {
      ModelParams params;
      if (model->contains("params"))
        for (const auto& [k, v] : model->at("params").items()) params[k] = v.get<double>();
      const ModelSpec m = make_model(model_name, params);
      const MarkSpace marks = doc.contains("marks") ? marks_from_json(doc.at("marks")) : MarkSpace::none();
      for (const auto& issue : check_model(m, actions_from_json(doc.at("actions")), marks)) {
        c.add("/model", issue.where + ": " + issue.message);
      }
    } catch (const std::exception& ex2) {
      c.add("/model", ex2.what());
    }
  }
  return out;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

// Running ---------------------------------------------------------------------

namespace {

struct Setup {
  std::string name;
  std::string kind;
  std::string model_name;
  ModelParams params;
  ModelSpec model;
  TimeGrid grid{1.0, 1};
  VolatilityBounds bounds;
  ScenarioFamily family;
  MarkSpace marks;
  ActionGrid actions;
  Vector x0;
  json control;
  json experiment;
  int n_paths = 0;
  std::uint64_t seed = 0;
};

Setup parse(const json& doc, std::uint64_t seed) {
  Setup s;
  s.kind = doc.at("kind").get<std::string>();
  s.name = doc.value("name", s.kind);
  s.model_name = doc.at("model").at("name").get<std::string>();
  ModelParams given;
  if (doc.at("model").contains("params"))
    for (const auto& [k, v] : doc.at("model").at("params").items()) given[k] = v.get<double>();
  s.params = resolve_params(s.model_name, given);
  s.model = make_model(s.model_name, given);
  s.grid = TimeGrid(doc.at("grid").at("horizon").get<double>(), doc.at("grid").at("n_steps").get<int>());
  s.bounds = VolatilityBounds::make(matrix_from_json(doc.at("bounds").at("sigma_low"), "sigma_low"),
                                    matrix_from_json(doc.at("bounds").at("sigma_high"), "sigma_high"));
  ScenarioStrategy strategy = ScenarioStrategy::corners();
  if (doc.contains("scenarios")) {
    const json& sc = doc.at("scenarios");
    const int blocks = sc.value("blocks", 2);
    if (sc.value("strategy", std::string("corners")) == "random") {
      strategy = ScenarioStrategy::random(sc.at("count").get<int>(), sc.value("seed", seed), blocks);
    } else {
      strategy = ScenarioStrategy::corners(blocks);
    }
  }
  s.family = build_scenario_family(s.bounds, s.grid, strategy);
  s.marks = doc.contains("marks") ? marks_from_json(doc.at("marks")) : MarkSpace::none();
  s.actions = actions_from_json(doc.at("actions"));
  const json& x0 = doc.at("x0");
  s.x0 = x0.is_number() ? Vector::Constant(1, x0.get<double>()) : Vector(matrix_from_json(x0, "x0").col(0));
  s.control = doc.at("control");
  s.experiment = doc.value("experiment", json::object());
  s.n_paths = doc.at("n_paths").get<int>();
  s.seed = seed;
  return s;
}

// Output files are produced in memory first so digests match the bytes written.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;

  void add(const std::string& name, std::string content) { files.emplace_back(name, std::move(content)); }
  void csv(const std::string& name, const CsvTable& t) { add(name, t.str()); }
  void series(const std::string& name, const std::string& xl, const std::string& yl,
              const std::vector<double>& x, const std::vector<double>& y) {
    CsvTable t({xl, yl});
    for (std::size_t i = 0; i < x.size(); ++i) t.add_row({format_double(x[i]), format_double(y[i])});
    add(name, t.str());
  }
};

StrictControl resolve_strict(const Setup& s, const RandomInputs& inputs, Outputs& out, json& summary) {
  const std::string type = s.control.at("type").get<std::string>();
  if (type == "strict") {
    StrictControl u{s.actions, s.grid, s.control.at("index").get<std::vector<int>>()};
    u.validate();
    return u;
  }
  if (type == "strict_blocks") {
    return StrictControl::from_blocks(s.actions, s.grid, s.control.at("blocks").get<std::vector<int>>());
  }
  const int blocks = s.control.at("blocks").get<int>();
  const auto candidates = enumerate_block_controls(s.actions, s.grid, blocks);
  const ValueSearchResult v = value_bruteforce(s.model, candidates, s.family, inputs, s.x0);
  CsvTable t({"candidate", "block_actions", "cost", "stderr"});
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::string blocks_str;
    for (int b = 0; b < blocks; ++b) {
      const int k = static_cast<int>((static_cast<long long>(b) * s.grid.n_steps() + blocks - 1) / blocks);
      blocks_str += (b ? " " : "") + std::to_string(candidates[i].index[k]);
    }
    t.add_row({std::to_string(i), blocks_str, format_double(v.table[i]), format_double(v.reports[i].se)});
  }
  out.csv("value_table.csv", t);
  summary["value_search"] = to_json(v);
  summary["value_search"]["argmin_control"] = to_json(candidates[v.argmin]);
  return candidates[v.argmin];
}

RelaxedControl resolve_relaxed(const Setup& s, const RandomInputs& inputs, Outputs& out, json& summary) {
  const std::string type = s.control.at("type").get<std::string>();
  if (type == "relaxed") {
    RelaxedControl mu{s.actions, s.grid, s.control.at("weights").get<std::vector<std::vector<double>>>()};
    mu.validate();
    return mu;
  }
  if (type == "relaxed_constant") {
    return RelaxedControl::constant(s.actions, s.grid, s.control.at("weights").get<std::vector<double>>());
  }
  if (is_strict_type(type)) return embed_strict(resolve_strict(s, inputs, out, summary));
  const auto candidates = simplex_grid_controls(s.actions, s.grid, s.control.at("resolution").get<int>());
  const ValueSearchResult v = value_bruteforce(s.model, candidates, s.family, inputs, s.x0);
  std::vector<std::string> header{"candidate"};
  for (std::size_t a = 0; a < s.actions.size(); ++a) header.push_back("w" + std::to_string(a));
  header.push_back("cost");
  header.push_back("stderr");
  CsvTable t(header);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (double w : candidates[i].weights.front()) row.push_back(format_double(w));
    row.push_back(format_double(v.table[i]));
    row.push_back(format_double(v.reports[i].se));
    t.add_row(row);
  }
  out.csv("value_table.csv", t);
  summary["value_search"] = to_json(v);
  summary["value_search"]["argmin_weights"] = candidates[v.argmin].weights.front();
  return candidates[v.argmin];
}

AdjointOptions adjoint_options(const json& e) {
  AdjointOptions o;
  o.blocks = e.value("blocks", o.blocks);
  o.degree = e.value("degree", o.degree);
  o.min_jump_events = e.value("min_jump_events", o.min_jump_events);
  o.slack_sigmas = e.value("slack_sigmas", o.slack_sigmas);
  return o;
}

void emit_mp(const MPCheckReport& r, Outputs& out) {
  out.csv("mp_entries.csv", mp_table(r));
  std::vector<double> x, y;
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    x.push_back(static_cast<double>(i));
    y.push_back(r.entries[i].estimate);
  }
  out.series("plot_mp_entries.csv", "entry", "estimate", x, y);
}

bool dispatch(const Setup& s, Outputs& out, json& summary) {
  const RandomInputs inputs = make_inputs(s.family, s.marks, s.n_paths, s.seed);
  const json& e = s.experiment;
  if (s.kind == "simulate" || s.kind == "cost") {
    const std::string type = s.control.at("type").get<std::string>();
    ControlSchedule sched;
    JumpSample jumps = inputs.jumps;
    if (is_strict_type(type)) {
      const StrictControl u = resolve_strict(s, inputs, out, summary);
      summary["control"] = to_json(u);
      sched = ControlSchedule::from(u);
    } else {
      const RelaxedControl mu = resolve_relaxed(s, inputs, out, summary);
      summary["control"] = to_json(mu);
      jumps = tag_jumps(inputs.jumps, mu);
      sched = ControlSchedule::from(mu);
    }
    const StateEnsemble states = simulate(s.model, sched, s.family, inputs.noise, jumps, s.x0);
    const CostReport cost = cost_report(path_costs(s.model, sched, states), s.seed);
    summary["cost"] = to_json(cost);
    CsvTable ct({"scenario", "mean", "stderr"});
    for (std::size_t i = 0; i < cost.per_scenario.size(); ++i)
      ct.add_row({std::to_string(i), format_double(cost.per_scenario[i].mean), format_double(cost.per_scenario[i].se)});
    out.csv("cost.csv", ct);
    if (s.kind == "simulate") {
      const int write = std::min(e.value("write_paths", 16), states.n_paths());
      std::vector<std::string> header{"scenario", "path", "step", "t"};
      for (int i = 0; i < states.dim(); ++i) header.push_back("x" + std::to_string(i));
      CsvTable t(header);
      for (int sc = 0; sc < states.n_scenarios(); ++sc)
        for (int p = 0; p < write; ++p)
          for (int k = 0; k <= states.n_steps(); ++k) {
            std::vector<std::string> row{std::to_string(sc), std::to_string(p), std::to_string(k),
                                         format_double(s.grid.time(k))};
            for (int i = 0; i < states.dim(); ++i) row.push_back(format_double(states.x(sc, p, k)[i]));
            t.add_row(row);
          }
      out.csv("states.csv", t);
      for (int sc = 0; sc < states.n_scenarios(); ++sc) {
        std::vector<double> tt, m;
        for (int k = 0; k <= states.n_steps(); ++k) {
          std::vector<double> v(states.n_paths());
          for (int p = 0; p < states.n_paths(); ++p) v[p] = states.x(sc, p, k)[0];
          tt.push_back(s.grid.time(k));
          m.push_back(pairwise_sum(v) / states.n_paths());
        }
        out.series("plot_mean_state_s" + std::to_string(sc) + ".csv", "t", "mean_x0", tt, m);
      }
    }
    return true;
  }
  if (s.kind == "chattering") {
    const RelaxedControl mu = resolve_relaxed(s, inputs, out, summary);
    summary["control"] = to_json(mu);
    const ChatteringReport r =
        chattering_report(s.model, mu, s.family, inputs, s.x0, e.at("n_list").get<std::vector<int>>());
    summary["report"] = to_json(r);
    out.csv("chattering.csv", chattering_table(r));
    std::vector<double> n, pg, cg;
    for (const auto& row : r.rows) {
      n.push_back(row.n);
      pg.push_back(row.path_gap);
      cg.push_back(row.cost_gap);
    }
    out.series("plot_path_gap.csv", "n", "path_gap", n, pg);
    out.series("plot_cost_gap.csv", "n", "cost_gap", n, cg);
    return r.path_gap_non_increasing && r.cost_gap_non_increasing;
  }
  if (s.kind == "variational") {
    const StrictControl u = resolve_strict(s, inputs, out, summary);
    summary["control"] = to_json(u);
    const double t0 = e.at("t0").get<double>();
    const int action = e.at("action").get<int>();
    const auto h_list = e.at("h_list").get<std::vector<double>>();
    const QuotientReport q = difference_quotient_gap(s.model, u, t0, action, h_list, s.family, inputs, s.x0);
    const DerivativeReport d = gateaux_derivative(s.model, u, t0, action, h_list, s.family, inputs, s.x0);
    summary["quotient"] = to_json(q);
    summary["derivative"] = to_json(d);
    CsvTable qt({"h", "gap", "stderr", "argmax_scenario"});
    std::vector<double> hs, gs, fds;
    for (const auto& row : q.rows) {
      qt.add_row({format_double(row.h), format_double(row.gap), format_double(row.se), std::to_string(row.argmax)});
      hs.push_back(row.h);
      gs.push_back(row.gap);
    }
    out.csv("quotient.csv", qt);
    CsvTable dt({"h", "fd", "fd_stderr", "fd_stderr_combined"});
    for (const auto& row : d.rows) {
      dt.add_row({format_double(row.h), format_double(row.fd), format_double(row.fd_se), format_double(row.fd_se_combined)});
      fds.push_back(row.fd);
    }
    out.csv("derivative.csv", dt);
    out.series("plot_quotient_gap.csv", "h", "gap", hs, gs);
    out.series("plot_fd_derivative.csv", "h", "fd", hs, fds);
    return q.non_increasing && d.agrees;
  }
  if (s.kind == "mp-strict") {
    const StrictControl u = resolve_strict(s, inputs, out, summary);
    summary["control"] = to_json(u);
    const MPCheckReport r = mp_check_strict(s.model, u, s.family, inputs, s.x0, adjoint_options(e));
    summary["report"] = to_json(r);
    emit_mp(r, out);
    return r.verdict;
  }
  if (s.kind == "mp-relaxed") {
    const RelaxedControl mu = resolve_relaxed(s, inputs, out, summary);
    summary["control"] = to_json(mu);
    const MPCheckReport r = mp_check_relaxed(s.model, mu, s.family, inputs, s.x0, adjoint_options(e));
    summary["report"] = to_json(r);
    emit_mp(r, out);
    return r.verdict;
  }
  if (s.kind == "mp-near") {
    const AdjointOptions opt = adjoint_options(e);
    const std::string type = s.control.at("type").get<std::string>();
    StrictControl un;
    double eps = 0.0;
    if (is_relaxed_type(type)) {
      const RelaxedControl mu = resolve_relaxed(s, inputs, out, summary);
      summary["relaxed_control"] = to_json(mu);
      un = chattering(mu, e.at("n").get<int>());
      const CostReport jn = evaluate_cost(s.model, un, s.family, inputs, s.x0);
      const CostReport jm = evaluate_cost(s.model, mu, s.family, inputs, s.x0);
      eps = e.contains("epsilon") ? e.at("epsilon").get<double>() : std::abs(jn.value - jm.value);
    } else {
      un = resolve_strict(s, inputs, out, summary);
      eps = e.at("epsilon").get<double>();
    }
    summary["control"] = to_json(un);
    const auto candidates = enumerate_block_controls(s.actions, s.grid, e.value("candidate_blocks", opt.blocks));
    const NearReport r = mp_check_near(s.model, un, eps, e.at("c").get<double>(), s.family, inputs, s.x0, candidates, opt);
    summary["report"] = to_json(r);
    emit_mp(r.mp, out);
    CsvTable ek({"candidate", "j_candidate", "distance", "margin", "stderr", "holds"});
    for (std::size_t i = 0; i < r.ekeland.size(); ++i) {
      const auto& row = r.ekeland[i];
      ek.add_row({std::to_string(i), format_double(row.j_candidate), format_double(row.distance),
                  format_double(row.margin), format_double(row.se), row.holds ? "true" : "false"});
    }
    out.csv("ekeland.csv", ek);
    return r.mp.verdict && r.ekeland_holds;
  }
  // bsde-stability
  const RelaxedControl mu = resolve_relaxed(s, inputs, out, summary);
  summary["control"] = to_json(mu);
  AdjointOptions opt;
  opt.degree = e.value("degree", opt.degree);
  opt.min_jump_events = e.value("min_jump_events", opt.min_jump_events);
  const StabilityReport r = bsde_stability_report(s.model, mu, e.at("n_list").get<std::vector<int>>(), s.family,
                                                  inputs, s.x0, opt, e.value("audit_probes", 1000));
  summary["report"] = to_json(r);
  out.csv("stability.csv", stability_table(r));
  std::vector<double> n, pg, qg, rg;
  for (const auto& row : r.rows) {
    n.push_back(row.n);
    pg.push_back(row.p_gap);
    qg.push_back(row.q_gap);
    rg.push_back(row.r_gap);
  }
  out.series("plot_p_gap.csv", "n", "p_gap", n, pg);
  out.series("plot_q_gap.csv", "n", "q_gap", n, qg);
  out.series("plot_r_gap.csv", "n", "r_gap", n, rg);
  return r.p_non_increasing && r.q_non_increasing && r.r_non_increasing && r.k_zero && r.audit.pass();
}

}  // namespace

RunResult run_experiment(const json& doc, const RunOptions& options) {
  auto violations = validate_config(doc);
  if (!violations.empty()) throw ConfigError(std::move(violations));
  if (options.threads > 0) set_default_threads(options.threads);
  const auto t_start = std::chrono::steady_clock::now();

  json effective = doc;
  if (options.seed_override) effective["seed"] = *options.seed_override;
  const std::uint64_t seed = effective.at("seed").get<std::uint64_t>();
  const Setup s = parse(effective, seed);

  RunResult res;
  res.output_dir = options.output_dir ? *options.output_dir
                                      : std::filesystem::path(effective.value("output_dir", "gjump_out/" + s.name));
  json summary = {{"name", s.name},
                  {"kind", s.kind},
                  {"seed", seed},
                  {"n_paths", s.n_paths},
                  {"model", {{"name", s.model_name}, {"params", s.params}}},
                  {"grid", {{"horizon", s.grid.horizon()}, {"n_steps", s.grid.n_steps()}}},
                  {"scenario_family", to_json(s.family)},
                  {"marks", to_json(s.marks)},
                  {"actions", to_json(s.actions)}};
  Outputs out;
  res.pass = dispatch(s, out, summary);
  summary["verdict"] = res.pass ? "pass" : "fail";
  out.add("summary.json", summary.dump(2) + "\n");

  std::filesystem::create_directories(res.output_dir);
  json files = json::array();
  for (const auto& [name, content] : out.files) {
    const auto path = res.output_dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << content;
    f.close();
    if (!f) throw Error("write failed: " + path.string());
    files.push_back({{"path", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    res.files.push_back(name);
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  res.manifest = {{"toolkit", "gjump"},
                  {"version", kToolkitVersion},
                  {"config_sha256", sha256_hex(effective.dump())},
                  {"seed", seed},
                  {"threads", default_threads()},
                  {"wall_time_seconds", wall},
                  {"verdict", res.pass ? "pass" : "fail"},
                  {"files", std::move(files)}};
  {
    const auto path = res.output_dir / "manifest.json";
    std::ofstream f(path, std::ios::binary);
    f << res.manifest.dump(2) << "\n";
    if (!f) throw Error("write failed: " + path.string());
  }
  res.summary = std::move(summary);
  return res;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"gjump: controlled jump-diffusions under volatility ambiguity"};
  app.require_subcommand(1);

  std::string run_config, validate_path, output_dir;
  int threads = 0;
  std::uint64_t seed_override = 0;
  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", run_config, "Experiment config (JSON)")->required();
  auto* od = run->add_option("--output-dir", output_dir, "Output directory (overrides the config)");
  run->add_option("--threads", threads, "Worker threads for path-parallel loops")->check(CLI::PositiveNumber);
  auto* so = run->add_option("--seed-override", seed_override, "Replace the config seed");

  auto* val = app.add_subcommand("validate", "Check a config and list every violation");
  val->add_option("config", validate_path, "Experiment config (JSON)")->required();

  auto* lm = app.add_subcommand("list-models", "List the built-in models and their parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (lm->parsed()) {
      for (const auto& m : list_models()) {
        std::cout << m.name << "\n  " << m.description << "\n  params:";
        for (const auto& [k, v] : m.defaults) std::cout << " " << k << "=" << format_double(v);
        std::cout << "\n";
      }
      return 0;
    }
    if (val->parsed()) {
      const auto v = validate_config(load_json(validate_path));
      if (v.empty()) {
        std::cout << "ok: no violations\n";
        return 0;
      }
      for (const auto& x : v) std::cout << (x.path.empty() ? "/" : x.path) << ": " << x.message << "\n";
      std::cout << v.size() << " violation" << (v.size() == 1 ? "" : "s") << "\n";
      return 2;
    }
    RunOptions opt;
    if (od->count() > 0) opt.output_dir = output_dir;
    if (so->count() > 0) opt.seed_override = seed_override;
    opt.threads = threads;
    const RunResult r = run_experiment(load_json(run_config), opt);
    std::cout << "verdict: " << (r.pass ? "pass" : "fail") << "\n";
    std::cout << "outputs: " << r.output_dir.string() << "\n";
    return r.pass ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& x : e.violations()) std::cerr << "  " << (x.path.empty() ? "/" : x.path) << ": " << x.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gjump::cli
