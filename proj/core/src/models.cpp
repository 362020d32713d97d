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

#include "gjump/models.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace gjump {

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }
Matrix m1(double x) { return Matrix::Constant(1, 1, x); }

const std::vector<ModelInfo> kModels = {
    {"zero",
     "all coefficients zero; constant terminal cost g_const and running cost h_const",
     {{"g_const", 0.0}, {"h_const", 0.0}}},
    {"constant_drift",
     "b = c + beta*a, sigma = sigma0, gamma = f = 0; g = x, h = 0",
     {{"c", 1.0}, {"beta", 0.0}, {"sigma0", 0.0}}},
    {"linear_jump_lq",
     "b = alpha*x + beta*a + b0, sigma = sigma0 + sigma1*x, gamma = gamma0 + gamma1*x + gamma_u*a, "
     "f = (f0 + f1*x + f_u*a)*theta; h = q_h/2 x^2 + r_h/2 a^2, g = q_g/2 (x - target)^2",
     {{"alpha", -0.5}, {"beta", 1.0}, {"b0", 0.0}, {"sigma0", 0.3}, {"sigma1", 0.0},
      {"gamma0", 0.0}, {"gamma1", 0.0}, {"gamma_u", 0.0}, {"f0", 0.0}, {"f1", 0.2},
      {"f_u", 0.0}, {"q_h", 1.0}, {"r_h", 0.1}, {"q_g", 1.0}, {"target", 0.0}}},
    {"bilinear",
     "b = (alpha + beta*a)*x, all other coefficients zero; g = x^2/2, h = 0",
     {{"alpha", 0.5}, {"beta", 1.0}}},
};

const ModelInfo& info_of(const std::string& name) {
  for (const auto& m : kModels) {
    if (m.name == name) return m;
  }
  std::string known;
  for (const auto& m : kModels) known += (known.empty() ? "" : ", ") + m.name;
  throw InvalidArgument("unknown model '" + name + "' (known: " + known + ")");
}

ModelSpec make_zero(const ModelParams& p) {
  ModelSpec m = ModelSpec::zero({1, 1, 1});
  const double gc = p.at("g_const"), hc = p.at("h_const");
  m.g = [gc](const Vector&) { return gc; };
  m.h = [hc](double, const Vector&, const Vector&) { return hc; };
  return m;
}

ModelSpec make_constant_drift(const ModelParams& p) {
  ModelSpec m = ModelSpec::zero({1, 1, 1});
  m.name = "constant_drift";
  const double c = p.at("c"), beta = p.at("beta"), s0 = p.at("sigma0");
  m.b = [c, beta](double, const Vector&, const Vector& a) { return v1(c + beta * a[0]); };
  m.b_u = [beta](double, const Vector&, const Vector&) { return m1(beta); };
  m.sigma = [s0](double, const Vector&) { return m1(s0); };
  m.g = [](const Vector& x) { return x[0]; };
  m.g_x = [](const Vector&) { return v1(1.0); };
  return m;
}

ModelSpec make_linear_jump_lq(const ModelParams& p) {
  ModelSpec m = ModelSpec::zero({1, 1, 1});
  m.name = "linear_jump_lq";
  const double alpha = p.at("alpha"), beta = p.at("beta"), b0 = p.at("b0");
  const double s0 = p.at("sigma0"), s1 = p.at("sigma1");
  const double g0 = p.at("gamma0"), g1 = p.at("gamma1"), gu = p.at("gamma_u");
  const double f0 = p.at("f0"), f1 = p.at("f1"), fu = p.at("f_u");
  const double qh = p.at("q_h"), rh = p.at("r_h"), qg = p.at("q_g"), target = p.at("target");

  m.b = [=](double, const Vector& x, const Vector& a) { return v1(alpha * x[0] + beta * a[0] + b0); };
  m.sigma = [=](double, const Vector& x) { return m1(s0 + s1 * x[0]); };
  m.gamma = [=](double, const Vector& x, const Vector& a) { return m1(g0 + g1 * x[0] + gu * a[0]); };
  m.f = [=](double, const Vector& x, const Vector& th, const Vector& a) {
    return v1((f0 + f1 * x[0] + fu * a[0]) * th[0]);
  };
  m.h = [=](double, const Vector& x, const Vector& a) {
    return 0.5 * qh * x[0] * x[0] + 0.5 * rh * a[0] * a[0];
  };
  m.g = [=](const Vector& x) { return 0.5 * qg * (x[0] - target) * (x[0] - target); };

  m.b_x = [=](double, const Vector&, const Vector&) { return m1(alpha); };
  m.sigma_x = [=](double, const Vector&) { return std::vector<Matrix>{m1(s1)}; };
  m.gamma_x = [=](double, const Vector&, const Vector&) { return std::vector<Matrix>{m1(g1)}; };
  m.f_x = [=](double, const Vector&, const Vector& th, const Vector&) { return m1(f1 * th[0]); };
  m.h_x = [=](double, const Vector& x, const Vector&) { return v1(qh * x[0]); };
  m.g_x = [=](const Vector& x) { return v1(qg * (x[0] - target)); };

  m.b_u = [=](double, const Vector&, const Vector&) { return m1(beta); };
  m.gamma_u = [=](double, const Vector&, const Vector&) { return std::vector<Matrix>{m1(gu)}; };
  m.f_u = [=](double, const Vector&, const Vector& th, const Vector&) { return m1(fu * th[0]); };
  m.h_u = [=](double, const Vector&, const Vector& a) { return v1(rh * a[0]); };

  m.bounds = {std::abs(alpha), std::abs(s1), std::abs(g1), std::abs(f1)};
  return m;
}

ModelSpec make_bilinear(const ModelParams& p) {
  ModelSpec m = ModelSpec::zero({1, 1, 1});
  m.name = "bilinear";
  const double alpha = p.at("alpha"), beta = p.at("beta");
  m.b = [=](double, const Vector& x, const Vector& a) { return v1((alpha + beta * a[0]) * x[0]); };
  m.b_x = [=](double, const Vector&, const Vector& a) { return m1(alpha + beta * a[0]); };
  m.b_u = [=](double, const Vector& x, const Vector&) { return m1(beta * x[0]); };
  m.g = [](const Vector& x) { return 0.5 * x[0] * x[0]; };
  m.g_x = [](const Vector& x) { return v1(x[0]); };
  // Lipschitz in x only over a bounded action set; the constant is filled in
  // against the largest |a| the caller uses, here a conservative default.
  m.bounds = {std::abs(alpha) + std::abs(beta) * 2.0, 0.0, 0.0, 0.0};
  return m;
}

}  // namespace

const std::vector<ModelInfo>& list_models() { return kModels; }

ModelParams resolve_params(const std::string& name, const ModelParams& params) {
  const ModelInfo& info = info_of(name);
  ModelParams out = info.defaults;
  for (const auto& [key, value] : params) {
    if (!info.defaults.count(key)) {
      throw InvalidArgument("model '" + name + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) {
      throw InvalidArgument("model '" + name + "' parameter '" + key + "' is not finite");
    }
    out[key] = value;
  }
  return out;
}

ModelSpec make_model(const std::string& name, const ModelParams& params) {
  const ModelParams p = resolve_params(name, params);
  if (name == "zero") return make_zero(p);
  if (name == "constant_drift") return make_constant_drift(p);
  if (name == "linear_jump_lq") return make_linear_jump_lq(p);
  return make_bilinear(p);
}

LqReference linear_jump_lq_reference(const ModelParams& params, const MarkSpace& marks,
                                     const TimeGrid& grid, const std::vector<double>& cov,
                                     const std::vector<double>& u_mean,
                                     const std::vector<double>& u_sq, double x0) {
  const ModelParams p = resolve_params("linear_jump_lq", params);
  const int n = grid.n_steps();
  if (static_cast<int>(cov.size()) != n || static_cast<int>(u_mean.size()) != n ||
      static_cast<int>(u_sq.size()) != n) {
    throw GridMismatch("linear_jump_lq_reference: per-step inputs do not match the grid");
  }
  const double alpha = p.at("alpha"), beta = p.at("beta"), b0 = p.at("b0");
  const double s0 = p.at("sigma0"), s1 = p.at("sigma1");
  const double g0 = p.at("gamma0"), g1 = p.at("gamma1"), gu = p.at("gamma_u");
  const double f0 = p.at("f0"), f1 = p.at("f1"), fu = p.at("f_u");
  const double qh = p.at("q_h"), rh = p.at("r_h"), qg = p.at("q_g"), target = p.at("target");
  double m2theta = 0.0;
  for (std::size_t i = 0; i < marks.size(); ++i) {
    m2theta += marks.marks[i][0] * marks.marks[i][0] * marks.intensities[i];
  }

  // State (1, m1, m2, I).
  Eigen::Vector4d v(1.0, x0, x0 * x0, 0.0);
  int k = 0;
  while (k < n) {
    int e = k + 1;
    while (e < n && cov[e] == cov[k] && u_mean[e] == u_mean[k] && u_sq[e] == u_sq[k]) ++e;
    const double a = cov[k], um = u_mean[k], u2 = u_sq[k];
    const double A1 = alpha + g1 * a;
    const double c1 = beta * um + b0 + a * (g0 + gu * um);
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    M(1, 0) = c1;
    M(1, 1) = A1;
    M(2, 0) = a * s0 * s0 + m2theta * (f0 * f0 + 2.0 * f0 * fu * um + fu * fu * u2);
    M(2, 1) = 2.0 * c1 + 2.0 * a * s0 * s1 + m2theta * 2.0 * f1 * (f0 + fu * um);
    M(2, 2) = 2.0 * A1 + a * s1 * s1 + m2theta * f1 * f1;
    M(3, 0) = 0.5 * rh * u2;
    M(3, 2) = 0.5 * qh;
    const Eigen::Matrix4d step = (M * (grid.dt() * (e - k))).exp();
    v = step * v;
    k = e;
  }
  LqReference out;
  out.mean = v[1];
  out.second_moment = v[2];
  out.cost = v[3] + 0.5 * qg * (v[2] - 2.0 * target * v[1] + target * target);
  return out;
}

LqReference linear_jump_lq_reference(const ModelParams& params, const MarkSpace& marks,
                                     const TimeGrid& grid, const std::vector<double>& cov,
                                     const RelaxedControl& mu, double x0) {
  mu.validate();
  require_same_grid(grid, mu.grid, "linear_jump_lq_reference");
  std::vector<double> um(grid.n_steps(), 0.0), u2(grid.n_steps(), 0.0);
  for (int k = 0; k < grid.n_steps(); ++k) {
    for (std::size_t i = 0; i < mu.actions.size(); ++i) {
      const double a = mu.actions[i][0];
      um[k] += mu.weights[k][i] * a;
      u2[k] += mu.weights[k][i] * a * a;
    }
  }
  return linear_jump_lq_reference(params, marks, grid, cov, um, u2, x0);
}

}  // namespace gjump
