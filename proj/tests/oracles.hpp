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

// Reference quantities computed independently of the library's own solvers,
// shared by the unit tests and the acceptance binary.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <gjump/jumps.hpp>
#include <gjump/scenario.hpp>

namespace gjump::oracle {

struct Moments {
  double mean = 0.0;
  double second = 0.0;
  double cost = 0.0;
};

/// First two moments and the expected cost of linear_jump_lq under a
/// deterministic control, by classical RK4 on the moment ODE
///
///   m1' = (alpha + gamma1 a) m1 + beta u + b0 + a (gamma0 + gamma_u u)
///   m2' = 2 E[x drift] + a E[(sigma0 + sigma1 x)^2] + sum_i nu_i theta_i^2 E[(f0 + f1 x + f_u u)^2]
///   I'  = q_h/2 m2 + r_h/2 E[u^2]
///
/// with E[u] = u_mean[k], E[u^2] = u_sq[k] and a = cov[k] on step k. Every
/// parameter must be present in `p` (no defaults are filled in here).
inline Moments lq_moments(const std::map<std::string, double>& p, const MarkSpace& marks, double horizon,
                          const std::vector<double>& cov, const std::vector<double>& u_mean,
                          const std::vector<double>& u_sq, double x0, int substeps = 64) {
  const double alpha = p.at("alpha"), beta = p.at("beta"), b0 = p.at("b0");
  const double s0 = p.at("sigma0"), s1 = p.at("sigma1");
  const double g0 = p.at("gamma0"), g1 = p.at("gamma1"), gu = p.at("gamma_u");
  const double f0 = p.at("f0"), f1 = p.at("f1"), fu = p.at("f_u");
  const double qh = p.at("q_h"), rh = p.at("r_h"), qg = p.at("q_g"), target = p.at("target");
  double jump2 = 0.0;
  for (std::size_t i = 0; i < marks.size(); ++i) jump2 += marks.intensities[i] * marks.marks[i][0] * marks.marks[i][0];

  const int n = static_cast<int>(cov.size());
  const double dt = horizon / n;
  const double h = dt / substeps;
  double y[3] = {x0, x0 * x0, 0.0};
  for (int k = 0; k < n; ++k) {
    const double a = cov[k], um = u_mean[k], u2 = u_sq[k];
    auto rhs = [&](const double* v, double* out) {
      const double m1 = v[0], m2 = v[1];
      const double lin = alpha + g1 * a;
      const double c = beta * um + b0 + a * (g0 + gu * um);
      const double diff = s0 * s0 + 2.0 * s0 * s1 * m1 + s1 * s1 * m2;
      const double jump = f0 * f0 + f1 * f1 * m2 + fu * fu * u2 + 2.0 * f0 * f1 * m1 + 2.0 * f0 * fu * um +
                          2.0 * f1 * fu * um * m1;
      out[0] = lin * m1 + c;
      out[1] = 2.0 * (lin * m2 + c * m1) + a * diff + jump2 * jump;
      out[2] = 0.5 * qh * m2 + 0.5 * rh * u2;
    };
    for (int s = 0; s < substeps; ++s) {
      double k1[3], k2[3], k3[3], k4[3], tmp[3];
      rhs(y, k1);
      for (int i = 0; i < 3; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      rhs(tmp, k2);
      for (int i = 0; i < 3; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      rhs(tmp, k3);
      for (int i = 0; i < 3; ++i) tmp[i] = y[i] + h * k3[i];
      rhs(tmp, k4);
      for (int i = 0; i < 3; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  Moments m;
  m.mean = y[0];
  m.second = y[1];
  m.cost = y[2] + 0.5 * qg * (y[1] - 2.0 * target * y[0] + target * target);
  return m;
}

/// Scalar covariance path of one scenario.
inline std::vector<double> scalar_path(const VolatilityScenario& s) {
  std::vector<double> out;
  out.reserve(s.values.size());
  for (const auto& a : s.values) out.push_back(a(0, 0));
  return out;
}

/// Sample mean and its standard error, computed with plain loops.
struct Sample {
  double mean = 0.0;
  double se = 0.0;
  double var = 0.0;  // unbiased sample variance
};

inline Sample sample_stats(const std::vector<double>& v) {
  Sample s;
  const double n = static_cast<double>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= n;
  for (double x : v) s.var += (x - s.mean) * (x - s.mean);
  s.var /= (n - 1.0);
  s.se = std::sqrt(s.var / n);
  return s;
}

}  // namespace gjump::oracle
