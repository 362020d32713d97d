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

// Coefficient bundle of the controlled jump diffusion
//   dx = b dt + sigma dB + gamma d<B> + int f dN~,   cost  Ê[g(x_T) + int h dt]
// with every first derivative needed by the variational and adjoint code.

#include <functional>
#include <string>
#include <vector>

#include "gjump/common.hpp"
#include "gjump/controls.hpp"
#include "gjump/jumps.hpp"

namespace gjump {

struct Dims {
  int n = 1;  // state
  int d = 1;  // noise
  int k = 1;  // action
};

/// Declared bounds used by validation and by the driver Lipschitz audit.
/// Each lip_* bounds the operator norm of the x-derivative of that coefficient;
/// lip_f is per unit of |theta|.
struct ModelBounds {
  double lip_b = 0.0;
  double lip_sigma = 0.0;
  double lip_gamma = 0.0;
  double lip_f = 0.0;
};

struct ModelSpec {
  using VecTXA = std::function<Vector(double, const Vector&, const Vector&)>;
  using MatTX = std::function<Matrix(double, const Vector&)>;
  using MatTXA = std::function<Matrix(double, const Vector&, const Vector&)>;
  using MatListTX = std::function<std::vector<Matrix>(double, const Vector&)>;
  using MatListTXA = std::function<std::vector<Matrix>(double, const Vector&, const Vector&)>;
  using VecTXThA = std::function<Vector(double, const Vector&, const Vector&, const Vector&)>;
  using MatTXThA = std::function<Matrix(double, const Vector&, const Vector&, const Vector&)>;
  using ScalTXA = std::function<double(double, const Vector&, const Vector&)>;

  std::string name;
  Dims dims;
  ModelBounds bounds;

  VecTXA b;          // n
  MatTX sigma;       // n x d
  MatTXA gamma;      // n x d^2, row i is vec (row-major) of a d x d matrix paired with vec(a)
  VecTXThA f;        // n, arguments (t, x, theta, a)
  ScalTXA h;
  std::function<double(const Vector&)> g;

  MatTXA b_x;        // n x n
  MatListTX sigma_x; // d matrices n x n, entry j is d(sigma column j)/dx
  MatListTXA gamma_x;// d^2 matrices n x n, entry m is d(gamma column m)/dx
  MatTXThA f_x;      // n x n
  VecTXA h_x;        // n
  std::function<Vector(const Vector&)> g_x;  // n

  MatTXA b_u;        // n x k
  MatListTXA gamma_u;// d^2 matrices n x k
  MatTXThA f_u;      // n x k
  VecTXA h_u;        // k

  /// Everything identically zero with consistent shapes.
  static ModelSpec zero(const Dims& dims);
};

/// gamma(t, x, a) contracted with the covariance a_k: sum_m gamma(., m) vec(a_k)_m.
Vector contract_gamma(const Matrix& gamma, const Matrix& cov);
/// Same for a list of per-column matrices (gamma_x or gamma_u).
Matrix contract_list(const std::vector<Matrix>& list, const Matrix& cov);

struct ValidationIssue {
  std::string where;
  std::string message;
};

struct ValidationOptions {
  int n_probes = 16;
  std::uint64_t seed = 12345;
  double state_radius = 2.0;
  double fd_step = 1e-5;
  double horizon = 1.0;
};

/// Evaluates every coefficient on random probes: finiteness, shapes, and
/// agreement of each derivative with centered finite differences within
/// max(1e-4, 1e-2 |value|). Returns all issues found.
std::vector<ValidationIssue> check_model(const ModelSpec& model, const ActionGrid& actions,
                                         const MarkSpace& marks, const ValidationOptions& opt = {});

/// Throws InvalidArgument listing every issue if check_model finds any.
void validate_model(const ModelSpec& model, const ActionGrid& actions, const MarkSpace& marks,
                    const ValidationOptions& opt = {});

/// True when b and h vanish on every probe point (the strict maximum principle's
/// stated hypothesis).
bool drift_and_running_cost_vanish(const ModelSpec& model, const ActionGrid& actions,
                                   const ValidationOptions& opt = {});

}  // namespace gjump
