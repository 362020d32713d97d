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

// Least-squares conditional-expectation estimates on a polynomial basis of the
// state, solved with column-pivoting QR.

#include <vector>

#include "gjump/common.hpp"

namespace gjump {

/// Total-degree monomials of the standardized state z = (x - center) / scale.
/// Coordinates with (numerically) zero spread are dropped, so a deterministic
/// state reduces the basis to the constant.
class PolynomialBasis {
 public:
  PolynomialBasis() = default;

  /// Fits center and scale to the rows of `states` (one sample per row).
  static PolynomialBasis fit(const Matrix& states, int degree);

  int size() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }

  RowVector eval(const Eigen::Ref<const Vector>& x) const;
  Matrix design(const Matrix& states) const;

 private:
  int degree_ = 0;
  Vector center_;
  Vector scale_;
  std::vector<int> active_;                  // coordinates that vary
  std::vector<std::vector<int>> exponents_;  // per monomial, per active coordinate
};

struct LeastSquaresFit {
  Matrix coef;            // columns of the design -> response columns
  int rank = 0;
  double condition = 1.0; // |R_11| / |R_rr| of the pivoted QR
  double residual_ms = 0.0;
};

/// Minimizes ||design * coef - response||. Throws NumericalError when the
/// design has fewer rows than columns or is rank-deficient, reporting the
/// condition estimate.
LeastSquaresFit least_squares(const Matrix& design, const Matrix& response);

}  // namespace gjump
