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

#include "gjump/regression.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gjump {

namespace {

void monomials(int vars, int degree, std::vector<int>& cur, int pos, int left,
               std::vector<std::vector<int>>& out) {
  if (pos == vars) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= left; ++e) {
    cur[pos] = e;
    monomials(vars, degree, cur, pos + 1, left - e, out);
  }
  cur[pos] = 0;
}

}  // namespace

PolynomialBasis PolynomialBasis::fit(const Matrix& states, int degree) {
  if (degree < 0) throw InvalidArgument("PolynomialBasis: degree must be >= 0");
  PolynomialBasis b;
  b.degree_ = degree;
  const Eigen::Index n = states.cols();
  b.center_ = states.colwise().mean().transpose();
  b.scale_ = Vector::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double var = (states.col(i).array() - b.center_[i]).square().mean();
    const double sd = std::sqrt(var);
    if (sd > 1e-12 * std::max(1.0, std::abs(b.center_[i]))) {
      b.scale_[i] = sd;
      b.active_.push_back(static_cast<int>(i));
    }
  }
  std::vector<int> cur(b.active_.size(), 0);
  std::vector<std::vector<int>> all;
  monomials(static_cast<int>(b.active_.size()), degree, cur, 0, degree, all);
  // Order by total degree so the constant comes first.
  std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    int sx = 0, sy = 0;
    for (int e : x) sx += e;
    for (int e : y) sy += e;
    return sx < sy;
  });
  b.exponents_ = std::move(all);
  return b;
}

RowVector PolynomialBasis::eval(const Eigen::Ref<const Vector>& x) const {
  RowVector out(size());
  std::vector<double> z(active_.size());
  for (std::size_t j = 0; j < active_.size(); ++j) {
    z[j] = (x[active_[j]] - center_[active_[j]]) / scale_[active_[j]];
  }
  for (int m = 0; m < size(); ++m) {
    double v = 1.0;
    for (std::size_t j = 0; j < active_.size(); ++j) {
      for (int e = 0; e < exponents_[m][j]; ++e) v *= z[j];
    }
    out[m] = v;
  }
  return out;
}

Matrix PolynomialBasis::design(const Matrix& states) const {
  Matrix out(states.rows(), size());
  for (Eigen::Index r = 0; r < states.rows(); ++r) out.row(r) = eval(states.row(r).transpose());
  return out;
}

LeastSquaresFit least_squares(const Matrix& design, const Matrix& response) {
  if (design.rows() != response.rows()) throw InvalidArgument("least_squares: row count mismatch");
  if (design.rows() < design.cols()) {
    std::ostringstream os;
    os << "least_squares: " << design.rows() << " samples for " << design.cols() << " unknowns";
    throw NumericalError(os.str());
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-12);
  LeastSquaresFit fit;
  fit.rank = static_cast<int>(qr.rank());
  const auto diag = qr.matrixR().diagonal().cwiseAbs();
  const double lo = fit.rank > 0 ? diag[fit.rank - 1] : 0.0;
  fit.condition = fit.rank > 0 && lo > 0.0 ? diag[0] / lo : INFINITY;
  if (fit.rank < design.cols()) {
    std::ostringstream os;
    os << "least_squares: rank-deficient design (rank " << fit.rank << " of " << design.cols()
       << ", condition estimate " << fit.condition << ")";
    throw NumericalError(os.str());
  }
  fit.coef = qr.solve(response);
  fit.residual_ms = (design * fit.coef - response).squaredNorm() /
                    static_cast<double>(std::max<Eigen::Index>(1, response.size()));
  return fit;
}

}  // namespace gjump
