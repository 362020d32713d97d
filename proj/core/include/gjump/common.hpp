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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gjump {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// Errors -------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two objects that must share a time grid (or path indexing) do not.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite value or hit a singular system.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Time grid ----------------------------------------------------------------

/// Uniform discretization of [0, T] into n_steps intervals.
class TimeGrid {
 public:
  TimeGrid(double horizon, int n_steps);

  double horizon() const { return horizon_; }
  int n_steps() const { return n_steps_; }
  double dt() const { return horizon_ / n_steps_; }
  double time(int k) const { return k * dt(); }

  /// Index k of the step (t_k, t_{k+1}] containing t; t = 0 maps to step 0.
  int step_of(double t) const;

  bool operator==(const TimeGrid& other) const = default;

 private:
  double horizon_;
  int n_steps_;
};

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what);

// Statistics ---------------------------------------------------------------

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Pairwise (cascade) summation; deterministic for a fixed input order.
double pairwise_sum(std::span<const double> values);

/// Sample mean and standard error of the mean (n - 1 denominator).
MeanSe mean_se(std::span<const double> values);

/// sqrt(a^2 + b^2): the standard error of a difference of independent estimates.
double combined_se(double se_a, double se_b);

// Threading ----------------------------------------------------------------

/// Process-wide default worker count for path-parallel loops (>= 1).
void set_default_threads(int threads);
int default_threads();

/// Runs fn(i) for i in [0, count) over contiguous chunks. Each index is
/// visited exactly once, so results written to per-index slots do not depend
/// on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

// Linear algebra helpers -----------------------------------------------------

/// Symmetric square root via eigendecomposition. Eigenvalues in [-1e-12, 0)
/// are clamped to zero; anything more negative throws NumericalError.
Matrix symmetric_sqrt(const Matrix& a);

bool is_symmetric(const Matrix& a, double tol);

/// Smallest eigenvalue of the symmetric part of a.
double min_eigenvalue(const Matrix& a);

/// Row-major vec of a d x d matrix as a column vector of length d*d.
Vector vec(const Matrix& a);

// Path-indexed storage ------------------------------------------------------

/// Dense (scenario, path, time index) -> rows x cols matrix storage.
class PathField {
 public:
  PathField() = default;
  PathField(int n_scenarios, int n_paths, int n_times, int rows, int cols)
      : s_(n_scenarios), p_(n_paths), t_(n_times), rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(n_scenarios) * n_paths * n_times * rows * cols, 0.0) {}

  int n_scenarios() const { return s_; }
  int n_paths() const { return p_; }
  int n_times() const { return t_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Eigen::Map<Matrix> at(int s, int p, int k) { return Eigen::Map<Matrix>(&data_[offset(s, p, k)], rows_, cols_); }
  Eigen::Map<const Matrix> at(int s, int p, int k) const {
    return Eigen::Map<const Matrix>(&data_[offset(s, p, k)], rows_, cols_);
  }

  const std::vector<double>& raw() const { return data_; }

 private:
  std::size_t offset(int s, int p, int k) const {
    return ((static_cast<std::size_t>(s) * p_ + p) * t_ + k) * static_cast<std::size_t>(rows_) * cols_;
  }
  int s_ = 0, p_ = 0, t_ = 0, rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

}  // namespace gjump
