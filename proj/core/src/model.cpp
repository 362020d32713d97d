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

#include "gjump/model.hpp"

#include <cmath>
#include <sstream>

#include "gjump/rng.hpp"

namespace gjump {

ModelSpec ModelSpec::zero(const Dims& dims) {
  const int n = dims.n, d = dims.d, k = dims.k;
  ModelSpec m;
  m.name = "zero";
  m.dims = dims;
  m.b = [n](double, const Vector&, const Vector&) { return Vector::Zero(n).eval(); };
  m.sigma = [n, d](double, const Vector&) { return Matrix::Zero(n, d).eval(); };
  m.gamma = [n, d](double, const Vector&, const Vector&) { return Matrix::Zero(n, d * d).eval(); };
  m.f = [n](double, const Vector&, const Vector&, const Vector&) { return Vector::Zero(n).eval(); };
  m.h = [](double, const Vector&, const Vector&) { return 0.0; };
  m.g = [](const Vector&) { return 0.0; };
  m.b_x = [n](double, const Vector&, const Vector&) { return Matrix::Zero(n, n).eval(); };
  m.sigma_x = [n, d](double, const Vector&) { return std::vector<Matrix>(d, Matrix::Zero(n, n)); };
  m.gamma_x = [n, d](double, const Vector&, const Vector&) {
    return std::vector<Matrix>(d * d, Matrix::Zero(n, n));
  };
  m.f_x = [n](double, const Vector&, const Vector&, const Vector&) { return Matrix::Zero(n, n).eval(); };
  m.h_x = [n](double, const Vector&, const Vector&) { return Vector::Zero(n).eval(); };
  m.g_x = [n](const Vector&) { return Vector::Zero(n).eval(); };
  m.b_u = [n, k](double, const Vector&, const Vector&) { return Matrix::Zero(n, k).eval(); };
  m.gamma_u = [n, k, d](double, const Vector&, const Vector&) {
    return std::vector<Matrix>(d * d, Matrix::Zero(n, k));
  };
  m.f_u = [n, k](double, const Vector&, const Vector&, const Vector&) { return Matrix::Zero(n, k).eval(); };
  m.h_u = [k](double, const Vector&, const Vector&) { return Vector::Zero(k).eval(); };
  return m;
}

Vector contract_gamma(const Matrix& gamma, const Matrix& cov) {
  if (cov.size() == 1) return gamma.col(0) * cov(0, 0);
  return gamma * vec(cov);
}

Matrix contract_list(const std::vector<Matrix>& list, const Matrix& cov) {
  Matrix out = list.front() * cov(0, 0);
  const Eigen::Index d = cov.rows();
  for (std::size_t m = 1; m < list.size(); ++m) {
    out += list[m] * cov(static_cast<Eigen::Index>(m) / d, static_cast<Eigen::Index>(m) % d);
  }
  return out;
}

namespace {

class Checker {
 public:
  explicit Checker(std::vector<ValidationIssue>& issues) : issues_(issues) {}

  void shape(const std::string& where, const Matrix& m, Eigen::Index rows, Eigen::Index cols) {
    if (m.rows() != rows || m.cols() != cols) {
      std::ostringstream os;
      os << "expected shape " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
      add(where, os.str());
    } else if (!m.allFinite()) {
      add(where, "non-finite value");
    }
  }

  void scalar(const std::string& where, double v) {
    if (!std::isfinite(v)) add(where, "non-finite value");
  }

  void derivative(const std::string& where, double analytic, double fd) {
    const double tol = std::max(1e-4, 1e-2 * std::abs(analytic));
    if (!(std::abs(analytic - fd) <= tol)) {
      std::ostringstream os;
      os.precision(10);
      os << "derivative " << analytic << " disagrees with finite difference " << fd;
      add(where, os.str());
    }
  }

  void mark() { start_ = issues_.size(); }
  bool ok() const { return issues_.size() == start_; }

 private:
  void add(const std::string& where, const std::string& msg) { issues_.push_back({where, msg}); }
  std::vector<ValidationIssue>& issues_;
  std::size_t start_ = issues_.size();
};

bool all_set(const ModelSpec& m) {
  return m.b && m.sigma && m.gamma && m.f && m.h && m.g && m.b_x && m.sigma_x && m.gamma_x &&
         m.f_x && m.h_x && m.g_x && m.b_u && m.gamma_u && m.f_u && m.h_u;
}

}  // namespace

std::vector<ValidationIssue> check_model(const ModelSpec& model, const ActionGrid& actions,
                                         const MarkSpace& marks, const ValidationOptions& opt) {
  std::vector<ValidationIssue> issues;
  if (!all_set(model)) {
    issues.push_back({model.name, "one or more evaluators are missing"});
    return issues;
  }
  const int n = model.dims.n, d = model.dims.d, k = model.dims.k;
  if (n < 1 || d < 1 || k < 1) {
    issues.push_back({model.name, "dimensions must be positive"});
    return issues;
  }
  if (actions.dim() != k) {
    issues.push_back({model.name + ".actions", "action dimension differs from model k"});
    return issues;
  }
  if (marks.size() > 0 && marks.marks.front().size() < 1) {
    issues.push_back({model.name + ".marks", "empty mark vectors"});
    return issues;
  }

  Checker c(issues);
  const Philox rng(opt.seed, kStreamProbes);
  const double eps = opt.fd_step;
  const auto fd = [eps](auto&& fn, const Vector& x0, int l) {
    Vector xp = x0, xm = x0;
    xp[l] += eps;
    xm[l] -= eps;
    return ((fn(xp) - fn(xm)) / (2.0 * eps)).eval();
  };

  for (int probe = 0; probe < opt.n_probes; ++probe) {
    const auto P = static_cast<std::uint32_t>(probe);
    const double t = opt.horizon * rng.uniform(P, 0, 0);
    Vector x(n);
    for (int i = 0; i < n; ++i) {
      x[i] = opt.state_radius * (2.0 * rng.uniform(P, 1, static_cast<std::uint32_t>(i)) - 1.0);
    }
    const auto ai = static_cast<std::size_t>(rng.uniform(P, 2, 0) * static_cast<double>(actions.size()));
    const Vector& a = actions[std::min(ai, actions.size() - 1)];
    const std::string tag = model.name + "[probe " + std::to_string(probe) + "]";
    c.mark();

    // Values and shapes.
    const Vector b = model.b(t, x, a);
    c.shape(tag + ".b", b, n, 1);
    c.shape(tag + ".sigma", model.sigma(t, x), n, d);
    c.shape(tag + ".gamma", model.gamma(t, x, a), n, d * d);
    c.scalar(tag + ".h", model.h(t, x, a));
    c.scalar(tag + ".g", model.g(x));
    const Matrix bx = model.b_x(t, x, a);
    c.shape(tag + ".b_x", bx, n, n);
    const auto sx = model.sigma_x(t, x);
    const auto gx = model.gamma_x(t, x, a);
    const auto gu = model.gamma_u(t, x, a);
    if (static_cast<int>(sx.size()) != d) c.scalar(tag + ".sigma_x(count)", NAN);
    if (static_cast<int>(gx.size()) != d * d) c.scalar(tag + ".gamma_x(count)", NAN);
    if (static_cast<int>(gu.size()) != d * d) c.scalar(tag + ".gamma_u(count)", NAN);
    for (const auto& m : sx) c.shape(tag + ".sigma_x", m, n, n);
    for (const auto& m : gx) c.shape(tag + ".gamma_x", m, n, n);
    for (const auto& m : gu) c.shape(tag + ".gamma_u", m, n, k);
    const Vector hx = model.h_x(t, x, a);
    const Vector gxv = model.g_x(x);
    c.shape(tag + ".h_x", hx, n, 1);
    c.shape(tag + ".g_x", gxv, n, 1);
    const Matrix bu = model.b_u(t, x, a);
    c.shape(tag + ".b_u", bu, n, k);
    const Vector hu = model.h_u(t, x, a);
    c.shape(tag + ".h_u", hu, k, 1);
    if (!c.ok()) continue;

    // State derivatives.
    for (int l = 0; l < n; ++l) {
      const std::string col = "[:," + std::to_string(l) + "]";
      const Vector fb = fd([&](const Vector& y) { return model.b(t, y, a); }, x, l);
      for (int i = 0; i < n; ++i) c.derivative(tag + ".b_x" + col, bx(i, l), fb[i]);
      const Matrix fs = fd([&](const Vector& y) { return model.sigma(t, y); }, x, l);
      for (int j = 0; j < d; ++j)
        for (int i = 0; i < n; ++i) c.derivative(tag + ".sigma_x" + col, sx[j](i, l), fs(i, j));
      const Matrix fg = fd([&](const Vector& y) { return model.gamma(t, y, a); }, x, l);
      for (int m = 0; m < d * d; ++m)
        for (int i = 0; i < n; ++i) c.derivative(tag + ".gamma_x" + col, gx[m](i, l), fg(i, m));
      const double fh = fd([&](const Vector& y) { return Vector::Constant(1, model.h(t, y, a)); }, x, l)[0];
      c.derivative(tag + ".h_x" + col, hx[l], fh);
      const double fgt = fd([&](const Vector& y) { return Vector::Constant(1, model.g(y)); }, x, l)[0];
      c.derivative(tag + ".g_x" + col, gxv[l], fgt);
    }
    // Action derivatives.
    for (int l = 0; l < k; ++l) {
      const std::string col = "[:," + std::to_string(l) + "]";
      const Vector fb = fd([&](const Vector& v) { return model.b(t, x, v); }, a, l);
      for (int i = 0; i < n; ++i) c.derivative(tag + ".b_u" + col, bu(i, l), fb[i]);
      const Matrix fg = fd([&](const Vector& v) { return model.gamma(t, x, v); }, a, l);
      for (int m = 0; m < d * d; ++m)
        for (int i = 0; i < n; ++i) c.derivative(tag + ".gamma_u" + col, gu[m](i, l), fg(i, m));
      const double fh = fd([&](const Vector& v) { return Vector::Constant(1, model.h(t, x, v)); }, a, l)[0];
      c.derivative(tag + ".h_u" + col, hu[l], fh);
    }
    // Jump coefficient, per mark.
    for (std::size_t mi = 0; mi < marks.size(); ++mi) {
      const Vector& th = marks.marks[mi];
      const std::string mt = tag + ".f[mark " + std::to_string(mi) + "]";
      c.shape(mt, model.f(t, x, th, a), n, 1);
      const Matrix fx = model.f_x(t, x, th, a);
      const Matrix fu = model.f_u(t, x, th, a);
      c.shape(mt + "_x", fx, n, n);
      c.shape(mt + "_u", fu, n, k);
      if (!c.ok()) break;
      for (int l = 0; l < n; ++l) {
        const Vector ff = fd([&](const Vector& y) { return model.f(t, y, th, a); }, x, l);
        for (int i = 0; i < n; ++i) c.derivative(mt + "_x", fx(i, l), ff[i]);
      }
      for (int l = 0; l < k; ++l) {
        const Vector ff = fd([&](const Vector& v) { return model.f(t, x, th, v); }, a, l);
        for (int i = 0; i < n; ++i) c.derivative(mt + "_u", fu(i, l), ff[i]);
      }
    }
  }
  return issues;
}

void validate_model(const ModelSpec& model, const ActionGrid& actions, const MarkSpace& marks,
                    const ValidationOptions& opt) {
  const auto issues = check_model(model, actions, marks, opt);
  if (issues.empty()) return;
  std::ostringstream os;
  os << "model '" << model.name << "' failed validation (" << issues.size() << " issue(s))";
  for (const auto& is : issues) os << "\n  " << is.where << ": " << is.message;
  throw InvalidArgument(os.str());
}

bool drift_and_running_cost_vanish(const ModelSpec& model, const ActionGrid& actions,
                                   const ValidationOptions& opt) {
  const Philox rng(opt.seed, kStreamProbes);
  const int n = model.dims.n;
  for (int probe = 0; probe < opt.n_probes; ++probe) {
    const auto P = static_cast<std::uint32_t>(probe) + 1000u;
    const double t = opt.horizon * rng.uniform(P, 0, 0);
    Vector x(n);
    for (int i = 0; i < n; ++i) {
      x[i] = opt.state_radius * (2.0 * rng.uniform(P, 1, static_cast<std::uint32_t>(i)) - 1.0);
    }
    for (const auto& a : actions.actions) {
      if (model.b(t, x, a).cwiseAbs().maxCoeff() != 0.0) return false;
      if (model.h(t, x, a) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace gjump
