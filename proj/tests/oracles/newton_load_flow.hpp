#pragma once

// Test-only Newton-Raphson load flow (polar form, full Y-bus). Shares no code
// with the sweep solver; used as the reference for fidelity checks.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace oracle {

struct Line {
  int from, to;  // 1-based
  double r_ohm, x_ohm;
};

struct NewtonResult {
  std::vector<double> vm;  // p.u.
  std::vector<double> va;  // rad
  double loss_kw;
  int iterations;
};

// Bus 1 is the slack at 1.0 p.u.; loads are three-phase totals in kW/kvar.
inline NewtonResult newton_load_flow(int n, const std::vector<Line>& lines, const std::vector<double>& p_kw,
                                     const std::vector<double>& q_kvar, double kv_ll, double mva) {
  using C = std::complex<double>;
  const double zbase = kv_ll * kv_ll / mva;
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& l : lines) {
    C yl = 1.0 / C(l.r_ohm / zbase, l.x_ohm / zbase);
    int a = l.from - 1, b = l.to - 1;
    y(a, a) += yl;
    y(b, b) += yl;
    y(a, b) -= yl;
    y(b, a) -= yl;
  }
  Eigen::VectorXd ps(n), qs(n);
  for (int i = 0; i < n; ++i) {
    ps(i) = -p_kw[i] / (mva * 1000.0);
    qs(i) = -q_kvar[i] / (mva * 1000.0);
  }
  Eigen::VectorXd vm = Eigen::VectorXd::Ones(n), va = Eigen::VectorXd::Zero(n);
  const int m = n - 1;
  int it = 0;
  for (; it < 50; ++it) {
    Eigen::VectorXd pc = Eigen::VectorXd::Zero(n), qc = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double g = y(i, k).real(), b = y(i, k).imag(), t = va(i) - va(k);
        pc(i) += vm(i) * vm(k) * (g * std::cos(t) + b * std::sin(t));
        qc(i) += vm(i) * vm(k) * (g * std::sin(t) - b * std::cos(t));
      }
    Eigen::VectorXd f(2 * m);
    for (int i = 1; i < n; ++i) {
      f(i - 1) = ps(i) - pc(i);
      f(m + i - 1) = qs(i) - qc(i);
    }
    if (f.cwiseAbs().maxCoeff() < 1e-12) break;
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (int i = 1; i < n; ++i)
      for (int k = 1; k < n; ++k) {
        double g = y(i, k).real(), b = y(i, k).imag(), t = va(i) - va(k);
        if (i == k) {
          j(i - 1, k - 1) = -qc(i) - b * vm(i) * vm(i);
          j(i - 1, m + k - 1) = pc(i) / vm(i) + g * vm(i);
          j(m + i - 1, k - 1) = pc(i) - g * vm(i) * vm(i);
          j(m + i - 1, m + k - 1) = qc(i) / vm(i) - b * vm(i);
        } else {
          j(i - 1, k - 1) = vm(i) * vm(k) * (g * std::sin(t) - b * std::cos(t));
          j(i - 1, m + k - 1) = vm(i) * (g * std::cos(t) + b * std::sin(t));
          j(m + i - 1, k - 1) = -vm(i) * vm(k) * (g * std::cos(t) + b * std::sin(t));
          j(m + i - 1, m + k - 1) = vm(i) * (g * std::sin(t) - b * std::cos(t));
        }
      }
    Eigen::VectorXd dx = j.fullPivLu().solve(f);
    for (int i = 1; i < n; ++i) {
      va(i) += dx(i - 1);
      vm(i) += dx(m + i - 1);
    }
  }
  if (it == 50) throw std::runtime_error("newton oracle diverged");
  // Slack injection minus total load is the loss.
  C s1 = 0.0;
  for (int k = 0; k < n; ++k) s1 += std::conj(y(0, k) * std::polar(vm(k), va(k)));
  double p_inj = (std::polar(vm(0), va(0)) * s1).real();
  double load = 0.0;
  for (double p : p_kw) load += p;
  NewtonResult r;
  r.vm.assign(vm.data(), vm.data() + n);
  r.va.assign(va.data(), va.data() + n);
  r.loss_kw = p_inj * mva * 1000.0 - load;
  r.iterations = it;
  return r;
}

}  // namespace oracle
