#include "microtherm/material.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "microtherm/error.hpp"

namespace microtherm {

namespace {

std::string fmt_value(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double kron(int i, int j) { return i == j ? 1.0 : 0.0; }

std::string index_name(std::string_view tensor, std::initializer_list<int> idx) {
  std::string s(tensor);
  s += '_';
  for (int i : idx) s += static_cast<char>('1' + i);
  return s;
}

void check_minor_major(const Tensor4& t, std::string_view name, bool minor, ValidationReport& report) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const double x = t(i, j, k, l);
          // each unordered pair reported once
          if (minor && (3 * i + j) < (3 * j + i) && x != t(j, i, k, l)) {
            report.violations.push_back(
                {"symmetry " + std::string(name) + "_ijkl = " + std::string(name) + "_jikl",
                 index_name(name, {i, j, k, l}) + " = " + fmt_value(x) + " but " +
                     index_name(name, {j, i, k, l}) + " = " + fmt_value(t(j, i, k, l))});
          }
          if ((3 * i + j) < (3 * k + l) && x != t(k, l, i, j)) {
            report.violations.push_back(
                {"symmetry " + std::string(name) + "_ijkl = " + std::string(name) + "_klij",
                 index_name(name, {i, j, k, l}) + " = " + fmt_value(x) + " but " +
                     index_name(name, {k, l, i, j}) + " = " + fmt_value(t(k, l, i, j))});
          }
        }
}

void check_symmetric(const Tensor2& t, std::string_view name, ValidationReport& report) {
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (t(i, j) != t(j, i)) {
        report.violations.push_back(
            {"symmetry " + std::string(name) + "_ij = " + std::string(name) + "_ji",
             index_name(name, {i, j}) + " = " + fmt_value(t(i, j)) + " but " +
                 index_name(name, {j, i}) + " = " + fmt_value(t(j, i))});
      }
}

template <class Array>
void require_finite(const Array& values, const char* what) {
  for (double x : values)
    if (!std::isfinite(x)) throw NonFiniteError(std::string("non-finite entry in ") + what);
}

}  // namespace

MaterialIsotropic MaterialIsotropic::as_type2() const {
  MaterialIsotropic m = *this;
  m.H_cond = 0.0;
  m.rho1 = m.rho2 = m.rho3 = 0.0;
  return m;
}

bool ValidationReport::mentions(std::string_view needle) const {
  for (const auto& v : violations)
    if (v.condition.find(needle) != std::string::npos || v.detail.find(needle) != std::string::npos)
      return true;
  return false;
}

std::string ValidationReport::to_string() const {
  if (violations.empty()) return "valid";
  std::string s;
  for (const auto& v : violations) {
    if (!s.empty()) s += "; ";
    s += v.condition + " (" + v.detail + ")";
  }
  return s;
}

double Moduli1D::min_stiffness_eigenvalue() const {
  const double mean = 0.5 * (m_uu + m_rr);
  const double half_diff = 0.5 * (m_uu - m_rr);
  return mean - std::hypot(half_diff, m_ur);
}

ValidationReport validate_isotropic(const MaterialIsotropic& m) {
  const std::pair<const char*, double> fields[] = {
      {"rho", m.rho},       {"lambda_e", m.lambda_e}, {"mu_e", m.mu_e},     {"beta", m.beta},
      {"c_cap", m.c_cap},   {"alpha_m", m.alpha_m},   {"gamma1", m.gamma1}, {"gamma2", m.gamma2},
      {"K_cond", m.K_cond}, {"H_cond", m.H_cond},     {"varpi", m.varpi},   {"hbar_c", m.hbar_c},
      {"eta1", m.eta1},     {"eta2", m.eta2},         {"eta3", m.eta3},     {"rho1", m.rho1},
      {"rho2", m.rho2},     {"rho3", m.rho3}};
  for (const auto& [name, value] : fields)
    if (!std::isfinite(value)) throw NonFiniteError(std::string("material field ") + name + " is not finite");

  ValidationReport report;
  auto require = [&](bool ok, const char* condition, const std::string& detail) {
    if (!ok) report.violations.push_back({condition, detail});
  };

  require(m.rho > 0, "condition (ii): rho > 0", "rho = " + fmt_value(m.rho));
  require(m.c_cap > 0, "c_cap > 0", "c_cap = " + fmt_value(m.c_cap));
  require(m.alpha_m > 0, "alpha_m > 0", "alpha_m = " + fmt_value(m.alpha_m));
  require(m.H_cond >= 0, "condition (ii): H_cond >= 0", "H_cond = " + fmt_value(m.H_cond));
  const double rate_sum = m.rho1 + m.rho2 + m.rho3;
  require(rate_sum >= 0, "condition (ii): rho1 + rho2 + rho3 >= 0",
          "rho1 + rho2 + rho3 = " + fmt_value(rate_sum));
  // full 3D form on spherical, symmetric deviatoric and skew gradients
  require(3 * m.rho1 + m.rho2 + m.rho3 >= 0, "condition (ii): 3 rho1 + rho2 + rho3 >= 0",
          "3 rho1 + rho2 + rho3 = " + fmt_value(3 * m.rho1 + m.rho2 + m.rho3));
  require(m.rho2 + m.rho3 >= 0, "condition (ii): rho2 + rho3 >= 0", "rho2 + rho3 = " + fmt_value(m.rho2 + m.rho3));
  require(m.rho2 >= m.rho3, "condition (ii): rho2 >= rho3",
          "rho2 = " + fmt_value(m.rho2) + ", rho3 = " + fmt_value(m.rho3));

  Moduli1D probe;
  probe.m_uu = m.lambda_e + 2 * m.mu_e;
  probe.m_ur = m.gamma1 + 2 * m.gamma2;
  probe.m_rr = m.eta1 + m.eta2 + m.eta3;
  const double lmin = probe.min_stiffness_eigenvalue();
  require(lmin > 0, "condition (iii): [[lambda+2mu, gamma1+2gamma2], [gamma1+2gamma2, eta1+eta2+eta3]] positive definite",
          "smallest eigenvalue = " + fmt_value(lmin));
  require(m.K_cond > 0, "K_cond > 0", "K_cond = " + fmt_value(m.K_cond));
  return report;
}

ValidationReport validate_anisotropic(const AnisotropicTensors& t) {
  require_finite(t.A.data, "A");
  require_finite(t.B.data, "B");
  require_finite(t.C.data, "C");
  require_finite(t.Ctilde.data, "Ctilde");
  require_finite(t.a.data, "a");
  require_finite(t.b.data, "b");
  require_finite(t.c.data, "c");
  require_finite(t.d.data, "d");
  require_finite(t.K.data, "K");
  require_finite(t.Ktilde.data, "Ktilde");
  if (!std::isfinite(t.rho) || !std::isfinite(t.c_cap)) throw NonFiniteError("non-finite rho or c_cap");

  ValidationReport report;
  check_minor_major(t.A, "A", true, report);
  check_minor_major(t.B, "B", true, report);
  check_minor_major(t.C, "C", true, report);
  check_minor_major(t.Ctilde, "Ctilde", false, report);
  check_symmetric(t.a, "a", report);
  check_symmetric(t.b, "b", report);
  check_symmetric(t.c, "c", report);
  check_symmetric(t.d, "d", report);
  check_symmetric(t.K, "K", report);
  check_symmetric(t.Ktilde, "Ktilde", report);

  if (!(t.rho > 0)) report.violations.push_back({"condition (ii): rho > 0", "rho = " + fmt_value(t.rho)});
  if (!(t.c_cap > 0)) report.violations.push_back({"c_cap > 0", "c_cap = " + fmt_value(t.c_cap)});

  // leading principal minors of c
  const double m1 = t.c(0, 0);
  const double m2 = t.c(0, 0) * t.c(1, 1) - t.c(0, 1) * t.c(1, 0);
  const double m3 = t.c(0, 0) * (t.c(1, 1) * t.c(2, 2) - t.c(1, 2) * t.c(2, 1)) -
                    t.c(0, 1) * (t.c(1, 0) * t.c(2, 2) - t.c(1, 2) * t.c(2, 0)) +
                    t.c(0, 2) * (t.c(1, 0) * t.c(2, 1) - t.c(1, 1) * t.c(2, 0));
  if (!(m1 > 0 && m2 > 0 && m3 > 0))
    report.violations.push_back({"c_ij positive definite", "leading principal minors = " + fmt_value(m1) + ", " +
                                                               fmt_value(m2) + ", " + fmt_value(m3)});

  // condition (ii): Ktilde_ij th_i th_j + Ctilde_ijkl M_lk M_ij >= 0 for all gradients
  {
    Eigen::Matrix3d kt;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) kt(i, j) = 0.5 * (t.Ktilde(i, j) + t.Ktilde(j, i));
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(kt, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (lmin < -1e-12 * std::max(1.0, kt.cwiseAbs().maxCoeff()))
      report.violations.push_back({"condition (ii): Ktilde positive semidefinite",
                                   "smallest eigenvalue = " + fmt_value(lmin)});

    Eigen::Matrix<double, 9, 9> q;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) q(3 * i + j, 3 * l + k) = t.Ctilde(i, j, k, l);
    const Eigen::Matrix<double, 9, 9> qs = 0.5 * (q + q.transpose());
    const double cmin =
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>>(qs, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (cmin < -1e-12 * std::max(1.0, qs.cwiseAbs().maxCoeff()))
      report.violations.push_back({"condition (ii): Ctilde form positive semidefinite",
                                   "smallest eigenvalue = " + fmt_value(cmin)});
  }
  return report;
}

AnisotropicTensors AnisotropicTensors::isotropic_embedding(const MaterialIsotropic& m) {
  AnisotropicTensors t;
  const double eta_sym = 0.5 * (m.eta2 + m.eta3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double dij = kron(i, j);
      t.a(i, j) = m.beta * dij;
      t.b(i, j) = m.varpi * dij;
      t.c(i, j) = m.alpha_m * dij;
      t.d(i, j) = m.hbar_c * dij;
      t.K(i, j) = m.K_cond * dij;
      t.Ktilde(i, j) = m.H_cond * dij;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const double dkl = kron(k, l);
          const double sym = kron(i, k) * kron(j, l) + kron(i, l) * kron(j, k);
          t.A(i, j, k, l) = m.lambda_e * dij * dkl + m.mu_e * sym;
          t.B(i, j, k, l) = m.gamma1 * dij * dkl + m.gamma2 * sym;
          t.C(i, j, k, l) = m.eta1 * dij * dkl + eta_sym * sym;
          t.Ctilde(i, j, k, l) = m.rho1 * dij * dkl + m.rho2 * kron(j, k) * kron(i, l) + m.rho3 * kron(i, k) * kron(j, l);
        }
    }
  t.rho = m.rho;
  t.c_cap = m.c_cap;
  return t;
}

Moduli1D to_moduli_1d(const MaterialIsotropic& m) {
  const ValidationReport report = validate_isotropic(m);
  if (!report.valid()) throw InvalidMaterialError("invalid material: " + report.to_string());
  Moduli1D out;
  out.m_uu = m.lambda_e + 2 * m.mu_e;
  out.m_ur = m.gamma1 + 2 * m.gamma2;
  out.m_rr = m.eta1 + m.eta2 + m.eta3;
  out.m_rr_rate = m.rho1 + m.rho2 + m.rho3;
  out.rho = m.rho;
  out.beta = m.beta;
  out.c_cap = m.c_cap;
  out.alpha_m = m.alpha_m;
  out.K_cond = m.K_cond;
  out.H_cond = m.H_cond;
  out.varpi_plus_hbar = m.varpi + m.hbar_c;
  out.hbar_c = m.hbar_c;
  return out;
}

}  // namespace microtherm
