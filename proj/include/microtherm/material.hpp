#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace microtherm {

/// Isotropic, homogeneous constitutive coefficients of the type II/III
/// microtemperature model, in consistent nondimensional units.
///
/// Type II is the sub-case H_cond = rho1 = rho2 = rho3 = 0.
struct MaterialIsotropic {
  double rho = 1.0;       ///< mass density
  double lambda_e = 1.0;  ///< Lame lambda
  double mu_e = 1.0;      ///< Lame mu
  double beta = 1.0;      ///< thermal coupling (3 lambda + 2 mu) alpha_t
  double c_cap = 1.0;     ///< rho c_E / T0
  double alpha_m = 1.0;   ///< microthermal inertia
  double gamma1 = 0.1;
  double gamma2 = 0.1;
  double K_cond = 1.0;  ///< conductivity
  double H_cond = 1.0;  ///< type III thermal rate coefficient
  double varpi = 0.1;
  double hbar_c = 0.1;
  double eta1 = 1.0 / 3.0;
  double eta2 = 1.0 / 3.0;
  double eta3 = 1.0 / 3.0;
  double rho1 = 1.0 / 3.0;
  double rho2 = 1.0 / 3.0;
  double rho3 = 1.0 / 3.0;

  /// Canonical nondimensional fixture (type III).
  static MaterialIsotropic reference() { return {}; }
  /// Same coefficients with every type III rate coefficient zeroed.
  MaterialIsotropic as_type2() const;
  bool is_type2() const { return H_cond == 0.0 && rho1 == 0.0 && rho2 == 0.0 && rho3 == 0.0; }
};

struct Violation {
  std::string condition;  ///< short name, e.g. "K_cond > 0"
  std::string detail;     ///< offending value(s), human readable
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
  /// True if any violation's condition or detail contains `needle`.
  bool mentions(std::string_view needle) const;
  std::string to_string() const;
};

/// Dense 3x3 and 3x3x3x3 arrays with 0-based index access.
struct Tensor2 {
  std::array<double, 9> data{};
  double& operator()(int i, int j) { return data[3 * i + j]; }
  double operator()(int i, int j) const { return data[3 * i + j]; }
};

struct Tensor4 {
  std::array<double, 81> data{};
  double& operator()(int i, int j, int k, int l) { return data[27 * i + 9 * j + 3 * k + l]; }
  double operator()(int i, int j, int k, int l) const { return data[27 * i + 9 * j + 3 * k + l]; }
};

/// Full anisotropic coefficient set. Only validated, never evolved.
struct AnisotropicTensors {
  Tensor4 A, B, C, Ctilde;
  Tensor2 a, b, c, d, K, Ktilde;
  double rho = 1.0;
  double c_cap = 1.0;

  /// Tensor form of an isotropic material. C is built from the symmetrized
  /// pair (eta2 + eta3) / 2 so that C_ijkl = C_jikl holds for any eta2, eta3.
  static AnisotropicTensors isotropic_embedding(const MaterialIsotropic& m);
};

/// Coefficients of the one-dimensional reduction (fields depending on x1 only,
/// u = (u, 0, 0), R = (R, 0, 0)).
struct Moduli1D {
  double m_uu = 0;       ///< lambda + 2 mu
  double m_ur = 0;       ///< gamma1 + 2 gamma2
  double m_rr = 0;       ///< eta1 + eta2 + eta3
  double m_rr_rate = 0;  ///< rho1 + rho2 + rho3
  double rho = 0;
  double beta = 0;
  double c_cap = 0;
  double alpha_m = 0;
  double K_cond = 0;
  double H_cond = 0;
  double varpi_plus_hbar = 0;
  double hbar_c = 0;

  bool is_type2() const { return H_cond == 0.0 && m_rr_rate == 0.0; }
  /// Smallest eigenvalue of [[m_uu, m_ur], [m_ur, m_rr]].
  double min_stiffness_eigenvalue() const;
};

ValidationReport validate_isotropic(const MaterialIsotropic& m);
ValidationReport validate_anisotropic(const AnisotropicTensors& t);

/// Throws InvalidMaterialError when validate_isotropic reports violations.
Moduli1D to_moduli_1d(const MaterialIsotropic& m);

}  // namespace microtherm
