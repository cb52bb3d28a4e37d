#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "microtherm/material.hpp"

namespace microtherm {

using Complex = std::complex<double>;

/// M(omega) = C0 + omega C1 + omega^2 C2 for the plane wave
/// (u, tau, R) = (U, T, Rh) exp(i (k x - omega t)). Decay means Im omega < 0.
struct QuadraticPencil {
  Eigen::Matrix3cd C0, C1, C2;

  Eigen::Matrix3cd at(Complex omega) const { return C0 + omega * C1 + omega * omega * C2; }
};

/// Polynomial coefficients, lowest degree first.
using Poly6 = std::array<Complex, 7>;

QuadraticPencil characteristic_matrix(const Moduli1D& m, double k);

/// det M(omega) as a degree-6 polynomial.
Poly6 characteristic_polynomial(const QuadraticPencil& p);
Complex evaluate(const Poly6& p, Complex omega);

/// Roots of det M(omega) from the companion matrix.
std::array<Complex, 6> polynomial_roots(const Poly6& p);

/// Independent route: omega = i mu for the eigenvalues mu of the 6x6
/// first-order symbol of the stacked system (u, v, tau, theta, R, M).
Eigen::Matrix<Complex, 6, 6> first_order_symbol(const Moduli1D& m, double k);
std::array<Complex, 6> symbol_roots(const Moduli1D& m, double k);

/// Largest distance between two root sets after one-to-one nearest matching,
/// relative to max(1, |omega|).
double root_set_distance(const std::array<Complex, 6>& a, const std::array<Complex, 6>& b);

struct DispersionResult {
  std::vector<double> k;
  std::vector<std::array<Complex, 6>> branches;  ///< branches[i][b] at k[i]
  std::vector<std::array<double, 6>> phase_speeds;
  double max_phase_speed = 0;
  double max_group_speed = 0;  ///< sup |d Re omega / dk| over the sampled grid
  double max_residual = 0;     ///< max scaled |det M| at the reported roots
  std::vector<std::size_t> crossings;  ///< k indices where continuation was ambiguous
};

/// Roots per k (in parallel, at most `threads` workers; 0 = use the
/// MICROTHERM_THREADS environment variable, default 1), then branches are
/// matched by nearest continuation with a linear predictor.
/// Throws RootFailureError when a root's scaled residual exceeds 1e-8.
DispersionResult solve_branches(const Moduli1D& m, const std::vector<double>& k_grid, int threads = 0);

/// Worker cap read from MICROTHERM_THREADS (>= 1).
int threads_from_environment();

std::vector<double> linspace(double a, double b, std::size_t n);

}  // namespace microtherm
