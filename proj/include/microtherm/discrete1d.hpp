#pragma once

#include <array>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "microtherm/material.hpp"

namespace microtherm {

/// Uniform grid on [0, L] with `n_interior` unknown nodes x_j = j h.
/// Boundary values of u, tau and R are zero.
class Grid1D {
 public:
  /// Throws InvalidGridError unless n_interior >= 2 and length > 0.
  Grid1D(int n_interior, double length = 1.0);

  int n_interior() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / (n_ + 1); }
  double node(int j) const { return (j + 1) * spacing(); }  // 0-based
  Eigen::VectorXd nodes() const;

 private:
  int n_;
  double length_;
};

/// Position of each field inside the stacked 6n state vector.
enum class Field : int { u = 0, v = 1, tau = 2, theta = 3, R = 4, M = 5 };
inline constexpr std::array<Field, 6> kAllFields{Field::u, Field::v, Field::tau, Field::theta, Field::R, Field::M};

struct State1D {
  Eigen::VectorXd u, v, tau, theta, R, M;

  static State1D zeros(int n);
  /// Splits a stacked (u, v, tau, theta, R, M) vector of length 6n.
  static State1D from_stacked(const Eigen::VectorXd& U);

  int size() const { return static_cast<int>(u.size()); }
  Eigen::VectorXd stacked() const;
  Eigen::VectorXd& field(Field f);
  const Eigen::VectorXd& field(Field f) const;
  bool all_finite() const;
};

/// (f_{j-1} - 2 f_j + f_{j+1}) / h^2 with zero ghost values.
Eigen::VectorXd second_difference(const Eigen::VectorXd& f, double h);
/// (f_{j+1} - f_{j-1}) / (2 h) with zero ghost values.
Eigen::VectorXd first_difference(const Eigen::VectorXd& f, double h);
/// (f_{j+1} - f_j) / h on the n + 1 cell midpoints, zero ghosts included.
Eigen::VectorXd forward_difference(const Eigen::VectorXd& f, double h);

enum class Direction { forward, backward };

/// Sparse generator of dU/dt = A U together with the energy Gram matrix G,
/// so that the energy is E = U^T G U / 2.
///
/// Forward rows:
///   rho v'   = m_uu u_xx - beta theta_x + m_ur R_xx
///   c theta' = -beta v_x + K tau_xx + H theta_xx - (varpi + hbar) M_x
///   alpha M' = m_ur u_xx + m_rr R_xx + m_rr_rate M_xx - (varpi + hbar) theta_x
/// The backward operator flips the sign of beta, varpi + hbar, H and m_rr_rate.
///
/// Second derivatives use the 3-point stencil, first derivatives the centred
/// stencil, and G integrates gradients on the staggered midpoints. With these
/// choices G A is exactly skew for the conservative part.
struct DiscreteOperator {
  Grid1D grid;
  Moduli1D moduli;
  Direction direction = Direction::forward;
  Eigen::SparseMatrix<double> A;
  Eigen::SparseMatrix<double> G;

  int n() const { return grid.n_interior(); }
  int dim() const { return 6 * grid.n_interior(); }
};

DiscreteOperator assemble_operator(const Grid1D& grid, const Moduli1D& m);
DiscreteOperator assemble_backward(const Grid1D& grid, const Moduli1D& m);

/// sqrt(U^T G U). Throws DimensionMismatchError.
double gram_norm(const DiscreteOperator& op, const State1D& s);
double gram_norm(const DiscreteOperator& op, const Eigen::VectorXd& U);

/// U^T G A U / U^T G U (0 for the zero state).
double dissipativity_ratio(const DiscreteOperator& op, const Eigen::VectorXd& U);

/// Time-reversal map (u, v, tau, theta, R, M) -> (u, -v, tau, -theta, R, -M).
Eigen::VectorXd time_reversed(const Eigen::VectorXd& U);

}  // namespace microtherm
