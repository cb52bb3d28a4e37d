#include "microtherm/discrete1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "microtherm/error.hpp"

namespace microtherm {

namespace {

using Triplet = Eigen::Triplet<double>;

void require_same_size(const DiscreteOperator& op, Eigen::Index size) {
  if (size != op.dim())
    throw DimensionMismatchError("state of size " + std::to_string(size) + " does not match operator dimension " +
                                 std::to_string(op.dim()));
}

void check_moduli(const Moduli1D& m) {
  const double all[] = {m.m_uu, m.m_ur, m.m_rr, m.m_rr_rate, m.rho, m.beta, m.c_cap, m.alpha_m,
                        m.K_cond, m.H_cond, m.varpi_plus_hbar};
  for (double x : all)
    if (!std::isfinite(x)) throw InvalidMaterialError("non-finite modulus");
  if (!(m.rho > 0 && m.c_cap > 0 && m.alpha_m > 0))
    throw InvalidMaterialError("rho, c_cap and alpha_m must be positive");
  if (!(m.min_stiffness_eigenvalue() > 0 && m.K_cond > 0))
    throw InvalidMaterialError("condition (iii) fails for the 1D moduli");
  if (!(m.H_cond >= 0 && m.m_rr_rate >= 0)) throw InvalidMaterialError("condition (ii) fails for the 1D moduli");
}

// Block helpers writing into a 6n x 6n triplet list.
struct BlockWriter {
  int n;
  std::vector<Triplet>& out;

  void identity(Field row, Field col, double s) const {
    const int r0 = static_cast<int>(row) * n, c0 = static_cast<int>(col) * n;
    for (int j = 0; j < n; ++j) out.emplace_back(r0 + j, c0 + j, s);
  }
  // s * (f_{j-1} - 2 f_j + f_{j+1}) / h^2
  void laplacian(Field row, Field col, double s, double h) const {
    if (s == 0.0) return;
    const int r0 = static_cast<int>(row) * n, c0 = static_cast<int>(col) * n;
    const double w = s / (h * h);
    for (int j = 0; j < n; ++j) {
      out.emplace_back(r0 + j, c0 + j, -2.0 * w);
      if (j > 0) out.emplace_back(r0 + j, c0 + j - 1, w);
      if (j + 1 < n) out.emplace_back(r0 + j, c0 + j + 1, w);
    }
  }
  // s * (f_{j+1} - f_{j-1}) / (2h)
  void gradient(Field row, Field col, double s, double h) const {
    if (s == 0.0) return;
    const int r0 = static_cast<int>(row) * n, c0 = static_cast<int>(col) * n;
    const double w = s / (2.0 * h);
    for (int j = 0; j < n; ++j) {
      if (j > 0) out.emplace_back(r0 + j, c0 + j - 1, -w);
      if (j + 1 < n) out.emplace_back(r0 + j, c0 + j + 1, w);
    }
  }
  // s * h * D+^T D+ = s / h * tridiag(-1, 2, -1)
  void stiffness(Field row, Field col, double s, double h) const { laplacian(row, col, -s * h, h); }
};

DiscreteOperator assemble(const Grid1D& grid, const Moduli1D& m, Direction dir) {
  check_moduli(m);
  const int n = grid.n_interior();
  const double h = grid.spacing();
  const double sign = dir == Direction::forward ? 1.0 : -1.0;

  std::vector<Triplet> a;
  a.reserve(40 * n);
  const BlockWriter A{n, a};
  A.identity(Field::u, Field::v, 1.0);
  A.identity(Field::tau, Field::theta, 1.0);
  A.identity(Field::R, Field::M, 1.0);

  A.laplacian(Field::v, Field::u, m.m_uu / m.rho, h);
  A.gradient(Field::v, Field::theta, -sign * m.beta / m.rho, h);
  A.laplacian(Field::v, Field::R, m.m_ur / m.rho, h);

  A.gradient(Field::theta, Field::v, -sign * m.beta / m.c_cap, h);
  A.laplacian(Field::theta, Field::tau, m.K_cond / m.c_cap, h);
  A.laplacian(Field::theta, Field::theta, sign * m.H_cond / m.c_cap, h);
  A.gradient(Field::theta, Field::M, -sign * m.varpi_plus_hbar / m.c_cap, h);

  A.laplacian(Field::M, Field::u, m.m_ur / m.alpha_m, h);
  A.laplacian(Field::M, Field::R, m.m_rr / m.alpha_m, h);
  A.laplacian(Field::M, Field::M, sign * m.m_rr_rate / m.alpha_m, h);
  A.gradient(Field::M, Field::theta, -sign * m.varpi_plus_hbar / m.alpha_m, h);

  std::vector<Triplet> g;
  g.reserve(20 * n);
  const BlockWriter G{n, g};
  G.identity(Field::v, Field::v, m.rho * h);
  G.identity(Field::theta, Field::theta, m.c_cap * h);
  G.identity(Field::M, Field::M, m.alpha_m * h);
  G.stiffness(Field::u, Field::u, m.m_uu, h);
  G.stiffness(Field::u, Field::R, m.m_ur, h);
  G.stiffness(Field::R, Field::u, m.m_ur, h);
  G.stiffness(Field::R, Field::R, m.m_rr, h);
  G.stiffness(Field::tau, Field::tau, m.K_cond, h);

  DiscreteOperator op{grid, m, dir, {}, {}};
  op.A.resize(6 * n, 6 * n);
  op.A.setFromTriplets(a.begin(), a.end());
  op.G.resize(6 * n, 6 * n);
  op.G.setFromTriplets(g.begin(), g.end());
  return op;
}

void require_stencil_input(const Eigen::VectorXd& f, double h) {
  if (f.size() < 2) throw InvalidGridError("difference stencils need at least 2 values");
  if (!(h > 0)) throw InvalidGridError("grid spacing must be positive");
}

}  // namespace

Grid1D::Grid1D(int n_interior, double length) : n_(n_interior), length_(length) {
  if (n_interior < 2) throw InvalidGridError("grid needs at least 2 interior nodes");
  if (!(length > 0) || !std::isfinite(length)) throw InvalidGridError("grid length must be positive and finite");
}

Eigen::VectorXd Grid1D::nodes() const {
  Eigen::VectorXd x(n_);
  for (int j = 0; j < n_; ++j) x(j) = node(j);
  return x;
}

State1D State1D::zeros(int n) {
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  return {z, z, z, z, z, z};
}

State1D State1D::from_stacked(const Eigen::VectorXd& U) {
  if (U.size() % 6 != 0) throw DimensionMismatchError("stacked state length is not a multiple of 6");
  const Eigen::Index n = U.size() / 6;
  State1D s;
  for (Field f : kAllFields) s.field(f) = U.segment(static_cast<int>(f) * n, n);
  return s;
}

Eigen::VectorXd State1D::stacked() const {
  const Eigen::Index n = u.size();
  Eigen::VectorXd U(6 * n);
  for (Field f : kAllFields) {
    if (field(f).size() != n) throw DimensionMismatchError("fields of a state must have equal length");
    U.segment(static_cast<int>(f) * n, n) = field(f);
  }
  return U;
}

Eigen::VectorXd& State1D::field(Field f) {
  switch (f) {
    case Field::u: return u;
    case Field::v: return v;
    case Field::tau: return tau;
    case Field::theta: return theta;
    case Field::R: return R;
    case Field::M: return M;
  }
  return u;
}

const Eigen::VectorXd& State1D::field(Field f) const { return const_cast<State1D*>(this)->field(f); }

bool State1D::all_finite() const {
  for (Field f : kAllFields)
    if (!field(f).allFinite()) return false;
  return true;
}

Eigen::VectorXd second_difference(const Eigen::VectorXd& f, double h) {
  require_stencil_input(f, h);
  const Eigen::Index n = f.size();
  Eigen::VectorXd out(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double left = j > 0 ? f(j - 1) : 0.0;
    const double right = j + 1 < n ? f(j + 1) : 0.0;
    out(j) = (left - 2.0 * f(j) + right) / (h * h);
  }
  return out;
}

Eigen::VectorXd first_difference(const Eigen::VectorXd& f, double h) {
  require_stencil_input(f, h);
  const Eigen::Index n = f.size();
  Eigen::VectorXd out(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double left = j > 0 ? f(j - 1) : 0.0;
    const double right = j + 1 < n ? f(j + 1) : 0.0;
    out(j) = (right - left) / (2.0 * h);
  }
  return out;
}

Eigen::VectorXd forward_difference(const Eigen::VectorXd& f, double h) {
  require_stencil_input(f, h);
  const Eigen::Index n = f.size();
  Eigen::VectorXd out(n + 1);
  for (Eigen::Index j = 0; j <= n; ++j) {
    const double left = j > 0 ? f(j - 1) : 0.0;
    const double right = j < n ? f(j) : 0.0;
    out(j) = (right - left) / h;
  }
  return out;
}

DiscreteOperator assemble_operator(const Grid1D& grid, const Moduli1D& m) {
  return assemble(grid, m, Direction::forward);
}

DiscreteOperator assemble_backward(const Grid1D& grid, const Moduli1D& m) {
  return assemble(grid, m, Direction::backward);
}

double gram_norm(const DiscreteOperator& op, const Eigen::VectorXd& U) {
  require_same_size(op, U.size());
  const double q = U.dot(op.G * U);
  return std::sqrt(std::max(q, 0.0));
}

double gram_norm(const DiscreteOperator& op, const State1D& s) { return gram_norm(op, s.stacked()); }

double dissipativity_ratio(const DiscreteOperator& op, const Eigen::VectorXd& U) {
  require_same_size(op, U.size());
  const double norm2 = U.dot(op.G * U);
  if (norm2 == 0.0) return 0.0;
  const Eigen::VectorXd AU = op.A * U;
  return U.dot(op.G * AU) / norm2;
}

Eigen::VectorXd time_reversed(const Eigen::VectorXd& U) {
  const Eigen::Index n = U.size() / 6;
  Eigen::VectorXd out = U;
  for (Field f : {Field::v, Field::theta, Field::M}) out.segment(static_cast<int>(f) * n, n) *= -1.0;
  return out;
}

}  // namespace microtherm
