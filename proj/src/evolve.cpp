#include "microtherm/evolve.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "microtherm/error.hpp"

namespace microtherm {

namespace {

constexpr double kSolveTolerance = 1e-12;

using SpMat = Eigen::SparseMatrix<double>;

SpMat shifted_identity(const DiscreteOperator& op, double scale) {
  SpMat I(op.dim(), op.dim());
  I.setIdentity();
  SpMat out = I + scale * op.A;
  out.makeCompressed();
  return out;
}

double relative_residual(const SpMat& lhs, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double bn = b.norm();
  const double rn = (lhs * x - b).norm();
  return bn == 0.0 ? rn : rn / bn;
}

void check_state(const DiscreteOperator& op, const State1D& s) {
  for (Field f : kAllFields)
    if (s.field(f).size() != op.n())
      throw DimensionMismatchError("state field length " + std::to_string(s.field(f).size()) +
                                   " does not match grid size " + std::to_string(op.n()));
  if (!s.all_finite()) throw NonFiniteError("state contains non-finite values");
}

void check_dt(double dt) {
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive and finite");
}

}  // namespace

const char* scheme_name(Scheme s) { return s == Scheme::midpoint ? "midpoint" : "rk4"; }

State1D step_midpoint(const DiscreteOperator& op, const State1D& s, double dt) {
  check_state(op, s);
  check_dt(dt);
  const SpMat lhs = shifted_identity(op, -0.5 * dt);
  const Eigen::VectorXd U = s.stacked();
  const Eigen::VectorXd rhs = U + 0.5 * dt * (op.A * U);
  if (rhs.squaredNorm() == 0.0) return State1D::zeros(op.n());

  Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> iterative;
  iterative.setTolerance(kSolveTolerance);
  iterative.setMaxIterations(10 * op.dim());
  iterative.compute(lhs);
  if (iterative.info() == Eigen::Success) {
    Eigen::VectorXd x = iterative.solveWithGuess(rhs, U);
    if (iterative.info() == Eigen::Success && relative_residual(lhs, x, rhs) <= kSolveTolerance)
      return State1D::from_stacked(x);
  }

  Eigen::SparseLU<SpMat> direct;
  direct.compute(lhs);
  if (direct.info() != Eigen::Success) throw SolveFailureError("sparse LU factorization failed");
  Eigen::VectorXd x = direct.solve(rhs);
  x += direct.solve(rhs - lhs * x);  // one refinement sweep
  const double res = relative_residual(lhs, x, rhs);
  if (!(res <= kSolveTolerance)) throw SolveFailureError("midpoint solve residual " + std::to_string(res));
  return State1D::from_stacked(x);
}

State1D step_rk4(const DiscreteOperator& op, const State1D& s, double dt) {
  check_state(op, s);
  check_dt(dt);
  const Eigen::VectorXd U = s.stacked();
  const Eigen::VectorXd k1 = op.A * U;
  const Eigen::VectorXd k2 = op.A * (U + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = op.A * (U + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = op.A * (U + dt * k3);
  return State1D::from_stacked(U + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

struct MidpointStepper::Impl {
  SpMat lhs;
  SpMat rhs;
  Eigen::SparseLU<SpMat> lu;
};

MidpointStepper::MidpointStepper(const DiscreteOperator& op, double dt) : impl_(std::make_unique<Impl>()) {
  check_dt(dt);
  impl_->lhs = shifted_identity(op, -0.5 * dt);
  impl_->rhs = shifted_identity(op, 0.5 * dt);
  impl_->lu.analyzePattern(impl_->lhs);
  impl_->lu.factorize(impl_->lhs);
  if (impl_->lu.info() != Eigen::Success) throw SolveFailureError("sparse LU factorization failed");
}

MidpointStepper::~MidpointStepper() = default;
MidpointStepper::MidpointStepper(MidpointStepper&&) noexcept = default;
MidpointStepper& MidpointStepper::operator=(MidpointStepper&&) noexcept = default;

Eigen::VectorXd MidpointStepper::step(const Eigen::VectorXd& U) const {
  const Eigen::VectorXd b = impl_->rhs * U;
  Eigen::VectorXd x = impl_->lu.solve(b);
  double res = relative_residual(impl_->lhs, x, b);
  if (res > kSolveTolerance) {
    x += impl_->lu.solve(b - impl_->lhs * x);
    res = relative_residual(impl_->lhs, x, b);
  }
  if (!(res <= kSolveTolerance)) throw SolveFailureError("midpoint solve residual " + std::to_string(res));
  return x;
}

Trajectory run_forward(const DiscreteOperator& op, const InitialData& init, double dt, int n_steps,
                       int snapshot_every, Scheme scheme) {
  check_state(op, init);
  check_dt(dt);
  if (n_steps < 0) throw std::invalid_argument("n_steps must be non-negative");
  if (snapshot_every < 1) throw std::invalid_argument("snapshot_every must be at least 1");

  Trajectory traj;
  traj.dt = dt;
  traj.snapshot_every = snapshot_every;
  traj.scheme = scheme;
  traj.times.reserve(n_steps / snapshot_every + 1);
  traj.snapshots.reserve(n_steps / snapshot_every + 1);
  traj.times.push_back(0.0);
  traj.snapshots.push_back(init);
  if (n_steps == 0) return traj;

  Eigen::VectorXd U = init.stacked();
  std::unique_ptr<MidpointStepper> stepper;
  if (scheme == Scheme::midpoint) stepper = std::make_unique<MidpointStepper>(op, dt);

  for (int k = 1; k <= n_steps; ++k) {
    if (stepper) {
      U = stepper->step(U);
    } else {
      U = step_rk4(op, State1D::from_stacked(U), dt).stacked();
    }
    if (k % snapshot_every == 0) {
      traj.times.push_back(k * dt);
      traj.snapshots.push_back(State1D::from_stacked(U));
    }
  }
  return traj;
}

}  // namespace microtherm
