#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "microtherm/discrete1d.hpp"

namespace microtherm {

/// Initial values of the six fields; same layout as a state.
using InitialData = State1D;

enum class Scheme { midpoint, rk4 };

const char* scheme_name(Scheme s);

struct Trajectory {
  std::vector<double> times;  ///< times[k] = k * snapshot_every * dt
  std::vector<State1D> snapshots;
  double dt = 0.0;
  int snapshot_every = 1;
  Scheme scheme = Scheme::midpoint;
};

/// One implicit-midpoint step: (I - dt/2 A) U+ = (I + dt/2 A) U.
/// Solved with BiCGSTAB to relative tolerance 1e-12, falling back to a sparse
/// LU factorization; throws SolveFailureError if neither meets the tolerance.
State1D step_midpoint(const DiscreteOperator& op, const State1D& s, double dt);

/// Classical RK4 step. Cross-check integrator only; it does not preserve the
/// quadratic invariant.
State1D step_rk4(const DiscreteOperator& op, const State1D& s, double dt);

/// Midpoint stepper for a fixed dt; factorizes I - dt/2 A once.
class MidpointStepper {
 public:
  MidpointStepper(const DiscreteOperator& op, double dt);
  ~MidpointStepper();
  MidpointStepper(MidpointStepper&&) noexcept;
  MidpointStepper& operator=(MidpointStepper&&) noexcept;

  Eigen::VectorXd step(const Eigen::VectorXd& U) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Integrates dU/dt = A U with the operator's own sign convention, so a
/// backward operator is advanced in its own time variable.
/// Keeps one snapshot every `snapshot_every` steps, starting with `init`.
Trajectory run_forward(const DiscreteOperator& op, const InitialData& init, double dt, int n_steps,
                       int snapshot_every = 1, Scheme scheme = Scheme::midpoint);

}  // namespace microtherm
