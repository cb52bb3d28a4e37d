#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "microtherm/discrete1d.hpp"
#include "microtherm/evolve.hpp"

namespace microtherm {

/// The seven quadratic energy contributions of a state; total = U^T G U / 2.
struct EnergyBreakdown {
  double total = 0;
  double kinetic = 0;       ///< rho v^2 / 2
  double thermal = 0;       ///< c theta^2 / 2
  double microthermal = 0;  ///< alpha M^2 / 2
  double elastic = 0;       ///< m_uu (u')^2 / 2
  double coupling = 0;      ///< m_ur u' R'
  double tau_gradient = 0;  ///< K (tau')^2 / 2
  double R_gradient = 0;    ///< m_rr (R')^2 / 2
  double dissipation_rate = 0;

  double sum_of_terms() const {
    return kinetic + thermal + microthermal + elastic + coupling + tau_gradient + R_gradient;
  }
};

EnergyBreakdown energy(const DiscreteOperator& op, const State1D& s);

/// Quadrature of H (theta')^2 + m_rr_rate (M')^2 on the cell midpoints.
/// For a forward operator this equals -U^T G A U.
double dissipation_rate(const DiscreteOperator& op, const State1D& s);

inline constexpr int kMaxDenseDimension = 3000;

struct SpectralReport {
  std::vector<std::complex<double>> eigenvalues;
  double spectral_abscissa = 0;    ///< max Re(lambda)
  double max_modulus = 0;          ///< max |lambda|
  double dissipativity_margin = 0; ///< max over probes of U^T G A U / |U|_G^2
  double random_probe_max = 0;     ///< same, random probes only
  double numerical_abscissa = 0;   ///< sup of the G-numerical range (extremal probe)
};

/// Dense spectrum of A, computed on the G-orthonormalized operator
/// L^-1 G A L^-T (G = L L^T), which is similar to A. The probe set is
/// `n_probes` random directions plus the extremal direction of the
/// symmetric part, so spectral_abscissa <= dissipativity_margin.
/// Throws SizeLimitError when 6n > 3000 and EigenFailureError on
/// non-convergence.
SpectralReport spectral_report(const DiscreteOperator& op, int n_probes, std::uint64_t seed = 1);

/// Least-squares fit log(E(t)/E(0)) ~ intercept + rate * t on the tail half.
struct DecayFit {
  double rate = 0;
  double intercept = 0;
  double rate_low = 0;   ///< rate - 2 standard errors
  double rate_high = 0;  ///< rate + 2 standard errors
  double t_begin = 0;
  double t_end = 0;
  int n_points = 0;

  /// Time at which the fitted line reaches E/E(0) = fraction.
  double predicted_time(double fraction) const;
};

/// Throws DegenerateTrajectoryError for E(0) = 0, fewer than 10 snapshots or
/// a vanishing energy in the fitted window.
DecayFit fit_decay(const Trajectory& traj, const DiscreteOperator& op);

/// Per-state values of the backward-problem functionals.
struct BackwardTerms {
  double E1 = 0;
  double E2 = 0;
  double E3 = 0;
};

BackwardTerms backward_terms(const DiscreteOperator& op, const State1D& s);

/// int (m_uu u'^2 + c theta^2 + alpha M^2) - int (rho v^2 + K tau'^2 + m_rr R'^2).
double identity_residual(const DiscreteOperator& op, const State1D& s);

struct BackwardFunctionals {
  std::vector<double> times;
  std::vector<double> E1, E2, E3;
  std::vector<double> calE;       ///< int_0^t (eps E1 + E2 + lam E3) ds, trapezoid rule
  std::vector<double> calE_rate;  ///< centred differences of calE
  std::vector<double> identity_residual;
  double gronwall_K = 0;  ///< max calE_rate / (4 calE) where calE > 1e-300
  double eps = 0;
  double lam = 0;
};

inline constexpr double kDefaultEps = 0.5;
inline constexpr double kDefaultLam = 2.0;

/// Throws IndefiniteFormError unless 0 < eps < 1, lam > 0 and both
/// lam H + (eps - 2) K and lam m_rr_rate + (eps - 2) m_rr are positive.
void check_backward_form(const Moduli1D& m, double eps, double lam);

BackwardFunctionals backward_functionals(const Trajectory& traj, const DiscreteOperator& op,
                                         double eps = kDefaultEps, double lam = kDefaultLam);

struct LocalizationReport {
  bool trivial = false;             ///< zero initial data: E == 0 throughout
  bool positive_everywhere = false; ///< E(t) > 0 at every step
  double min_energy_ratio = 0;      ///< min_t E(t) / E(0)
  double round_trip_error = 0;      ///< max abs error of forward-then-backward (inf if it diverged)
  bool round_trip_certified = false;  ///< type II only: error <= 1e-8
};

/// Runs forward n_steps, checks E > 0 at every step, then integrates the
/// backward operator from the time-reversed final state for n_steps.
LocalizationReport localization_probe(const DiscreteOperator& op_fwd, const DiscreteOperator& op_bwd,
                                      const InitialData& init, double dt, int n_steps);

/// Per-step energy balance residuals along a trajectory stored every step.
struct EnergyBalance {
  double max_midpoint_residual = 0;   ///< max |dE + dt D(U_{k+1/2})|
  double max_trapezoid_residual = 0;  ///< max |dE + dt (D_k + D_{k+1}) / 2|
};

EnergyBalance energy_balance(const Trajectory& traj, const DiscreteOperator& op);

}  // namespace microtherm
