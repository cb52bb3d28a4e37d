#include "microtherm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "microtherm/error.hpp"
#include "microtherm/random.hpp"

namespace microtherm {

namespace {

constexpr double kGronwallFloor = 1e-300;
constexpr double kRoundTripTolerance = 1e-8;

void check_state(const DiscreteOperator& op, const State1D& s) {
  for (Field f : kAllFields)
    if (s.field(f).size() != op.n())
      throw DimensionMismatchError("state field length " + std::to_string(s.field(f).size()) +
                                   " does not match grid size " + std::to_string(op.n()));
}

// Sum over cells of h * a_j * b_j on the midpoint gradients.
double cell_sum(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double h) { return h * a.dot(b); }

}  // namespace

EnergyBreakdown energy(const DiscreteOperator& op, const State1D& s) {
  check_state(op, s);
  const Moduli1D& m = op.moduli;
  const double h = op.grid.spacing();
  const Eigen::VectorXd du = forward_difference(s.u, h);
  const Eigen::VectorXd dtau = forward_difference(s.tau, h);
  const Eigen::VectorXd dR = forward_difference(s.R, h);

  EnergyBreakdown e;
  e.kinetic = 0.5 * m.rho * h * s.v.squaredNorm();
  e.thermal = 0.5 * m.c_cap * h * s.theta.squaredNorm();
  e.microthermal = 0.5 * m.alpha_m * h * s.M.squaredNorm();
  e.elastic = 0.5 * m.m_uu * cell_sum(du, du, h);
  e.coupling = m.m_ur * cell_sum(du, dR, h);
  e.tau_gradient = 0.5 * m.K_cond * cell_sum(dtau, dtau, h);
  e.R_gradient = 0.5 * m.m_rr * cell_sum(dR, dR, h);
  e.total = e.sum_of_terms();
  e.dissipation_rate = dissipation_rate(op, s);
  return e;
}

double dissipation_rate(const DiscreteOperator& op, const State1D& s) {
  check_state(op, s);
  const Moduli1D& m = op.moduli;
  const double h = op.grid.spacing();
  double d = 0.0;
  if (m.H_cond != 0.0) {
    const Eigen::VectorXd dth = forward_difference(s.theta, h);
    d += m.H_cond * cell_sum(dth, dth, h);
  }
  if (m.m_rr_rate != 0.0) {
    const Eigen::VectorXd dM = forward_difference(s.M, h);
    d += m.m_rr_rate * cell_sum(dM, dM, h);
  }
  return d;
}

SpectralReport spectral_report(const DiscreteOperator& op, int n_probes, std::uint64_t seed) {
  const int dim = op.dim();
  if (dim > kMaxDenseDimension)
    throw SizeLimitError("dense eigensolve limited to dimension " + std::to_string(kMaxDenseDimension) + ", got " +
                         std::to_string(dim));
  if (n_probes < 0) throw std::invalid_argument("n_probes must be non-negative");

  const Eigen::MatrixXd G = Eigen::MatrixXd(op.G);
  const Eigen::MatrixXd A = Eigen::MatrixXd(op.A);
  const Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw EigenFailureError("Gram matrix is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  // S = L^-1 (G A) L^-T is similar to A: S = L^T A L^-T.
  Eigen::MatrixXd GA = G * A;
  Eigen::MatrixXd tmp = L.triangularView<Eigen::Lower>().solve(GA);
  Eigen::MatrixXd S = L.triangularView<Eigen::Lower>().solve(tmp.transpose()).transpose();

  Eigen::EigenSolver<Eigen::MatrixXd> es(S, false);
  if (es.info() != Eigen::Success) throw EigenFailureError("nonsymmetric eigensolver did not converge");

  SpectralReport report;
  report.eigenvalues.reserve(dim);
  report.spectral_abscissa = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> lambda = es.eigenvalues()(i);
    report.eigenvalues.push_back(lambda);
    report.spectral_abscissa = std::max(report.spectral_abscissa, lambda.real());
    report.max_modulus = std::max(report.max_modulus, std::abs(lambda));
  }
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  const Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ses(sym);
  if (ses.info() != Eigen::Success) throw EigenFailureError("symmetric eigensolver did not converge");
  const Eigen::VectorXd top = ses.eigenvectors().col(dim - 1);
  const Eigen::VectorXd extremal = L.transpose().triangularView<Eigen::Upper>().solve(top);
  report.numerical_abscissa = dissipativity_ratio(op, extremal);

  Rng rng(seed);
  report.random_probe_max = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd U(dim);
  for (int p = 0; p < n_probes; ++p) {
    for (int i = 0; i < dim; ++i) U(i) = rng.normal();
    report.random_probe_max = std::max(report.random_probe_max, dissipativity_ratio(op, U));
  }
  report.dissipativity_margin = std::max(report.numerical_abscissa, report.random_probe_max);
  return report;
}

double DecayFit::predicted_time(double fraction) const {
  if (!(rate < 0)) return std::numeric_limits<double>::infinity();
  return (std::log(fraction) - intercept) / rate;
}

DecayFit fit_decay(const Trajectory& traj, const DiscreteOperator& op) {
  const std::size_t n = traj.snapshots.size();
  if (n < 10) throw DegenerateTrajectoryError("decay fit needs at least 10 snapshots");
  const double e0 = energy(op, traj.snapshots.front()).total;
  if (!(e0 > 0)) throw DegenerateTrajectoryError("initial energy is zero");

  const double t_mid = 0.5 * traj.times.back();
  double st = 0, sy = 0, stt = 0, sty = 0;
  int count = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < n; ++k) {
    if (traj.times[k] < t_mid) continue;
    const double e = energy(op, traj.snapshots[k]).total;
    if (!(e > 0)) throw DegenerateTrajectoryError("energy vanished inside the fit window");
    const double y = std::log(e / e0);
    pts.emplace_back(traj.times[k], y);
    st += traj.times[k];
    sy += y;
    stt += traj.times[k] * traj.times[k];
    sty += traj.times[k] * y;
    ++count;
  }
  if (count < 3) throw DegenerateTrajectoryError("too few points in the fit window");

  DecayFit fit;
  const double denom = count * stt - st * st;
  fit.rate = (count * sty - st * sy) / denom;
  fit.intercept = (sy - fit.rate * st) / count;
  double ssr = 0;
  for (const auto& [t, y] : pts) {
    const double r = y - (fit.intercept + fit.rate * t);
    ssr += r * r;
  }
  const double sigma2 = ssr / std::max(count - 2, 1);
  const double se = std::sqrt(sigma2 * count / denom);
  fit.rate_low = fit.rate - 2 * se;
  fit.rate_high = fit.rate + 2 * se;
  fit.t_begin = pts.front().first;
  fit.t_end = pts.back().first;
  fit.n_points = count;
  return fit;
}

BackwardTerms backward_terms(const DiscreteOperator& op, const State1D& s) {
  check_state(op, s);
  const Moduli1D& m = op.moduli;
  const double h = op.grid.spacing();
  const Eigen::VectorXd du = forward_difference(s.u, h);
  const Eigen::VectorXd dtau = forward_difference(s.tau, h);
  const Eigen::VectorXd dR = forward_difference(s.R, h);

  const double kin = m.rho * h * s.v.squaredNorm();
  const double th = m.c_cap * h * s.theta.squaredNorm();
  const double mic = m.alpha_m * h * s.M.squaredNorm();
  const double ela = m.m_uu * cell_sum(du, du, h);
  const double cpl = m.m_ur * cell_sum(du, dR, h);
  const double tg = m.K_cond * cell_sum(dtau, dtau, h);
  const double rg = m.m_rr * cell_sum(dR, dR, h);

  BackwardTerms t;
  t.E1 = 0.5 * (kin + th + mic + ela + tg + rg) + cpl;
  t.E2 = 0.5 * (kin - th - mic + ela - tg - rg);
  t.E3 = h * (m.rho * s.u.dot(s.v) - m.c_cap * s.theta.dot(s.tau) - m.alpha_m * s.M.dot(s.R)) +
         0.5 * m.H_cond * cell_sum(dtau, dtau, h) + 0.5 * m.m_rr_rate * cell_sum(dR, dR, h) +
         m.beta * h * s.tau.dot(first_difference(s.u, h));
  return t;
}

double identity_residual(const DiscreteOperator& op, const State1D& s) {
  check_state(op, s);
  const Moduli1D& m = op.moduli;
  const double h = op.grid.spacing();
  const Eigen::VectorXd du = forward_difference(s.u, h);
  const Eigen::VectorXd dtau = forward_difference(s.tau, h);
  const Eigen::VectorXd dR = forward_difference(s.R, h);
  const double lhs =
      m.m_uu * cell_sum(du, du, h) + m.c_cap * h * s.theta.squaredNorm() + m.alpha_m * h * s.M.squaredNorm();
  const double rhs =
      m.rho * h * s.v.squaredNorm() + m.K_cond * cell_sum(dtau, dtau, h) + m.m_rr * cell_sum(dR, dR, h);
  return lhs - rhs;
}

void check_backward_form(const Moduli1D& m, double eps, double lam) {
  if (!(eps > 0 && eps < 1)) throw IndefiniteFormError("eps must lie in (0, 1)");
  if (!(lam > 0)) throw IndefiniteFormError("lam must be positive");
  const double tau_coeff = lam * m.H_cond + (eps - 2) * m.K_cond;
  const double r_coeff = lam * m.m_rr_rate + (eps - 2) * m.m_rr;
  if (!(tau_coeff > 0))
    throw IndefiniteFormError("lam H + (eps - 2) K = " + std::to_string(tau_coeff) + " is not positive");
  if (!(r_coeff > 0))
    throw IndefiniteFormError("lam m_rr_rate + (eps - 2) m_rr = " + std::to_string(r_coeff) + " is not positive");
}

BackwardFunctionals backward_functionals(const Trajectory& traj, const DiscreteOperator& op, double eps,
                                         double lam) {
  check_backward_form(op.moduli, eps, lam);
  const std::size_t n = traj.snapshots.size();
  BackwardFunctionals out;
  out.eps = eps;
  out.lam = lam;
  out.times = traj.times;
  out.E1.resize(n);
  out.E2.resize(n);
  out.E3.resize(n);
  out.calE.assign(n, 0.0);
  out.calE_rate.assign(n, 0.0);
  out.identity_residual.resize(n);

  std::vector<double> integrand(n);
  for (std::size_t k = 0; k < n; ++k) {
    const BackwardTerms t = backward_terms(op, traj.snapshots[k]);
    out.E1[k] = t.E1;
    out.E2[k] = t.E2;
    out.E3[k] = t.E3;
    out.identity_residual[k] = identity_residual(op, traj.snapshots[k]);
    integrand[k] = eps * t.E1 + t.E2 + lam * t.E3;
  }
  for (std::size_t k = 1; k < n; ++k)
    out.calE[k] = out.calE[k - 1] + 0.5 * (traj.times[k] - traj.times[k - 1]) * (integrand[k] + integrand[k - 1]);

  if (n >= 2) {
    out.calE_rate[0] = (out.calE[1] - out.calE[0]) / (traj.times[1] - traj.times[0]);
    out.calE_rate[n - 1] = (out.calE[n - 1] - out.calE[n - 2]) / (traj.times[n - 1] - traj.times[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k)
      out.calE_rate[k] = (out.calE[k + 1] - out.calE[k - 1]) / (traj.times[k + 1] - traj.times[k - 1]);
  }
  for (std::size_t k = 0; k < n; ++k)
    if (out.calE[k] > kGronwallFloor) out.gronwall_K = std::max(out.gronwall_K, out.calE_rate[k] / (4 * out.calE[k]));
  return out;
}

LocalizationReport localization_probe(const DiscreteOperator& op_fwd, const DiscreteOperator& op_bwd,
                                      const InitialData& init, double dt, int n_steps) {
  if (op_fwd.direction != Direction::forward || op_bwd.direction != Direction::backward)
    throw std::invalid_argument("localization_probe expects a forward and a backward operator");
  LocalizationReport report;
  const double e0 = energy(op_fwd, init).total;
  if (e0 == 0.0) {
    report.trivial = true;
    report.positive_everywhere = false;
    report.min_energy_ratio = 0.0;
    report.round_trip_error = 0.0;
    report.round_trip_certified = op_fwd.moduli.is_type2();
    return report;
  }

  const MidpointStepper forward(op_fwd, dt);
  Eigen::VectorXd U = init.stacked();
  report.positive_everywhere = true;
  report.min_energy_ratio = 1.0;
  for (int k = 0; k < n_steps; ++k) {
    U = forward.step(U);
    const double e = 0.5 * U.dot(op_fwd.G * U);
    report.min_energy_ratio = std::min(report.min_energy_ratio, e / e0);
    if (!(e > 0)) report.positive_everywhere = false;
  }

  Eigen::VectorXd W = time_reversed(U);
  try {
    const MidpointStepper backward(op_bwd, dt);
    for (int k = 0; k < n_steps; ++k) W = backward.step(W);
    const Eigen::VectorXd recovered = time_reversed(W);
    report.round_trip_error = (recovered - init.stacked()).cwiseAbs().maxCoeff();
    if (!std::isfinite(report.round_trip_error)) report.round_trip_error = std::numeric_limits<double>::infinity();
  } catch (const SolveFailureError&) {
    report.round_trip_error = std::numeric_limits<double>::infinity();
  }
  report.round_trip_certified = op_fwd.moduli.is_type2() && report.round_trip_error <= kRoundTripTolerance;
  return report;
}

EnergyBalance energy_balance(const Trajectory& traj, const DiscreteOperator& op) {
  if (traj.snapshot_every != 1) throw std::invalid_argument("energy balance needs every step stored");
  EnergyBalance out;
  const double dt = traj.dt;
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const State1D& a = traj.snapshots[k];
    const State1D& b = traj.snapshots[k + 1];
    const double dE = energy(op, b).total - energy(op, a).total;
    const State1D mid = State1D::from_stacked(0.5 * (a.stacked() + b.stacked()));
    const double d_mid = dissipation_rate(op, mid);
    const double d_trap = 0.5 * (dissipation_rate(op, a) + dissipation_rate(op, b));
    out.max_midpoint_residual = std::max(out.max_midpoint_residual, std::abs(dE + dt * d_mid));
    out.max_trapezoid_residual = std::max(out.max_trapezoid_residual, std::abs(dE + dt * d_trap));
  }
  return out;
}

}  // namespace microtherm
