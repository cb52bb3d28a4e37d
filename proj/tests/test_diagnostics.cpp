#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "microtherm/diagnostics.hpp"
#include "microtherm/error.hpp"
#include "microtherm/random.hpp"

using namespace microtherm;
using std::numbers::pi;

namespace {

Moduli1D reference_moduli() { return to_moduli_1d(MaterialIsotropic::reference()); }
Moduli1D type2_moduli() { return to_moduli_1d(MaterialIsotropic::reference().as_type2()); }

State1D random_state(Rng& rng, int n) {
  State1D s = State1D::zeros(n);
  for (Field f : kAllFields)
    for (int j = 0; j < n; ++j) s.field(f)(j) = rng.normal();
  return s;
}

State1D sine_u(const Grid1D& g) {
  State1D s = State1D::zeros(g.n_interior());
  s.u = (pi * g.nodes().array()).sin();
  return s;
}

MaterialIsotropic random_material(Rng& rng, bool type2) {
  MaterialIsotropic m;
  m.rho = rng.uniform(0.5, 2.0);
  m.lambda_e = rng.uniform(0.0, 2.0);
  m.mu_e = rng.uniform(0.2, 2.0);
  m.beta = rng.uniform(-1.5, 1.5);
  m.c_cap = rng.uniform(0.5, 2.0);
  m.alpha_m = rng.uniform(0.5, 2.0);
  m.gamma1 = rng.uniform(-0.3, 0.3);
  m.gamma2 = rng.uniform(-0.3, 0.3);
  m.K_cond = rng.uniform(0.2, 2.0);
  m.H_cond = rng.uniform(0.05, 2.0);
  m.varpi = rng.uniform(-0.5, 0.5);
  m.hbar_c = rng.uniform(-0.5, 0.5);
  m.eta1 = rng.uniform(0.3, 1.0);
  m.eta2 = rng.uniform(0.3, 1.0);
  m.eta3 = rng.uniform(0.3, 1.0);
  m.rho1 = rng.uniform(0.0, 1.0);
  m.rho2 = rng.uniform(0.05, 1.0);
  m.rho3 = rng.uniform(-m.rho2, m.rho2);
  return type2 ? m.as_type2() : m;
}

// independent evaluation of H (theta')^2 + m_rr_rate (M')^2 by the trapezoid-free midpoint rule
double dissipation_oracle(const Moduli1D& m, const State1D& s, double h) {
  const int n = s.size();
  double sum = 0;
  for (int j = 0; j <= n; ++j) {
    const double tl = j > 0 ? s.theta(j - 1) : 0.0, tr = j < n ? s.theta(j) : 0.0;
    const double ml = j > 0 ? s.M(j - 1) : 0.0, mr = j < n ? s.M(j) : 0.0;
    sum += h * (m.H_cond * std::pow((tr - tl) / h, 2) + m.m_rr_rate * std::pow((mr - ml) / h, 2));
  }
  return sum;
}

}  // namespace

TEST_CASE("energy quadratures") {
  const Grid1D g(12);
  const Moduli1D m = reference_moduli();
  const DiscreteOperator op = assemble_operator(g, m);
  const EnergyBreakdown z = energy(op, State1D::zeros(12));
  CHECK(z.total == 0.0);
  CHECK(z.sum_of_terms() == 0.0);
  CHECK(z.dissipation_rate == 0.0);

  State1D s = State1D::zeros(12);
  s.theta(5) = 1.0;
  CHECK(energy(op, s).total == doctest::Approx(m.c_cap * g.spacing() / 2).epsilon(1e-15));
  CHECK_THROWS_AS(energy(op, State1D::zeros(11)), DimensionMismatchError);

  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const State1D r = random_state(rng, 12);
    const EnergyBreakdown e = energy(op, r);
    const Eigen::VectorXd U = r.stacked();
    CHECK(std::abs(e.total - e.sum_of_terms()) <= 1e-14 * e.total);
    CHECK(e.total == doctest::Approx(0.5 * U.dot(op.G * U)).epsilon(1e-14));
    CHECK(e.total == doctest::Approx(0.5 * std::pow(gram_norm(op, r), 2)).epsilon(1e-14));
    CHECK(e.total >= 0);
  }
}

TEST_CASE("elastic energy of sin(pi x) tends to m_uu pi^2 / 4") {
  const Moduli1D m = reference_moduli();
  CHECK(m.m_uu * pi * pi / 4 == doctest::Approx(7.402203).epsilon(1e-7));
  double prev = 0;
  for (int n : {32, 64, 128}) {
    const Grid1D g(n);
    const EnergyBreakdown e = energy(assemble_operator(g, m), sine_u(g));
    CHECK(e.total == e.elastic);
    const double err = std::abs(e.elastic - m.m_uu * pi * pi / 4);
    if (prev > 0) CHECK(std::log2(prev / err) > 1.9);
    prev = err;
  }
}

TEST_CASE("dissipation rate") {
  const Grid1D g(16);
  const DiscreteOperator op3 = assemble_operator(g, reference_moduli());
  const DiscreteOperator op2 = assemble_operator(g, type2_moduli());
  CHECK(dissipation_rate(op3, State1D::zeros(16)) == 0.0);
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) CHECK(dissipation_rate(op2, random_state(rng, 16)) == 0.0);

  // theta = sin(pi x) with H = 1 and no microthermal dissipation -> pi^2 / 2
  MaterialIsotropic mat = MaterialIsotropic::reference();
  mat.rho1 = mat.rho2 = mat.rho3 = 0;
  double prev = 0;
  for (int n : {32, 64, 128}) {
    const Grid1D gn(n);
    State1D s = State1D::zeros(n);
    s.theta = (pi * gn.nodes().array()).sin();
    const double d = dissipation_rate(assemble_operator(gn, to_moduli_1d(mat)), s);
    const double err = std::abs(d - pi * pi / 2);
    if (prev > 0) CHECK(std::log2(prev / err) > 1.9);
    prev = err;
  }
  CHECK(prev <= 1e-3);
}

TEST_CASE("dissipation identity and dissipativity over random materials") {
  Rng rng(1234);
  int states = 0;
  for (int mat = 0; mat < 12; ++mat) {
    const bool type2 = mat % 4 == 3;
    const MaterialIsotropic m = random_material(rng, type2);
    REQUIRE(validate_isotropic(m).valid());
    const Moduli1D mod = to_moduli_1d(m);
    const int n = 8 + mat;
    const Grid1D g(n);
    const DiscreteOperator op = assemble_operator(g, mod);
    for (int k = 0; k < 100; ++k, ++states) {
      const State1D s = random_state(rng, n);
      const Eigen::VectorXd U = s.stacked();
      const double norm2 = U.dot(op.G * U);
      const double q = U.dot(op.G * (op.A * U));
      const double oracle = dissipation_oracle(mod, s, g.spacing());
      CHECK(q <= 1e-12 * norm2);
      if (type2) {
        CHECK(std::abs(q) <= 1e-12 * norm2);
      } else {
        CHECK(std::abs(-q - oracle) <= 1e-10 * oracle);
        CHECK(dissipation_rate(op, s) == doctest::Approx(oracle).epsilon(1e-12));
      }
    }
  }
  CHECK(states >= 1000);
}

TEST_CASE("spectral reports") {
  const Grid1D g(16);
  SUBCASE("type III: strictly negative abscissa below the dissipativity margin") {
    const SpectralReport r = spectral_report(assemble_operator(g, reference_moduli()), 100);
    CHECK(r.eigenvalues.size() == 96);
    CHECK(r.spectral_abscissa < 0);
    CHECK(r.spectral_abscissa <= r.dissipativity_margin + 1e-12);
    CHECK(r.dissipativity_margin <= 1e-12);
    CHECK(r.random_probe_max <= r.dissipativity_margin);
  }
  SUBCASE("type II: spectrum on the imaginary axis") {
    const SpectralReport r = spectral_report(assemble_operator(g, type2_moduli()), 100);
    for (const auto& z : r.eigenvalues) CHECK(std::abs(z.real()) <= 1e-10 * r.max_modulus);
  }
  SUBCASE("decoupled elastic block matches the discrete Dirichlet spectrum") {
    MaterialIsotropic mat = MaterialIsotropic::reference().as_type2();
    mat.beta = mat.gamma1 = mat.gamma2 = mat.varpi = mat.hbar_c = 0;
    const Moduli1D m = to_moduli_1d(mat);
    const SpectralReport r = spectral_report(assemble_operator(g, m), 10);
    const double h = g.spacing();
    for (int k = 1; k <= 16; ++k) {
      const double lam_h = 4 / (h * h) * std::pow(std::sin(k * pi * h / 2), 2);
      const double w = std::sqrt(m.m_uu / m.rho * lam_h);
      for (double sign : {1.0, -1.0}) {
        double best = 1e300;
        for (const auto& z : r.eigenvalues) best = std::min(best, std::abs(z - std::complex<double>(0, sign * w)));
        CHECK(best <= 1e-10 * std::max(1.0, w));
      }
    }
  }
  CHECK_THROWS_AS(spectral_report(assemble_operator(Grid1D(501), reference_moduli()), 1), SizeLimitError);
}

TEST_CASE("decay fits") {
  const Grid1D g(16);
  const State1D init = sine_u(g);
  {
    const DiscreteOperator op = assemble_operator(g, type2_moduli());
    const DecayFit f = fit_decay(run_forward(op, init, 1e-2, 500, 5), op);
    CHECK(std::abs(f.rate) <= 1e-8);
  }
  {
    const DiscreteOperator op = assemble_operator(g, reference_moduli());
    const Trajectory t = run_forward(op, init, 1e-2, 1000, 10);
    const DecayFit f = fit_decay(t, op);
    CHECK(f.rate < 0);
    CHECK(f.rate_low <= f.rate);
    CHECK(f.rate <= f.rate_high);
    CHECK(f.t_begin >= 5.0 - 1e-12);
    CHECK(f.t_end == doctest::Approx(10.0));
    CHECK(f.predicted_time(std::exp(f.intercept + f.rate * 7.0)) == doctest::Approx(7.0));
    CHECK_THROWS_AS(fit_decay(run_forward(op, State1D::zeros(16), 1e-2, 20), op), DegenerateTrajectoryError);
    CHECK_THROWS_AS(fit_decay(run_forward(op, init, 1e-2, 5), op), DegenerateTrajectoryError);
  }
}

TEST_CASE("backward functionals") {
  const Grid1D g(16);
  const Moduli1D m = reference_moduli();
  const DiscreteOperator bwd = assemble_backward(g, m);

  SUBCASE("null data") {
    const BackwardFunctionals bf = backward_functionals(run_forward(bwd, State1D::zeros(16), 1e-4, 10), bwd);
    for (std::size_t k = 0; k < bf.times.size(); ++k) {
      CHECK(bf.E1[k] == 0.0);
      CHECK(bf.E2[k] == 0.0);
      CHECK(bf.E3[k] == 0.0);
      CHECK(bf.calE[k] == 0.0);
      CHECK(bf.identity_residual[k] == 0.0);
    }
    CHECK(bf.gronwall_K == 0.0);
  }
  SUBCASE("E1 is the energy and recombines with E2") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
      const State1D s = random_state(rng, 16);
      const BackwardTerms t = backward_terms(bwd, s);
      const EnergyBreakdown e = energy(bwd, s);
      CHECK(t.E1 == doctest::Approx(e.total).epsilon(1e-14));
      const double rest = 2 * (e.thermal + e.microthermal + e.tau_gradient + e.R_gradient) + e.coupling;
      CHECK(std::abs(t.E1 - (t.E2 + rest)) <= 1e-14 * (std::abs(t.E1) + std::abs(rest)));
    }
  }
  SUBCASE("small data: positive calE with a finite Gronwall constant") {
    const State1D init = sine_u(g);
    const Trajectory t = run_forward(bwd, init, 1e-4, 100);
    const BackwardFunctionals bf = backward_functionals(t, bwd, kDefaultEps, kDefaultLam);
    CHECK(bf.calE[0] == 0.0);
    for (std::size_t k = 1; k < bf.calE.size(); ++k) {
      CHECK(bf.calE[k] > 0);
      CHECK(bf.calE[k] <= bf.calE[1] * std::exp(4 * bf.gronwall_K * (bf.times[k] - bf.times[1])) * (1 + 1e-12));
    }
    CHECK(std::isfinite(bf.gronwall_K));
    CHECK(bf.gronwall_K > 0);
  }
  SUBCASE("indefinite parameter choices") {
    CHECK_NOTHROW(check_backward_form(m, 0.5, 2.0));
    CHECK_THROWS_AS(check_backward_form(m, 0.5, 0.1), IndefiniteFormError);
    CHECK_THROWS_AS(check_backward_form(m, 0.0, 2.0), IndefiniteFormError);
    CHECK_THROWS_AS(check_backward_form(m, 1.0, 2.0), IndefiniteFormError);
    CHECK_THROWS_AS(check_backward_form(m, 0.5, -1.0), IndefiniteFormError);
    CHECK_THROWS_AS(check_backward_form(type2_moduli(), 0.5, 2.0), IndefiniteFormError);
    const Trajectory t = run_forward(bwd, sine_u(g), 1e-4, 3);
    CHECK_THROWS_AS(backward_functionals(t, bwd, 0.5, 0.1), IndefiniteFormError);
  }
}

TEST_CASE("localization probe") {
  const Grid1D g(16);
  SUBCASE("type II round trip") {
    const Moduli1D m = type2_moduli();
    const LocalizationReport r =
        localization_probe(assemble_operator(g, m), assemble_backward(g, m), sine_u(g), 1e-2, 1000);
    CHECK_FALSE(r.trivial);
    CHECK(r.positive_everywhere);
    CHECK(r.round_trip_error <= 1e-8);
    CHECK(r.round_trip_certified);
  }
  SUBCASE("type III keeps positive energy") {
    const Moduli1D m = reference_moduli();
    const LocalizationReport r =
        localization_probe(assemble_operator(g, m), assemble_backward(g, m), sine_u(g), 1e-2, 500);
    CHECK(r.positive_everywhere);
    CHECK(r.min_energy_ratio > 0);
    CHECK(r.min_energy_ratio < 1);
    CHECK_FALSE(r.round_trip_certified);
  }
  SUBCASE("zero data is the trivial case") {
    const Moduli1D m = reference_moduli();
    const LocalizationReport r =
        localization_probe(assemble_operator(g, m), assemble_backward(g, m), State1D::zeros(16), 1e-2, 10);
    CHECK(r.trivial);
  }
  SUBCASE("operators must be in the right order") {
    const Moduli1D m = reference_moduli();
    CHECK_THROWS_AS(localization_probe(assemble_backward(g, m), assemble_operator(g, m), sine_u(g), 1e-2, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("energy balance: exact at the midpoint state, third order with averaged dissipation") {
  const Grid1D g(16);
  const DiscreteOperator op = assemble_operator(g, reference_moduli());
  State1D init = sine_u(g);
  init.theta = (2 * pi * g.nodes().array()).sin();
  init.M = 0.5 * (pi * g.nodes().array()).sin();
  const double e0 = energy(op, init).total;
  std::vector<double> c;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    const Trajectory t = run_forward(op, init, dt, static_cast<int>(std::lround(0.2 / dt)));
    const EnergyBalance b = energy_balance(t, op);
    CHECK(b.max_midpoint_residual <= 1e-13 * e0);
    c.push_back(b.max_trapezoid_residual / (dt * dt * dt));
  }
  CHECK(c[1] / c[0] == doctest::Approx(1.0).epsilon(0.5));
  CHECK(c[2] / c[1] == doctest::Approx(1.0).epsilon(0.5));
  CHECK_THROWS_AS(energy_balance(run_forward(op, init, 1e-3, 10, 2), op), std::invalid_argument);
}
