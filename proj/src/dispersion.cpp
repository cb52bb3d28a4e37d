#include "microtherm/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "microtherm/error.hpp"

namespace microtherm {

namespace {

constexpr double kResidualTolerance = 1e-8;
constexpr double kJumpGuard = 0.1;

using Quadratic = std::array<Complex, 3>;

Quadratic entry(const QuadraticPencil& p, int i, int j) { return {p.C0(i, j), p.C1(i, j), p.C2(i, j)}; }

template <std::size_t N, std::size_t M>
std::array<Complex, N + M - 1> multiply(const std::array<Complex, N>& a, const std::array<Complex, M>& b) {
  std::array<Complex, N + M - 1> out{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < M; ++j) out[i + j] += a[i] * b[j];
  return out;
}

template <std::size_t N>
std::array<Complex, N> subtract(const std::array<Complex, N>& a, const std::array<Complex, N>& b) {
  std::array<Complex, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = a[i] - b[i];
  return out;
}

double residual_scale(const Poly6& p, Complex omega) {
  double s = 0, w = 1;
  for (const Complex& c : p) {
    s += std::abs(c) * w;
    w *= std::abs(omega);
  }
  return s;
}

// Minimum-total-distance one-to-one assignment (6! permutations).
std::array<int, 6> best_assignment(const std::array<Complex, 6>& target, const std::array<Complex, 6>& candidates) {
  std::array<int, 6> perm{0, 1, 2, 3, 4, 5};
  std::array<int, 6> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0;
    for (int b = 0; b < 6 && cost < best_cost; ++b) cost += std::abs(target[b] - candidates[perm[b]]);
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::array<Complex, 6> sorted_roots(std::array<Complex, 6> r) {
  std::sort(r.begin(), r.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return r;
}

// p^(order)(z) by Horner on the differentiated coefficients
Complex derivative_at(const Poly6& p, int order, Complex z) {
  Complex acc = 0;
  for (int i = 6; i >= order; --i) {
    double falling = 1;
    for (int j = 0; j < order; ++j) falling *= i - j;
    acc = acc * z + falling * p[i];
  }
  return acc;
}

double scaled_residual(const Poly6& p, Complex z) {
  return std::abs(derivative_at(p, 0, z)) / residual_scale(p, z);
}

// Companion eigenvalues of an m-fold root are only accurate to eps^(1/m).
// Nearly coincident roots are refined together as a simple root of p^(m-1);
// a merge is kept only when it does not worsen the residual, otherwise the
// group is split with a tighter radius.
std::vector<std::vector<int>> group_roots(const std::array<Complex, 6>& roots, const std::vector<int>& members,
                                          double radius) {
  std::vector<int> label(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) label[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const Complex a = roots[members[i]], b = roots[members[j]];
      if (std::abs(a - b) <= radius * std::max(1.0, std::abs(a))) {
        const int from = label[j], to = label[i];
        for (int& l : label)
          if (l == from) l = to;
      }
    }
  std::vector<std::vector<int>> out;
  for (std::size_t id = 0; id < members.size(); ++id) {
    std::vector<int> g;
    for (std::size_t i = 0; i < members.size(); ++i)
      if (label[i] == static_cast<int>(id)) g.push_back(members[i]);
    if (!g.empty()) out.push_back(std::move(g));
  }
  return out;
}

bool try_merge(const Poly6& p, std::array<Complex, 6>& roots, const std::vector<int>& members) {
  const int order = static_cast<int>(members.size()) - 1;
  Complex z = 0;
  double worst = 0;
  for (int i : members) {
    z += roots[i];
    worst = std::max(worst, scaled_residual(p, roots[i]));
  }
  z /= static_cast<double>(members.size());
  for (int it = 0; it < 30; ++it) {
    const Complex d = derivative_at(p, order + 1, z);
    if (d == Complex(0.0)) break;
    const Complex step = derivative_at(p, order, z) / d;
    z -= step;
    if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(z))) break;
  }
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  if (scaled_residual(p, z) > 10 * worst + 1e-15) return false;
  for (int i : members) roots[i] = z;
  return true;
}

void polish_group(const Poly6& p, std::array<Complex, 6>& roots, const std::vector<int>& members, double radius) {
  for (const auto& g : group_roots(roots, members, radius)) {
    if (try_merge(p, roots, g) || g.size() == 1 || radius < 1e-6) continue;
    polish_group(p, roots, g, radius / 10);
  }
}

void polish_roots(const Poly6& p, std::array<Complex, 6>& roots) {
  polish_group(p, roots, {0, 1, 2, 3, 4, 5}, 1e-2);
}

}  // namespace

QuadraticPencil characteristic_matrix(const Moduli1D& m, double k) {
  if (!(k > 0)) throw std::invalid_argument("wavenumber must be positive");
  const Complex I(0.0, 1.0);
  const double k2 = k * k;
  const double w = m.varpi_plus_hbar;
  QuadraticPencil p;
  p.C0 << m.m_uu * k2, 0.0, m.m_ur * k2,
          0.0, m.K_cond * k2, 0.0,
          m.m_ur * k2, 0.0, m.m_rr * k2;
  p.C1 << 0.0, m.beta * k, 0.0,
          m.beta * k, -I * m.H_cond * k2, w * k,
          0.0, w * k, -I * m.m_rr_rate * k2;
  p.C2 << -m.rho, 0.0, 0.0,
          0.0, -m.c_cap, 0.0,
          0.0, 0.0, -m.alpha_m;
  return p;
}

Poly6 characteristic_polynomial(const QuadraticPencil& p) {
  // cofactor expansion along the first row
  auto minor = [&](int r0, int r1, int c0, int c1) {
    return subtract(multiply(entry(p, r0, c0), entry(p, r1, c1)), multiply(entry(p, r0, c1), entry(p, r1, c0)));
  };
  const auto t0 = multiply(entry(p, 0, 0), minor(1, 2, 1, 2));
  const auto t1 = multiply(entry(p, 0, 1), minor(1, 2, 0, 2));
  const auto t2 = multiply(entry(p, 0, 2), minor(1, 2, 0, 1));
  Poly6 out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = t0[i] - t1[i] + t2[i];
  return out;
}

Complex evaluate(const Poly6& p, Complex omega) {
  Complex acc = 0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * omega + p[i];
  return acc;
}

std::array<Complex, 6> polynomial_roots(const Poly6& p) {
  const Complex lead = p[6];
  if (lead == Complex(0.0)) throw RootFailureError("characteristic polynomial is not of degree 6");
  Eigen::Matrix<Complex, 6, 6> companion = Eigen::Matrix<Complex, 6, 6>::Zero();
  for (int i = 1; i < 6; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < 6; ++i) companion(i, 5) = -p[i] / lead;
  Eigen::ComplexEigenSolver<Eigen::Matrix<Complex, 6, 6>> es(companion, false);
  if (es.info() != Eigen::Success) throw RootFailureError("companion eigensolver did not converge");
  std::array<Complex, 6> roots;
  for (int i = 0; i < 6; ++i) roots[i] = es.eigenvalues()(i);
  polish_roots(p, roots);
  return roots;
}

Eigen::Matrix<Complex, 6, 6> first_order_symbol(const Moduli1D& m, double k) {
  const Complex ik(0.0, k);
  const double k2 = k * k;
  const double w = m.varpi_plus_hbar;
  Eigen::Matrix<Complex, 6, 6> S = Eigen::Matrix<Complex, 6, 6>::Zero();
  // order: u, v, tau, theta, R, M; d/dx -> ik, d2/dx2 -> -k^2
  S(0, 1) = 1.0;
  S(1, 0) = -m.m_uu * k2 / m.rho;
  S(1, 3) = -m.beta * ik / m.rho;
  S(1, 4) = -m.m_ur * k2 / m.rho;
  S(2, 3) = 1.0;
  S(3, 1) = -m.beta * ik / m.c_cap;
  S(3, 2) = -m.K_cond * k2 / m.c_cap;
  S(3, 3) = -m.H_cond * k2 / m.c_cap;
  S(3, 5) = -w * ik / m.c_cap;
  S(4, 5) = 1.0;
  S(5, 0) = -m.m_ur * k2 / m.alpha_m;
  S(5, 3) = -w * ik / m.alpha_m;
  S(5, 4) = -m.m_rr * k2 / m.alpha_m;
  S(5, 5) = -m.m_rr_rate * k2 / m.alpha_m;
  return S;
}

std::array<Complex, 6> symbol_roots(const Moduli1D& m, double k) {
  Eigen::ComplexEigenSolver<Eigen::Matrix<Complex, 6, 6>> es(first_order_symbol(m, k), false);
  if (es.info() != Eigen::Success) throw RootFailureError("symbol eigensolver did not converge");
  std::array<Complex, 6> roots;
  const Complex I(0.0, 1.0);
  // exp(mu t) = exp(-i omega t)  =>  omega = i mu
  for (int i = 0; i < 6; ++i) roots[i] = I * es.eigenvalues()(i);
  return roots;
}

double root_set_distance(const std::array<Complex, 6>& a, const std::array<Complex, 6>& b) {
  const auto perm = best_assignment(a, b);
  double worst = 0;
  for (int i = 0; i < 6; ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]) / std::max(1.0, std::abs(a[i])));
  return worst;
}

int threads_from_environment() {
  const char* env = std::getenv("MICROTHERM_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || v < 1) return 1;
  return static_cast<int>(std::min<long>(v, 256));
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

DispersionResult solve_branches(const Moduli1D& m, const std::vector<double>& k_grid, int threads) {
  if (k_grid.empty()) throw std::invalid_argument("empty wavenumber grid");
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (!(k_grid[i] > 0)) throw std::invalid_argument("wavenumbers must be positive");
    if (i > 0 && !(k_grid[i] > k_grid[i - 1])) throw std::invalid_argument("wavenumbers must be strictly increasing");
  }
  if (threads <= 0) threads = threads_from_environment();

  const std::size_t nk = k_grid.size();
  std::vector<std::array<Complex, 6>> raw(nk);
  std::vector<double> residual(nk, 0.0);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Poly6 poly = characteristic_polynomial(characteristic_matrix(m, k_grid[i]));
      raw[i] = sorted_roots(polynomial_roots(poly));
      for (const Complex& r : raw[i])
        residual[i] = std::max(residual[i], std::abs(evaluate(poly, r)) / residual_scale(poly, r));
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), nk);
  if (workers <= 1) {
    work(0, nk);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (nk + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk, e = std::min(nk, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& t : pool) t.join();
  }

  DispersionResult out;
  out.k = k_grid;
  for (std::size_t i = 0; i < nk; ++i) {
    out.max_residual = std::max(out.max_residual, residual[i]);
    if (!(residual[i] <= kResidualTolerance))
      throw RootFailureError("dispersion root residual " + std::to_string(residual[i]) + " at k = " +
                             std::to_string(k_grid[i]));
  }

  out.branches.resize(nk);
  out.branches[0] = raw[0];
  for (std::size_t i = 1; i < nk; ++i) {
    std::array<Complex, 6> predicted = out.branches[i - 1];
    if (i >= 2) {
      const double ratio = (k_grid[i] - k_grid[i - 1]) / (k_grid[i - 1] - k_grid[i - 2]);
      for (int b = 0; b < 6; ++b) predicted[b] += ratio * (out.branches[i - 1][b] - out.branches[i - 2][b]);
    }
    const auto perm = best_assignment(predicted, raw[i]);
    double spacing = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 6; ++a)
      for (int b = a + 1; b < 6; ++b) spacing = std::min(spacing, std::abs(predicted[a] - predicted[b]));
    bool ambiguous = false;
    for (int b = 0; b < 6; ++b) {
      out.branches[i][b] = raw[i][perm[b]];
      if (std::abs(out.branches[i][b] - predicted[b]) > kJumpGuard * spacing) ambiguous = true;
    }
    if (ambiguous) out.crossings.push_back(i);
  }

  out.phase_speeds.resize(nk);
  for (std::size_t i = 0; i < nk; ++i)
    for (int b = 0; b < 6; ++b) {
      out.phase_speeds[i][b] = out.branches[i][b].real() / k_grid[i];
      out.max_phase_speed = std::max(out.max_phase_speed, std::abs(out.phase_speeds[i][b]));
    }
  if (nk >= 2) {
    for (int b = 0; b < 6; ++b)
      for (std::size_t i = 0; i < nk; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == nk ? i : i + 1;
        const double slope = (out.branches[hi][b].real() - out.branches[lo][b].real()) / (k_grid[hi] - k_grid[lo]);
        out.max_group_speed = std::max(out.max_group_speed, std::abs(slope));
      }
  }
  return out;
}

}  // namespace microtherm
