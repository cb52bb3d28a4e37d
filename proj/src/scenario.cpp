#include "microtherm/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "microtherm/diagnostics.hpp"
#include "microtherm/dispersion.hpp"
#include "microtherm/error.hpp"
#include "microtherm/evolve.hpp"
#include "microtherm/random.hpp"

namespace microtherm {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

const std::set<std::string> kRequiredSections{"material", "grid", "time", "init", "tasks"};
const std::set<std::string> kOptionalSections{"spectral", "dispersion", "backward", "localization"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const Entry& e, std::string_view key) {
  const std::string_view s = trim(e.value);
  double x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError("expected a number for '" + std::string(key) + "', got '" + std::string(s) + "'", e.line);
  if (!std::isfinite(x)) throw ParseError("non-finite value for '" + std::string(key) + "'", e.line);
  return x;
}

long long parse_integer(const Entry& e, std::string_view key) {
  const std::string_view s = trim(e.value);
  long long x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError("expected an integer for '" + std::string(key) + "', got '" + std::string(s) + "'", e.line);
  return x;
}

std::optional<Field> field_from_name(std::string_view s) {
  if (s == "u") return Field::u;
  if (s == "v") return Field::v;
  if (s == "tau") return Field::tau;
  if (s == "theta") return Field::theta;
  if (s == "R") return Field::R;
  if (s == "M") return Field::M;
  return std::nullopt;
}

const char* field_name(Field f) {
  switch (f) {
    case Field::u: return "u";
    case Field::v: return "v";
    case Field::tau: return "tau";
    case Field::theta: return "theta";
    case Field::R: return "R";
    case Field::M: return "M";
  }
  return "?";
}

std::map<std::string, Section> tokenize(std::string_view text) {
  std::map<std::string, Section> sections;
  Section* current = nullptr;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (!kRequiredSections.count(name) && !kOptionalSections.count(name))
        throw ParseError("unknown section [" + name + "]", line_no);
      if (sections.count(name)) throw ParseError("duplicate section [" + name + "]", line_no);
      current = &sections[name];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    if (current == nullptr) throw ParseError("key outside of any section", line_no);
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (current->count(key)) throw ParseError("duplicate key '" + key + "'", line_no);
    (*current)[key] = Entry{std::string(trim(line.substr(eq + 1))), line_no};
  }
  return sections;
}

void reject_unknown(const Section& sec, const std::set<std::string>& allowed, const std::string& section_name) {
  for (const auto& [key, entry] : sec)
    if (!allowed.count(key)) throw ParseError("unknown key '" + key + "' in [" + section_name + "]", entry.line);
}

void parse_material(const Section& sec, Scenario& s) {
  std::map<std::string, double MaterialIsotropic::*> fields{
      {"rho", &MaterialIsotropic::rho},         {"lambda_e", &MaterialIsotropic::lambda_e},
      {"mu_e", &MaterialIsotropic::mu_e},       {"beta", &MaterialIsotropic::beta},
      {"c_cap", &MaterialIsotropic::c_cap},     {"alpha_m", &MaterialIsotropic::alpha_m},
      {"gamma1", &MaterialIsotropic::gamma1},   {"gamma2", &MaterialIsotropic::gamma2},
      {"K_cond", &MaterialIsotropic::K_cond},   {"H_cond", &MaterialIsotropic::H_cond},
      {"varpi", &MaterialIsotropic::varpi},     {"hbar_c", &MaterialIsotropic::hbar_c},
      {"eta1", &MaterialIsotropic::eta1},       {"eta2", &MaterialIsotropic::eta2},
      {"eta3", &MaterialIsotropic::eta3},       {"rho1", &MaterialIsotropic::rho1},
      {"rho2", &MaterialIsotropic::rho2},       {"rho3", &MaterialIsotropic::rho3}};
  std::set<std::string> allowed{"model"};
  for (const auto& [k, _] : fields) allowed.insert(k);
  reject_unknown(sec, allowed, "material");

  if (auto it = sec.find("model"); it != sec.end()) {
    if (it->second.value == "type2") s.model = Model::type2;
    else if (it->second.value == "type3") s.model = Model::type3;
    else throw ParseError("model must be type2 or type3, got '" + it->second.value + "'", it->second.line);
  }

  s.material = MaterialIsotropic::reference();
  if (s.model == Model::type2) s.material = s.material.as_type2();
  for (const auto& [key, member] : fields)
    if (auto it = sec.find(key); it != sec.end()) s.material.*member = parse_double(it->second, key);

  if (s.model == Model::type2) {
    if (s.material.H_cond != 0.0) throw ValidationError("type II requires H=0 (got H_cond = " + format_double(s.material.H_cond) + ")");
    if (s.material.rho1 != 0.0 || s.material.rho2 != 0.0 || s.material.rho3 != 0.0)
      throw ValidationError("type II requires rho1=rho2=rho3=0");
  }
  const ValidationReport report = validate_isotropic(s.material);
  if (!report.valid()) throw ValidationError("invalid material: " + report.to_string());
}

void parse_grid(const Section& sec, Scenario& s) {
  reject_unknown(sec, {"n_interior", "length"}, "grid");
  if (auto it = sec.find("n_interior"); it != sec.end()) {
    const long long n = parse_integer(it->second, "n_interior");
    if (n < 2 || n > 100000) throw ValidationError("n_interior must lie in [2, 100000]");
    s.n_interior = static_cast<int>(n);
  }
  if (auto it = sec.find("length"); it != sec.end()) {
    s.length = parse_double(it->second, "length");
    if (!(s.length > 0)) throw ValidationError("length must be positive");
  }
}

void parse_time(const Section& sec, Scenario& s) {
  reject_unknown(sec, {"dt", "n_steps", "snapshot_every"}, "time");
  if (auto it = sec.find("dt"); it != sec.end()) s.dt = parse_double(it->second, "dt");
  if (auto it = sec.find("n_steps"); it != sec.end()) {
    const long long n = parse_integer(it->second, "n_steps");
    if (n < 0 || n > std::numeric_limits<int>::max()) throw ValidationError("n_steps out of range");
    s.n_steps = static_cast<int>(n);
  }
  if (auto it = sec.find("snapshot_every"); it != sec.end()) {
    const long long n = parse_integer(it->second, "snapshot_every");
    if (n < 1 || n > std::numeric_limits<int>::max()) throw ValidationError("snapshot_every must be >= 1");
    s.snapshot_every = static_cast<int>(n);
  }
  if (!(s.dt > 0)) throw ValidationError("dt must be positive");
}

void parse_init(const Section& sec, Scenario& s) {
  InitSpec& init = s.init;
  std::string preset = "sine";
  if (auto it = sec.find("preset"); it != sec.end()) preset = it->second.value;

  std::set<std::string> allowed{"preset", "amplitude", "seed"};
  if (preset == "sine") {
    init.preset = InitSpec::Preset::sine;
    for (Field f : kAllFields) allowed.insert(std::string(field_name(f)) + "_mode");
  } else if (preset == "impulse") {
    init.preset = InitSpec::Preset::impulse;
    allowed.insert({"field", "node"});
  } else if (preset == "random") {
    init.preset = InitSpec::Preset::random;
  } else if (preset == "inline") {
    init.preset = InitSpec::Preset::inline_values;
    for (Field f : kAllFields) allowed.insert(field_name(f));
  } else {
    throw ParseError("unknown init preset '" + preset + "'", sec.at("preset").line);
  }
  reject_unknown(sec, allowed, "init");

  if (auto it = sec.find("amplitude"); it != sec.end()) init.amplitude = parse_double(it->second, "amplitude");
  if (auto it = sec.find("seed"); it != sec.end()) {
    const long long v = parse_integer(it->second, "seed");
    if (v < 0) throw ValidationError("seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(v);
  }

  if (init.preset == InitSpec::Preset::sine) {
    bool any = false;
    for (Field f : kAllFields) {
      const std::string key = std::string(field_name(f)) + "_mode";
      if (auto it = sec.find(key); it != sec.end()) {
        if (!any) init.modes.clear();
        any = true;
        const long long m = parse_integer(it->second, key);
        if (m < 0) throw ValidationError(key + " must be non-negative");
        if (m > 0) init.modes[f] = static_cast<int>(m);
      }
    }
  } else if (init.preset == InitSpec::Preset::impulse) {
    if (auto it = sec.find("field"); it != sec.end()) {
      const auto f = field_from_name(it->second.value);
      if (!f) throw ParseError("unknown field '" + it->second.value + "'", it->second.line);
      init.impulse_field = *f;
    }
    if (auto it = sec.find("node"); it != sec.end()) {
      const long long node = parse_integer(it->second, "node");
      if (node < 1 || node > s.n_interior) throw ValidationError("impulse node must lie in [1, n_interior]");
      init.impulse_node = static_cast<int>(node);
    }
  } else if (init.preset == InitSpec::Preset::inline_values) {
    for (Field f : kAllFields) {
      auto it = sec.find(field_name(f));
      if (it == sec.end()) continue;
      std::vector<double> vals;
      for (const auto& piece : split_list(it->second.value))
        vals.push_back(parse_double(Entry{piece, it->second.line}, field_name(f)));
      if (static_cast<int>(vals.size()) != s.n_interior)
        throw ValidationError(std::string("inline field ") + field_name(f) + " has " + std::to_string(vals.size()) +
                              " values, expected n_interior = " + std::to_string(s.n_interior));
      init.values[f] = std::move(vals);
    }
  }
}

void parse_tasks(const Section& sec, Scenario& s) {
  reject_unknown(sec, {"enabled", "output_dir"}, "tasks");
  if (auto it = sec.find("enabled"); it != sec.end()) {
    for (const auto& name : split_list(it->second.value)) {
      Task t;
      if (name == "simulate") t = Task::simulate;
      else if (name == "spectral") t = Task::spectral;
      else if (name == "dispersion") t = Task::dispersion;
      else if (name == "backward") t = Task::backward;
      else if (name == "localization") t = Task::localization;
      else throw ParseError("unknown task '" + name + "'", it->second.line);
      if (!s.has_task(t)) s.tasks.push_back(t);
    }
  }
  if (auto it = sec.find("output_dir"); it != sec.end()) {
    if (it->second.value.empty()) throw ValidationError("output_dir must not be empty");
    s.output_dir = it->second.value;
  }
}

void parse_optional(const std::map<std::string, Section>& sections, Scenario& s) {
  if (auto it = sections.find("spectral"); it != sections.end()) {
    reject_unknown(it->second, {"n_probes"}, "spectral");
    if (auto e = it->second.find("n_probes"); e != it->second.end()) {
      const long long n = parse_integer(e->second, "n_probes");
      if (n < 0 || n > 1000000) throw ValidationError("n_probes out of range");
      s.spectral_probes = static_cast<int>(n);
    }
  }
  if (auto it = sections.find("dispersion"); it != sections.end()) {
    reject_unknown(it->second, {"k_min", "k_max", "n_k"}, "dispersion");
    if (auto e = it->second.find("k_min"); e != it->second.end()) s.k_min = parse_double(e->second, "k_min");
    if (auto e = it->second.find("k_max"); e != it->second.end()) s.k_max = parse_double(e->second, "k_max");
    if (auto e = it->second.find("n_k"); e != it->second.end()) {
      const long long n = parse_integer(e->second, "n_k");
      if (n < 2 || n > 1000000) throw ValidationError("n_k must lie in [2, 1000000]");
      s.n_k = static_cast<int>(n);
    }
    if (!(s.k_min > 0 && s.k_max > s.k_min)) throw ValidationError("dispersion needs 0 < k_min < k_max");
  }
  if (auto it = sections.find("backward"); it != sections.end()) {
    reject_unknown(it->second, {"dt", "n_steps", "eps", "lam"}, "backward");
    if (auto e = it->second.find("dt"); e != it->second.end()) s.backward_dt = parse_double(e->second, "dt");
    if (auto e = it->second.find("n_steps"); e != it->second.end()) {
      const long long n = parse_integer(e->second, "n_steps");
      if (n < 1 || n > std::numeric_limits<int>::max()) throw ValidationError("backward n_steps must be >= 1");
      s.backward_steps = static_cast<int>(n);
    }
    if (auto e = it->second.find("eps"); e != it->second.end()) s.eps = parse_double(e->second, "eps");
    if (auto e = it->second.find("lam"); e != it->second.end()) s.lam = parse_double(e->second, "lam");
    if (!(s.backward_dt > 0)) throw ValidationError("backward dt must be positive");
  }
  if (auto it = sections.find("localization"); it != sections.end()) {
    reject_unknown(it->second, {"dt", "n_steps"}, "localization");
    if (auto e = it->second.find("dt"); e != it->second.end()) {
      s.localization_dt = parse_double(e->second, "dt");
      if (!(*s.localization_dt > 0)) throw ValidationError("localization dt must be positive");
    }
    if (auto e = it->second.find("n_steps"); e != it->second.end()) {
      const long long n = parse_integer(e->second, "n_steps");
      if (n < 0 || n > std::numeric_limits<int>::max()) throw ValidationError("localization n_steps out of range");
      s.localization_steps = static_cast<int>(n);
    }
  }
}

// ---- running ---------------------------------------------------------------

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
    out_ << header << '\n';
  }
  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format_double(v);
      first = false;
    }
    out_ << '\n';
  }
  std::ofstream& stream() { return out_; }
  ~CsvWriter() = default;
  void close() {
    out_.close();
    if (!out_) throw IoError("failed writing " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

struct Runner {
  const Scenario& s;
  Grid1D grid;
  Moduli1D moduli;
  State1D init;
  RunOutcome outcome;

  void certify(const std::string& name, bool pass, const std::string& detail) {
    outcome.certificates.push_back({name, pass, detail});
  }
  void note(const std::string& text) { outcome.notes.push_back(text); }

  bool strict_type3() const { return s.model == Model::type3 && moduli.H_cond > 0 && moduli.m_rr_rate > 0; }

  void simulate() {
    const DiscreteOperator op = assemble_operator(grid, moduli);
    const Trajectory traj = run_forward(op, init, s.dt, s.n_steps, s.snapshot_every);
    CsvWriter csv(s.output_dir / "energy.csv",
                  "t,total,kinetic,thermal,microthermal,elastic,coupling,tau_gradient,R_gradient,dissipation_rate");
    std::vector<double> totals;
    totals.reserve(traj.snapshots.size());
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      const EnergyBreakdown e = energy(op, traj.snapshots[k]);
      totals.push_back(e.total);
      csv.row({traj.times[k], e.total, e.kinetic, e.thermal, e.microthermal, e.elastic, e.coupling, e.tau_gradient,
               e.R_gradient, e.dissipation_rate});
    }
    csv.close();

    const double e0 = totals.front();
    if (e0 == 0.0) {
      note("simulate: zero initial energy, trivial solution");
      return;
    }
    if (s.model == Model::type2) {
      double drift = 0;
      for (double e : totals) drift = std::max(drift, std::abs(e - e0) / e0);
      certify("energy_conservation", drift <= 1e-10, "max_relative_drift=" + format_double(drift));
    } else {
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k + 1 < totals.size(); ++k) worst = std::max(worst, (totals[k + 1] - totals[k]) / e0);
      if (totals.size() < 2) worst = 0;
      certify("energy_monotone", worst <= 1e-12, "max_relative_increase=" + format_double(worst));
    }
    note("final_energy_ratio=" + format_double(totals.back() / e0));
    if (traj.snapshots.size() >= 10) {
      try {
        const DecayFit fit = fit_decay(traj, op);
        note("decay_rate=" + format_double(fit.rate) + " window=[" + format_double(fit.rate_low) + ", " +
             format_double(fit.rate_high) + "] (measured, log E slope on t in [" + format_double(fit.t_begin) +
             ", " + format_double(fit.t_end) + "])");
      } catch (const DegenerateTrajectoryError& e) {
        note(std::string("decay_rate: not measured (") + e.what() + ")");
      }
    }
  }

  void spectral() {
    const DiscreteOperator op = assemble_operator(grid, moduli);
    const SpectralReport rep = spectral_report(op, s.spectral_probes, s.seed);
    CsvWriter csv(s.output_dir / "spectrum.csv", "re,im");
    for (const auto& z : rep.eigenvalues) csv.row({z.real(), z.imag()});
    csv.close();

    certify("dissipativity", rep.dissipativity_margin <= 1e-12,
            "margin=" + format_double(rep.dissipativity_margin) + " random_probe_max=" +
                format_double(rep.random_probe_max));
    if (s.model == Model::type2) {
      double worst = 0;
      for (const auto& z : rep.eigenvalues) worst = std::max(worst, std::abs(z.real()));
      certify("spectral_imaginary_axis", worst <= 1e-10 * rep.max_modulus,
              "max_abs_re=" + format_double(worst) + " max_modulus=" + format_double(rep.max_modulus));
    } else if (strict_type3()) {
      certify("spectral_abscissa < 0", rep.spectral_abscissa < 0,
              "spectral_abscissa=" + format_double(rep.spectral_abscissa));
    } else {
      note("spectral_abscissa=" + format_double(rep.spectral_abscissa) +
           " (not certified: decay needs H_cond > 0 and rho1+rho2+rho3 > 0)");
    }
  }

  void dispersion() {
    const std::vector<double> ks = linspace(s.k_min, s.k_max, static_cast<std::size_t>(s.n_k));
    const DispersionResult res = solve_branches(moduli, ks);
    CsvWriter csv(s.output_dir / "dispersion.csv", "k,branch_index,re_omega,im_omega,phase_speed");
    double oracle_gap = 0, worst_imag = 0, worst_growth = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ks.size(); ++i) {
      for (int b = 0; b < 6; ++b) {
        const Complex w = res.branches[i][b];
        csv.stream() << format_double(ks[i]) << ',' << b << ',' << format_double(w.real()) << ','
                     << format_double(w.imag()) << ',' << format_double(res.phase_speeds[i][b]) << '\n';
        const double scale = std::max(std::abs(w), std::numeric_limits<double>::min());
        worst_imag = std::max(worst_imag, std::abs(w.imag()) / scale);
        worst_growth = std::max(worst_growth, w.imag() / scale);
      }
      oracle_gap = std::max(oracle_gap, root_set_distance(res.branches[i], symbol_roots(moduli, ks[i])));
    }
    csv.close();
    note("dispersion convention: exp(i (k x - omega t)), decay <=> Im omega < 0");
    certify("dispersion_two_oracle", oracle_gap <= 1e-10, "max_root_set_distance=" + format_double(oracle_gap));
    certify("finite_speeds", std::isfinite(res.max_phase_speed) && std::isfinite(res.max_group_speed),
            "max_phase_speed=" + format_double(res.max_phase_speed) +
                " max_group_speed=" + format_double(res.max_group_speed));
    if (s.model == Model::type2)
      certify("dispersion_real", worst_imag <= 1e-10, "max_rel_imag=" + format_double(worst_imag));
    else
      certify("dispersion_damped", worst_growth <= 1e-10, "max_rel_im_omega=" + format_double(worst_growth));
    if (!res.crossings.empty())
      note("dispersion: " + std::to_string(res.crossings.size()) + " ambiguous continuation points flagged");
  }

  void backward() {
    try {
      check_backward_form(moduli, s.eps, s.lam);
    } catch (const IndefiniteFormError& e) {
      if (s.model == Model::type2) {
        note(std::string("backward: not applicable to type II (") + e.what() + ")");
        return;
      }
      throw;
    }
    const DiscreteOperator op = assemble_backward(grid, moduli);
    const Trajectory traj = run_forward(op, init, s.backward_dt, s.backward_steps, 1);
    const BackwardFunctionals bf = backward_functionals(traj, op, s.eps, s.lam);
    CsvWriter csv(s.output_dir / "backward.csv", "t,E1,E2,E3,calE");
    for (std::size_t k = 0; k < bf.times.size(); ++k) csv.row({bf.times[k], bf.E1[k], bf.E2[k], bf.E3[k], bf.calE[k]});
    csv.close();

    if (bf.E1.front() == 0.0) {
      note("backward: zero initial data, all functionals vanish");
      return;
    }
    double min_cal = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < bf.calE.size(); ++k) min_cal = std::min(min_cal, bf.calE[k]);
    certify("backward_calE_positive", min_cal > 0, "min_calE(t>0)=" + format_double(min_cal));

    bool bound = std::isfinite(bf.gronwall_K) && min_cal > 0;
    if (bf.calE.size() > 1 && bf.calE[1] > 0) {
      for (std::size_t k = 1; k < bf.calE.size(); ++k) {
        const double limit = bf.calE[1] * std::exp(4 * bf.gronwall_K * (bf.times[k] - bf.times[1]));
        if (bf.calE[k] > limit * (1 + 1e-12)) bound = false;
      }
    }
    certify("gronwall_finite", bound, "gronwall_K=" + format_double(bf.gronwall_K));
    double max_res = 0;
    for (double r : bf.identity_residual) max_res = std::max(max_res, std::abs(r));
    note("identity_residual_max=" + format_double(max_res) + " (recorded)");
    const double h = grid.spacing();
    const double growth = 4.0 / (h * h) * std::max(moduli.H_cond / moduli.c_cap, moduli.m_rr_rate / moduli.alpha_m);
    note("backward: roundoff amplification up to exp(" + format_double(growth * s.backward_dt * s.backward_steps) +
         ") over the horizon (ill-posed direction; shorten [backward] n_steps on fine grids)");
  }

  void localization() {
    const DiscreteOperator fwd = assemble_operator(grid, moduli);
    const DiscreteOperator bwd = assemble_backward(grid, moduli);
    const double dt = s.localization_dt.value_or(s.dt);
    const int steps = s.localization_steps.value_or(s.n_steps);
    const LocalizationReport rep = localization_probe(fwd, bwd, init, dt, steps);
    if (rep.trivial) {
      certify("no_finite_time_extinction", true, "trivial: zero initial data, E == 0");
      return;
    }
    certify("no_finite_time_extinction", rep.positive_everywhere,
            "min_energy_ratio=" + format_double(rep.min_energy_ratio));
    if (s.model == Model::type2)
      certify("round_trip", rep.round_trip_certified, "max_abs_error=" + format_double(rep.round_trip_error));
    else
      note("round_trip_error=" + format_double(rep.round_trip_error) + " (recorded, not certified for type III)");
  }
};

}  // namespace

const char* task_name(Task t) {
  switch (t) {
    case Task::simulate: return "simulate";
    case Task::spectral: return "spectral";
    case Task::dispersion: return "dispersion";
    case Task::backward: return "backward";
    case Task::localization: return "localization";
  }
  return "?";
}

const char* model_name(Model m) { return m == Model::type2 ? "type2" : "type3"; }

bool Scenario::has_task(Task t) const { return std::find(tasks.begin(), tasks.end(), t) != tasks.end(); }

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Scenario parse_scenario(std::string_view text) {
  const auto sections = tokenize(text);
  for (const char* name : {"material", "grid", "time", "init", "tasks"})
    if (!sections.count(name)) throw ParseError(std::string("missing [") + name + "]", 0);

  Scenario s;
  parse_material(sections.at("material"), s);
  parse_grid(sections.at("grid"), s);
  parse_time(sections.at("time"), s);
  parse_init(sections.at("init"), s);
  parse_tasks(sections.at("tasks"), s);
  parse_optional(sections, s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

State1D build_initial_data(const Scenario& s) {
  const Grid1D grid(s.n_interior, s.length);
  State1D init = State1D::zeros(s.n_interior);
  const Eigen::VectorXd x = grid.nodes();
  switch (s.init.preset) {
    case InitSpec::Preset::sine:
      for (const auto& [f, mode] : s.init.modes)
        init.field(f) = s.init.amplitude * (mode * std::numbers::pi * x.array() / s.length).sin().matrix();
      break;
    case InitSpec::Preset::impulse: {
      const int node = s.init.impulse_node > 0 ? s.init.impulse_node : (s.n_interior + 1) / 2;
      init.field(s.init.impulse_field)(node - 1) = s.init.amplitude;
      break;
    }
    case InitSpec::Preset::random: {
      Rng rng(s.seed);
      for (Field f : kAllFields)
        for (int j = 0; j < s.n_interior; ++j) init.field(f)(j) = rng.uniform(-s.init.amplitude, s.init.amplitude);
      break;
    }
    case InitSpec::Preset::inline_values:
      for (const auto& [f, vals] : s.init.values)
        init.field(f) = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
      break;
  }
  return init;
}

RunOutcome run_scenario(const Scenario& s) {
  std::error_code ec;
  std::filesystem::create_directories(s.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + s.output_dir.string() + ": " + ec.message());

  Runner runner{s, Grid1D(s.n_interior, s.length), to_moduli_1d(s.material), build_initial_data(s), {}};
  for (Task t : s.tasks) {
    switch (t) {
      case Task::simulate: runner.simulate(); break;
      case Task::spectral: runner.spectral(); break;
      case Task::dispersion: runner.dispersion(); break;
      case Task::backward: runner.backward(); break;
      case Task::localization: runner.localization(); break;
    }
  }

  RunOutcome out = std::move(runner.outcome);
  std::ostringstream rep;
  rep << "microtherm report\n";
  rep << "model: " << model_name(s.model) << '\n';
  rep << "grid: n_interior=" << s.n_interior << " length=" << format_double(s.length) << '\n';
  rep << "time: dt=" << format_double(s.dt) << " n_steps=" << s.n_steps << " snapshot_every=" << s.snapshot_every
      << '\n';
  rep << "seed: " << s.seed << " (mt19937_64)\n";
  if (s.tasks.empty()) {
    rep << "no tasks\n";
  } else {
    rep << "tasks:";
    for (Task t : s.tasks) rep << ' ' << task_name(t);
    rep << '\n';
  }
  for (const auto& c : out.certificates) rep << c.name << ": " << (c.pass ? "PASS" : "FAIL") << "  " << c.detail << '\n';
  for (const auto& n : out.notes) rep << "note: " << n << '\n';

  out.exit_code = 0;
  for (const auto& c : out.certificates)
    if (!c.pass) out.exit_code = 1;
  rep << "status: " << (out.exit_code == 0 ? "PASS" : "FAIL") << '\n';
  out.report = rep.str();

  std::ofstream f(s.output_dir / "report.txt", std::ios::binary);
  if (!f) throw IoError("cannot open " + (s.output_dir / "report.txt").string());
  f << out.report;
  f.close();
  if (!f) throw IoError("failed writing report.txt");
  return out;
}

}  // namespace microtherm
