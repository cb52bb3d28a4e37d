#pragma once

#include <functional>
#include <string>
#include <vector>

#include "microtherm/material.hpp"

namespace fixtures {

using microtherm::AnisotropicTensors;
using microtherm::MaterialIsotropic;
using microtherm::ValidationReport;

// A validation rule with one fixture that satisfies it and one that breaks it.
// `expect` is a substring that must appear in the failing report.
struct Fixture {
  std::string rule;
  std::function<ValidationReport()> passing;
  std::function<ValidationReport()> failing;
  std::string expect;
};

inline AnisotropicTensors reference_tensors() {
  return AnisotropicTensors::isotropic_embedding(MaterialIsotropic::reference());
}

inline std::function<ValidationReport()> iso(std::function<void(MaterialIsotropic&)> edit) {
  return [edit] {
    MaterialIsotropic m = MaterialIsotropic::reference();
    edit(m);
    return microtherm::validate_isotropic(m);
  };
}

inline std::function<ValidationReport()> aniso(std::function<void(AnisotropicTensors&)> edit) {
  return [edit] {
    AnisotropicTensors t = reference_tensors();
    edit(t);
    return microtherm::validate_anisotropic(t);
  };
}

inline std::vector<Fixture> all() {
  std::vector<Fixture> out;
  const auto keep_iso = iso([](MaterialIsotropic&) {});
  const auto keep_aniso = aniso([](AnisotropicTensors&) {});

  // rank-4 symmetries, each broken while the other family stays intact
  struct Rank4 {
    const char* name;
    microtherm::Tensor4 AnisotropicTensors::*member;
    bool minor;
  };
  for (Rank4 r : {Rank4{"A", &AnisotropicTensors::A, true}, Rank4{"B", &AnisotropicTensors::B, true},
                  Rank4{"C", &AnisotropicTensors::C, true}, Rank4{"Ctilde", &AnisotropicTensors::Ctilde, false}}) {
    const std::string n = r.name;
    auto member = r.member;
    if (r.minor) {
      // (0,1,0,2) vs (1,0,0,2): minor pair; the major partner (0,2,0,1) is set equal to keep major intact
      out.push_back({"symmetry " + n + "_ijkl = " + n + "_jikl", keep_aniso, aniso([member](AnisotropicTensors& t) {
                       (t.*member)(0, 1, 0, 2) += 1e-3;
                       (t.*member)(0, 2, 0, 1) += 1e-3;
                     }),
                     n + "_ijkl = " + n + "_jikl"});
    }
    // (0,1,0,2) vs (0,2,0,1): major pair; both minor partners moved together
    out.push_back({"symmetry " + n + "_ijkl = " + n + "_klij", keep_aniso, aniso([member](AnisotropicTensors& t) {
                     (t.*member)(0, 1, 0, 2) += 1e-3;
                     (t.*member)(1, 0, 0, 2) += 1e-3;
                     (t.*member)(0, 1, 2, 0) += 1e-3;
                     (t.*member)(1, 0, 2, 0) += 1e-3;
                   }),
                   n + "_ijkl = " + n + "_klij"});
  }

  struct Rank2 {
    const char* name;
    microtherm::Tensor2 AnisotropicTensors::*member;
  };
  for (Rank2 r : {Rank2{"a", &AnisotropicTensors::a}, Rank2{"b", &AnisotropicTensors::b},
                  Rank2{"c", &AnisotropicTensors::c}, Rank2{"d", &AnisotropicTensors::d},
                  Rank2{"K", &AnisotropicTensors::K}, Rank2{"Ktilde", &AnisotropicTensors::Ktilde}}) {
    const std::string n = r.name;
    auto member = r.member;
    out.push_back({"symmetry " + n + "_ij = " + n + "_ji", keep_aniso,
                   aniso([member](AnisotropicTensors& t) { (t.*member)(0, 2) += 1e-3; }), n + "_ij = " + n + "_ji"});
  }

  out.push_back({"c_ij positive definite", keep_aniso, aniso([](AnisotropicTensors& t) {
                   t.c = {};
                   t.c(0, 0) = 1;
                   t.c(1, 1) = 1;
                   t.c(2, 2) = -1;
                 }),
                 "c_ij positive definite"});
  out.push_back({"tensor rho > 0", keep_aniso, aniso([](AnisotropicTensors& t) { t.rho = 0; }), "rho > 0"});
  out.push_back({"tensor c_cap > 0", keep_aniso, aniso([](AnisotropicTensors& t) { t.c_cap = -1; }), "c_cap > 0"});
  out.push_back({"Ktilde positive semidefinite", keep_aniso, aniso([](AnisotropicTensors& t) { t.Ktilde(1, 1) = -0.5; }),
                 "Ktilde positive semidefinite"});
  out.push_back({"Ctilde form positive semidefinite", keep_aniso, aniso([](AnisotropicTensors& t) {
                   MaterialIsotropic m = MaterialIsotropic::reference();
                   m.rho1 = -2.0;
                   t.Ctilde = AnisotropicTensors::isotropic_embedding(m).Ctilde;
                 }),
                 "Ctilde form positive semidefinite"});

  out.push_back({"rho > 0", keep_iso, iso([](MaterialIsotropic& m) { m.rho = -1; }), "rho > 0"});
  out.push_back({"c_cap > 0", keep_iso, iso([](MaterialIsotropic& m) { m.c_cap = 0; }), "c_cap > 0"});
  out.push_back({"alpha_m > 0", keep_iso, iso([](MaterialIsotropic& m) { m.alpha_m = -0.1; }), "alpha_m > 0"});
  out.push_back({"H_cond >= 0", iso([](MaterialIsotropic& m) { m.H_cond = 0; }),
                 iso([](MaterialIsotropic& m) { m.H_cond = -0.5; }), "condition (ii)"});
  out.push_back({"rho1 + rho2 + rho3 >= 0", iso([](MaterialIsotropic& m) { m.rho1 = m.rho2 = m.rho3 = 0; }),
                 iso([](MaterialIsotropic& m) { m.rho1 = -1; }), "rho1 + rho2 + rho3 >= 0"});
  out.push_back({"3 rho1 + rho2 + rho3 >= 0", iso([](MaterialIsotropic& m) { m.rho1 = -0.2; }),
                 iso([](MaterialIsotropic& m) {
                   m.rho1 = -0.5;
                   m.rho2 = m.rho3 = 0.6;  // 1D sum stays positive
                 }),
                 "3 rho1 + rho2 + rho3 >= 0"});
  out.push_back({"rho2 + rho3 >= 0", iso([](MaterialIsotropic& m) { m.rho3 = -0.3; }),
                 iso([](MaterialIsotropic& m) {
                   m.rho1 = 2.0;
                   m.rho3 = -0.5;
                 }),
                 "rho2 + rho3 >= 0"});
  out.push_back({"rho2 >= rho3", keep_iso, iso([](MaterialIsotropic& m) { m.rho3 = 0.5; }), "rho2 >= rho3"});
  out.push_back({"2x2 stiffness positive definite", iso([](MaterialIsotropic& m) { m.gamma1 = 1.0; }),
                 iso([](MaterialIsotropic& m) {
                   m.gamma1 = 1.0;
                   m.gamma2 = 0.5;  // m_ur = 2, det = 3 - 4 < 0
                 }),
                 "condition (iii)"});
  out.push_back({"K_cond > 0", keep_iso, iso([](MaterialIsotropic& m) { m.K_cond = -1; }), "K_cond > 0"});
  return out;
}

}  // namespace fixtures
