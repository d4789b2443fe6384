#pragma once

#include <cmath>
#include <string>

#include "tunneltime/errors.hpp"

namespace tunneltime {

inline constexpr double kSpeedOfLight = 137.035999;  // atomic units

enum class Regime { nonrel, rel };

inline const char* to_string(Regime r) {
  return r == Regime::nonrel ? "nonrel" : "rel";
}

// Bare scenario inputs. kappa is the bound-state momentum scale of the
// zero-range potential, ratio = E0/Ea the field in units of the state's
// characteristic field Ea = kappa^3.
struct ScenarioParams {
  double kappa = 1.0;
  double ratio = 1.0 / 7.0;
  double c = kSpeedOfLight;
  Regime regime = Regime::nonrel;
};

struct DerivedParams {
  double Ip = 0.0;    // ionization potential (positive)
  double Ea = 0.0;    // characteristic field kappa^3
  double E0 = 0.0;    // static field strength
  double eps0 = 0.0;  // bound-state energy: -Ip nonrel, c^2 - Ip rel
};

inline void validate(const ScenarioParams& p) {
  if (!(p.kappa > 0.0)) throw DomainError("kappa must be positive");
  if (!(p.ratio > 0.0)) throw DomainError("ratio E0/Ea must be positive");
  if (!(p.c > 0.0)) throw DomainError("c must be positive");
  if (p.regime == Regime::rel && !(p.kappa < p.c))
    throw DomainError("relativistic bound state requires kappa < c (got kappa=" +
                      std::to_string(p.kappa) + ", c=" + std::to_string(p.c) + ")");
}

inline DerivedParams derive(const ScenarioParams& p) {
  validate(p);
  DerivedParams d;
  d.Ea = p.kappa * p.kappa * p.kappa;
  d.E0 = p.ratio * d.Ea;
  if (p.regime == Regime::nonrel) {
    d.Ip = 0.5 * p.kappa * p.kappa;
    d.eps0 = -d.Ip;
  } else {
    // eps0 = c*sqrt(c^2 - kappa^2) includes the rest energy; Ip = c^2 - eps0.
    d.eps0 = p.c * std::sqrt(p.c * p.c - p.kappa * p.kappa);
    d.Ip = p.c * p.c - d.eps0;
  }
  return d;
}

// Adiabaticity parameter of a laser field of frequency omega; all scenarios
// here are static (omega = 0), so this is informational only.
inline double keldysh_gamma(double E0, double omega, double kappa) {
  if (!(E0 > 0.0)) throw DomainError("keldysh_gamma: E0 must be positive");
  return omega * kappa / E0;
}

}  // namespace tunneltime
