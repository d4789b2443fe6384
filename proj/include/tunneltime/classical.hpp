#pragma once

#include <array>
#include <cmath>

#include "tunneltime/errors.hpp"
#include "tunneltime/params.hpp"

namespace tunneltime {

// Nonrelativistic tunnel exit: the turning point -Ip = -E0 x of the static
// field, on the +x side.
inline double exit_nr(double Ip, double E0) {
  if (!(E0 > 0.0) || !(Ip > 0.0)) throw DomainError("exit_nr: Ip, E0 must be positive");
  return Ip / E0;
}

// Relativistic tunnel exit in the crossed field for transverse canonical
// momentum pz (energy conservation with vanishing longitudinal kinetic
// momentum); lies on the -x side for the bound scenarios here.
inline double exit_rel(double Ip, double E0, double pz, double c) {
  const double denom = c * c - Ip - c * pz;  // = eps0 - c pz
  if (!(E0 > 0.0)) throw DomainError("exit_rel: E0 must be positive");
  if (!(denom > 0.0))
    throw DomainError("exit_rel: requires c*pz < eps0 (sub-luminal drift)");
  return (Ip * Ip - c * c * (2.0 * Ip + pz * pz)) / (2.0 * E0 * denom);
}

// Newton trajectory released at rest from the nonrel exit.
struct NonrelTrajectory {
  double xe = 0.0;
  double E0 = 0.0;
  double position(double t) const { return xe + 0.5 * E0 * t * t; }
  // Time at which the trajectory passes x (0 before the exit).
  double time_at(double x) const {
    return x <= xe ? 0.0 : std::sqrt(2.0 * (x - xe) / E0);
  }
};

inline NonrelTrajectory traj_nr(double Ip, double E0) {
  return NonrelTrajectory{exit_nr(Ip, E0), E0};
}

// Proper-time solution of the Lorentz force in the crossed field, released
// at the exit with u^1 = 0 and transverse proper velocity vz0 = qz(xe).
// With gt = sqrt(c^2 + vz0^2), D = gt - vz0 and beta = E0^2 tau^2 / (2 c^2):
//   u^0 = gt + beta D,  u^1 = -(E0/c) D tau,  u^3 = vz0 + beta D,
// so u.u = c^2 holds identically and x decreases quadratically in tau.
struct RelTrajectory {
  double xe = 0.0;
  double vz0 = 0.0;
  double E0 = 0.0;
  double c = kSpeedOfLight;
  double gt = 0.0;  // u^0 at release
  double D = 0.0;   // conserved u^0 - u^3

  double u0(double tau) const { return gt + beta(tau) * D; }
  double u1(double tau) const { return -(E0 / c) * D * tau; }
  double u3(double tau) const { return vz0 + beta(tau) * D; }
  double position(double tau) const { return xe - 0.5 * (E0 / c) * D * tau * tau; }
  double z(double tau) const {
    return vz0 * tau + E0 * E0 * D * tau * tau * tau / (6.0 * c * c);
  }
  double t(double tau) const {
    return (gt * tau + E0 * E0 * D * tau * tau * tau / (6.0 * c * c)) / c;
  }
  // Inversion of the monotone position: proper time at x (x on the far side
  // of the exit, x <= xe for these scenarios).
  double tau_at(double x) const {
    if (x > xe) throw DomainError("RelTrajectory::tau_at: x is before the exit");
    return std::sqrt(2.0 * c * (xe - x) / (E0 * D));
  }
  double t_at(double x) const { return t(tau_at(x)); }
  double z_at(double x) const { return z(tau_at(x)); }

 private:
  double beta(double tau) const { return E0 * E0 * tau * tau / (2.0 * c * c); }
};

inline RelTrajectory traj_rel(double Ip, double E0, double pz, double c) {
  RelTrajectory tr;
  tr.xe = exit_rel(Ip, E0, pz, c);
  tr.vz0 = pz - (E0 / c) * tr.xe;  // kinetic transverse momentum at the exit
  tr.E0 = E0;
  tr.c = c;
  tr.gt = std::sqrt(c * c + tr.vz0 * tr.vz0);
  tr.D = tr.gt - tr.vz0;
  return tr;
}

struct RelState {
  double tau = 0.0, t = 0.0, x = 0.0, z = 0.0;
  double u0 = 0.0, u1 = 0.0, u3 = 0.0;
};

// State at a given lab time: Newton inversion of the monotone cubic t(tau)
// (derivative u^0/c > 0 always), started from the leading-order tau.
inline RelState traj_rel_lab(const RelTrajectory& tr, double t_lab) {
  if (t_lab < 0.0) throw DomainError("traj_rel_lab: t must be >= 0");
  double tau = tr.c * t_lab / tr.gt;
  bool ok = false;
  for (int it = 0; it < 80; ++it) {
    const double r = tr.t(tau) - t_lab;
    const double step = r * tr.c / tr.u0(tau);
    tau -= step;
    if (std::abs(step) <= 1e-15 * (std::abs(tau) + 1e-300)) {
      ok = true;
      break;
    }
  }
  if (!ok || !(tau >= 0.0) || !std::isfinite(tau))
    throw InversionFailure("traj_rel_lab: Newton iteration failed");
  return RelState{tau,        tr.t(tau),  tr.position(tau), tr.z(tau),
                  tr.u0(tau), tr.u1(tau), tr.u3(tau)};
}

// Lorentz-force right-hand side in proper time for the crossed field;
// state layout {c t, x, z, u0, u1, u3}. Used by the ODE cross-checks.
inline void lorentz_rhs(const std::array<double, 6>& y, std::array<double, 6>& dy,
                        double E0, double c) {
  dy[0] = y[3];
  dy[1] = y[4];
  dy[2] = y[5];
  dy[3] = -(E0 / c) * y[4];
  dy[4] = -(E0 / c) * (y[3] - y[5]);
  dy[5] = -(E0 / c) * y[4];
}

}  // namespace tunneltime
