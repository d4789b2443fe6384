#pragma once

#include <cmath>
#include <vector>

#include "tunneltime/classical.hpp"
#include "tunneltime/detail/parallel.hpp"
#include "tunneltime/propagator_rel.hpp"

namespace tunneltime {

// Transverse kinetic momentum at coordinate x (canonical pz is conserved,
// the field feeds in -(E0/c) x along the tunnel).
inline double kinetic_momentum(double x, double pz, double E0, double c) {
  return pz - (E0 / c) * x;
}

// Transverse canonical momentum that maximizes the tunneling probability.
inline double most_probable_pz(double Ip, double c) {
  return -2.0 * Ip / (3.0 * c);
}

// log T^2(pz) = 2 [ ln|G(xe(pz))| - ln|G(0)| ], kept in log space because the
// magnitudes straddle hundreds of orders across a scan.
inline double transmission_log(double pz, const DerivedParams& d, double c,
                               const ContourSpec& spec = {}) {
  const double xe = exit_rel(d.Ip, d.E0, pz, c);
  const RelArgs a{.eps = d.eps0, .pz = pz, .E0 = d.E0, .c = c};
  const Complex gx = green_rel(xe, a, spec).value;
  const Complex g0 = green_rel(0.0, a, spec).value;
  if (!(std::abs(gx) > 0.0) || !(std::abs(g0) > 0.0))
    throw ZeroAmplitude("transmission_log: |G| underflowed");
  return 2.0 * (std::log(std::abs(gx)) - std::log(std::abs(g0)));
}

struct MomentumScan {
  std::vector<double> pz;
  std::vector<double> qz_exit;  // kinetic momentum at the exit, per pz
  std::vector<double> log_t2;
  double pz_peak = 0.0;   // parabolic refinement of the discrete maximum
  double log_peak = 0.0;
  bool edge_peak = false;  // maximum sat on a scan boundary; not refined
};

// Scan T^2 over a pz grid and refine the peak by a parabola through the
// discrete maximum in log space (exact for a Gaussian profile).
inline MomentumScan scan_pz(const DerivedParams& d, double c, double pz_lo,
                            double pz_hi, int n, const ContourSpec& spec = {},
                            int threads = 1) {
  if (n < 3) throw DomainError("scan_pz: need at least 3 points");
  if (!(pz_lo < pz_hi)) throw DomainError("scan_pz: need pz_lo < pz_hi");
  MomentumScan s;
  s.pz.resize(n);
  s.qz_exit.resize(n);
  s.log_t2.resize(n);
  const double h = (pz_hi - pz_lo) / (n - 1);
  for (int i = 0; i < n; ++i) s.pz[i] = pz_lo + h * i;
  detail::parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    const double pz = s.pz[i];
    s.qz_exit[i] = kinetic_momentum(exit_rel(d.Ip, d.E0, pz, c), pz, d.E0, c);
    s.log_t2[i] = transmission_log(pz, d, c, spec);
  });

  std::size_t imax = 0;
  for (std::size_t i = 1; i < s.log_t2.size(); ++i)
    if (s.log_t2[i] > s.log_t2[imax]) imax = i;
  if (imax == 0 || imax + 1 == s.log_t2.size()) {
    s.edge_peak = true;
    s.pz_peak = s.pz[imax];
    s.log_peak = s.log_t2[imax];
    return s;
  }
  const double fm = s.log_t2[imax - 1], f0 = s.log_t2[imax], fp = s.log_t2[imax + 1];
  const double denom = fp - 2.0 * f0 + fm;
  if (denom < 0.0) {
    const double delta = 0.5 * (fm - fp) / denom;
    s.pz_peak = s.pz[imax] + delta * h;
    s.log_peak = f0 - 0.125 * (fm - fp) * (fm - fp) / denom;
  } else {  // flat to roundoff; keep the grid point
    s.pz_peak = s.pz[imax];
    s.log_peak = f0;
  }
  return s;
}

}  // namespace tunneltime
