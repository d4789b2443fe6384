#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "tunneltime/classical.hpp"
#include "tunneltime/detail/parallel.hpp"
#include "tunneltime/propagator_nr.hpp"
#include "tunneltime/propagator_rel.hpp"

namespace tunneltime {

enum class DerivativeMethod { integrand, finite_difference };

inline const char* to_string(DerivativeMethod m) {
  return m == DerivativeMethod::integrand ? "integrand" : "finite_difference";
}

// d(arg G)/d(parameter) from G and dG/d(parameter) on a shared contour.
inline double phase_slope(Complex g, Complex dg) {
  if (!(std::abs(g) > 1e-300))
    throw ZeroAmplitude("phase_slope: |G| underflowed, phase undefined");
  return std::imag(dg / g);
}

namespace detail {

inline double wrap_angle(double d) {
  const double pi = 3.141592653589793;
  while (d > pi) d -= 2.0 * pi;
  while (d < -pi) d += 2.0 * pi;
  return d;
}

inline double arg_checked(Complex g, const char* where) {
  if (!(std::abs(g) > 1e-300)) throw ZeroAmplitude(where);
  return std::arg(g);
}

}  // namespace detail

// d(arg G)/d eps at fixed x, nonrelativistic. The finite-difference route
// pins the contour geometry at the central energy so both evaluations share
// one contour (the quadrature bias cancels in the difference).
inline double time_slope_nr(double x, double eps, double E0,
                            const ContourSpec& spec = {},
                            DerivativeMethod m = DerivativeMethod::integrand) {
  if (m == DerivativeMethod::integrand) {
    return phase_slope(green_nr(x, eps, E0, spec).value,
                       dgreen_deps_nr(x, eps, E0, spec).value);
  }
  ContourSpec geo = adapt_contour(phase_nr(x, eps, E0), spec);
  geo.pin_geometry = true;
  const double h = 1e-4 * std::max(1.0, std::abs(eps));
  const double ap =
      detail::arg_checked(green_nr(x, eps + h, E0, geo).value, "time_slope_nr");
  const double am =
      detail::arg_checked(green_nr(x, eps - h, E0, geo).value, "time_slope_nr");
  return detail::wrap_angle(ap - am) / (2.0 * h);
}

// d(arg G)/d eps, relativistic.
inline double time_slope_rel(double x, const RelArgs& a,
                             const ContourSpec& spec = {},
                             DerivativeMethod m = DerivativeMethod::integrand) {
  if (m == DerivativeMethod::integrand) {
    return phase_slope(green_rel(x, a, spec).value,
                       dgreen_deps_rel(x, a, spec).value);
  }
  ContourSpec geo = adapt_contour(phase_rel(x, a), spec);
  geo.pin_geometry = true;
  const double h = 1e-4 * std::max(1.0, std::abs(a.eps));
  RelArgs ap = a, am = a;
  ap.eps += h;
  am.eps -= h;
  const double argp =
      detail::arg_checked(green_rel(x, ap, geo).value, "time_slope_rel");
  const double argm =
      detail::arg_checked(green_rel(x, am, geo).value, "time_slope_rel");
  return detail::wrap_angle(argp - argm) / (2.0 * h);
}

// d(arg G)/d pz, relativistic.
inline double pz_slope_rel(double x, const RelArgs& a,
                           const ContourSpec& spec = {},
                           DerivativeMethod m = DerivativeMethod::integrand) {
  if (m == DerivativeMethod::integrand) {
    return phase_slope(green_rel(x, a, spec).value,
                       dgreen_dpz_rel(x, a, spec).value);
  }
  ContourSpec geo = adapt_contour(phase_rel(x, a), spec);
  geo.pin_geometry = true;
  const double h = 1e-4 * std::max(1.0, std::abs(a.pz));
  RelArgs ap = a, am = a;
  ap.pz += h;
  am.pz -= h;
  const double argp =
      detail::arg_checked(green_rel(x, ap, geo).value, "pz_slope_rel");
  const double argm =
      detail::arg_checked(green_rel(x, am, geo).value, "pz_slope_rel");
  return detail::wrap_angle(argp - argm) / (2.0 * h);
}

struct TrajectoryCurve {
  std::string params_id;
  std::vector<double> x;
  std::vector<double> value;
};

// Wigner trajectory t^w(x), anchored so the bound state contributes nothing:
// t^w(x) = d(arg G)/d eps |_x - d(arg G)/d eps |_0.
inline TrajectoryCurve wigner_time_curve_nr(const std::vector<double>& xs,
                                            double eps, double E0,
                                            const ContourSpec& spec = {},
                                            DerivativeMethod m = DerivativeMethod::integrand,
                                            int threads = 1) {
  TrajectoryCurve c;
  char id[96];
  std::snprintf(id, sizeof id, "nonrel eps=%.10g E0=%.10g", eps, E0);
  c.params_id = id;
  c.x = xs;
  c.value.resize(xs.size());
  const double anchor = time_slope_nr(0.0, eps, E0, spec, m);
  detail::parallel_for(xs.size(), threads, [&](std::size_t i) {
    c.value[i] = time_slope_nr(xs[i], eps, E0, spec, m) - anchor;
  });
  return c;
}

inline TrajectoryCurve wigner_time_curve_rel(const std::vector<double>& xs,
                                             const RelArgs& a,
                                             const ContourSpec& spec = {},
                                             DerivativeMethod m = DerivativeMethod::integrand,
                                             int threads = 1) {
  TrajectoryCurve c;
  char id[128];
  std::snprintf(id, sizeof id, "rel eps=%.10g pz=%.10g E0=%.10g c=%.10g", a.eps,
                a.pz, a.E0, a.c);
  c.params_id = id;
  c.x = xs;
  c.value.resize(xs.size());
  const double anchor = time_slope_rel(0.0, a, spec, m);
  detail::parallel_for(xs.size(), threads, [&](std::size_t i) {
    c.value[i] = time_slope_rel(xs[i], a, spec, m) - anchor;
  });
  return c;
}

// Transverse Wigner trajectory z(x) = -[d(arg G)/d pz |_x - d(arg G)/d pz |_0].
inline TrajectoryCurve wigner_z_curve_rel(const std::vector<double>& xs,
                                          const RelArgs& a,
                                          const ContourSpec& spec = {},
                                          DerivativeMethod m = DerivativeMethod::integrand,
                                          int threads = 1) {
  TrajectoryCurve c;
  char id[128];
  std::snprintf(id, sizeof id, "rel-z eps=%.10g pz=%.10g E0=%.10g c=%.10g",
                a.eps, a.pz, a.E0, a.c);
  c.params_id = id;
  c.x = xs;
  c.value.resize(xs.size());
  const double anchor = pz_slope_rel(0.0, a, spec, m);
  detail::parallel_for(xs.size(), threads, [&](std::size_t i) {
    c.value[i] = -(pz_slope_rel(xs[i], a, spec, m) - anchor);
  });
  return c;
}

// Quasiclassical mode: the trajectory carried by the stationary point of the
// time integrand, Re t*(x), with the same x = 0 anchoring. Under the barrier
// the stationary points are imaginary and the curve is 0.
inline TrajectoryCurve saddle_mode_curve_nr(const std::vector<double>& xs,
                                            double eps, double E0) {
  auto re_saddle = [&](double x) {
    const auto roots = stationary_points(phase_nr(x, eps, E0));
    double best = 0.0;
    for (const auto& r : roots) best = std::max(best, r.real());
    return best;
  };
  TrajectoryCurve c;
  char id[96];
  std::snprintf(id, sizeof id, "nonrel-saddle eps=%.10g E0=%.10g", eps, E0);
  c.params_id = id;
  c.x = xs;
  c.value.reserve(xs.size());
  const double anchor = re_saddle(0.0);
  for (double x : xs) c.value.push_back(re_saddle(x) - anchor);
  return c;
}

struct DelayReport {
  double tau_w = 0.0;       // mean offset from the classical curve in the window
  double spread = 0.0;      // max - min of the offset over the window
  double window_lo = 0.0;   // actual |x| range used
  double window_hi = 0.0;
  int n_points = 0;
  bool converged = false;   // spread < max(1% |tau_w|, 1e-4)
};

// Asymptotic time delay: mean of t^w - t^c over the far window
// |x| in [lo_mult, hi_mult] * |xe|, with the plateau spread as the
// convergence measure.
inline DelayReport wigner_delay(const TrajectoryCurve& w, const TrajectoryCurve& cl,
                                double xe, double lo_mult, double hi_mult) {
  if (w.x.size() != cl.x.size())
    throw DomainError("wigner_delay: curves use different grids");
  const double axe = std::abs(xe);
  const double fuzz = 1e-9 * axe;
  DelayReport r;
  r.window_lo = lo_mult * axe;
  r.window_hi = hi_mult * axe;
  double sum = 0.0, lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < w.x.size(); ++i) {
    if (w.x[i] != cl.x[i])
      throw DomainError("wigner_delay: curves use different grids");
    const double ax = std::abs(w.x[i]);
    if (ax < r.window_lo - fuzz || ax > r.window_hi + fuzz) continue;
    const double d = w.value[i] - cl.value[i];
    if (r.n_points == 0) {
      lo = hi = d;
    } else {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    sum += d;
    ++r.n_points;
  }
  if (r.n_points < 2)
    throw DomainError("wigner_delay: window contains fewer than 2 grid points");
  r.tau_w = sum / r.n_points;
  r.spread = hi - lo;
  r.converged = r.spread < std::max(0.01 * std::abs(r.tau_w), 1e-4);
  return r;
}

struct OffsetReport {
  double z_exit = 0.0;         // transverse Wigner coordinate at the exit
  double offset_mean = 0.0;    // mean of z^w - z^c over the window
  double offset_spread = 0.0;  // max - min over the window
  double window_scale = 0.0;   // max |z^c| over the window
  int n_points = 0;
  bool converged = false;      // spread < 1% of window_scale
};

// Transverse exit offset: same windowing as the delay, but the convergence
// scale is the classical drift itself (the offset is constant only on the
// scale of the trajectories; see the summary fields for both readings).
inline OffsetReport wigner_offset(const TrajectoryCurve& zw, const TrajectoryCurve& zc,
                                  double xe, double lo_mult, double hi_mult,
                                  double z_exit) {
  if (zw.x.size() != zc.x.size())
    throw DomainError("wigner_offset: curves use different grids");
  const double axe = std::abs(xe);
  const double fuzz = 1e-9 * axe;
  OffsetReport r;
  r.z_exit = z_exit;
  const double wlo = lo_mult * axe, whi = hi_mult * axe;
  double sum = 0.0, lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < zw.x.size(); ++i) {
    if (zw.x[i] != zc.x[i])
      throw DomainError("wigner_offset: curves use different grids");
    const double ax = std::abs(zw.x[i]);
    if (ax < wlo - fuzz || ax > whi + fuzz) continue;
    const double d = zw.value[i] - zc.value[i];
    if (r.n_points == 0) {
      lo = hi = d;
    } else {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    sum += d;
    r.window_scale = std::max(r.window_scale, std::abs(zc.value[i]));
    ++r.n_points;
  }
  if (r.n_points < 2)
    throw DomainError("wigner_offset: window contains fewer than 2 grid points");
  r.offset_mean = sum / r.n_points;
  r.offset_spread = hi - lo;
  r.converged = r.offset_spread < 0.01 * r.window_scale;
  return r;
}

}  // namespace tunneltime
