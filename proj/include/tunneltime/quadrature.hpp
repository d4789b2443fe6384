#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tunneltime/errors.hpp"

namespace tunneltime {

using Complex = std::complex<double>;

struct ComplexValue {
  Complex value{0.0, 0.0};
  double err_abs = 0.0;
};

// phi(t) = inv_t / t + t1*t + t2*t^2 + t3*t^3  (real coefficients)
struct PhaseCoeffs {
  double inv_t = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
};

// Contour for the half-line integral \int_0^\infty f(t) dt, deformed into the
// lower half plane (or bent, when head_arg/tail_arg are overridden):
//   head:  straight ray 0 -> t_split*e^{i*head}, traversed in u = sqrt(t)
//          to tame integrable endpoint singularities,
//   bridge: chord t_split*e^{i*head} -> t_split*e^{i*tail} (if angles differ),
//   tail:  ray t_split*e^{i*tail} -> infinity, marched in geometrically
//          growing panels until the envelope stop rule fires.
// rotation_angle is the magnitude of the default downward rotation; head_arg
// and tail_arg are signed overrides. eta is consumed by the propagators (an
// explicit +i*eta added to the energy), not by the engine. pin_geometry asks
// adapt_contour to leave the geometry exactly as given.
struct ContourSpec {
  double rotation_angle = 0.65;
  double t_split = 1.0;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_subdivisions = 4000;
  std::optional<double> head_arg{};
  std::optional<double> tail_arg{};
  double tail_min = 0.0;
  double eta = 0.0;
  bool pin_geometry = false;

  double head() const { return head_arg.value_or(-rotation_angle); }
  double tail() const { return tail_arg.value_or(-rotation_angle); }

  void validate() const {
    constexpr double half_pi = 1.5707963267948966;
    if (!(rotation_angle > 0.0 && rotation_angle < half_pi))
      throw std::invalid_argument("ContourSpec: rotation_angle must lie in (0, pi/2)");
    if (!(t_split > 0.0))
      throw std::invalid_argument("ContourSpec: t_split must be positive");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw std::invalid_argument("ContourSpec: tolerances must be positive");
    if (max_subdivisions < 0)
      throw std::invalid_argument("ContourSpec: max_subdivisions must be >= 0");
    if (head_arg && !(std::abs(*head_arg) < half_pi))
      throw std::invalid_argument("ContourSpec: |head_arg| must be < pi/2");
    if (tail_arg && !(std::abs(*tail_arg) < half_pi))
      throw std::invalid_argument("ContourSpec: |tail_arg| must be < pi/2");
    if (!(tail_min >= 0.0))
      throw std::invalid_argument("ContourSpec: tail_min must be >= 0");
    if (!(eta >= 0.0))
      throw std::invalid_argument("ContourSpec: eta must be >= 0");
  }
};

namespace detail {

// A straight segment in w-space; the physical variable is t = w (usub=false)
// or t = w^2 (usub=true, jacobian 2w). Sub-ranges are tracked in the unit
// parameter so bisection never loses the original geometry.
struct Piece {
  Complex a{0.0, 0.0};
  Complex b{0.0, 0.0};
  bool usub = false;
};

struct Segment {
  Piece piece;
  double x0 = 0.0, x1 = 1.0;
  Complex integral{0.0, 0.0};
  double err = 0.0;
  double fmax = 0.0;  // max |f(t)| over the evaluation nodes
  bool operator<(const Segment& o) const { return err < o.err; }
};

// Kronrod-15 with embedded Gauss-7 on a sub-range of a piece. The two rules
// are evaluated independently (22 integrand calls); |K15-G7| is the error
// estimate. Node/weight tables come from Boost.Math; entries with abscissa 0
// contribute once, all others symmetrically.
template <class F>
Segment eval_segment(const F& f, const Piece& p, double x0, double x1) {
  using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
  using g7 = boost::math::quadrature::gauss<double, 7>;
  const Complex w0 = p.a + x0 * (p.b - p.a);
  const Complex w1 = p.a + x1 * (p.b - p.a);
  const Complex dw = 0.5 * (w1 - w0);
  const Complex wm = 0.5 * (w1 + w0);

  Segment seg;
  seg.piece = p;
  seg.x0 = x0;
  seg.x1 = x1;

  auto sample = [&](double s) {  // s in [-1, 1]
    const Complex w = wm + s * dw;
    Complex t, jac;
    if (p.usub) {
      t = w * w;
      jac = 2.0 * w * dw;
    } else {
      t = w;
      jac = dw;
    }
    Complex v = f(t);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      if (std::abs(t) > 1e-300)
        throw SingularIntegrand("integrand is non-finite at t = (" +
                                std::to_string(t.real()) + ", " +
                                std::to_string(t.imag()) + ")");
      v = Complex(0.0, 0.0);
    }
    seg.fmax = std::max(seg.fmax, std::abs(v));
    return v * jac;
  };

  Complex ik(0.0, 0.0), ig(0.0, 0.0);
  const auto& kx = gk::abscissa();
  const auto& kw = gk::weights();
  for (std::size_t i = 0; i < kx.size(); ++i) {
    if (kx[i] == 0.0)
      ik += kw[i] * sample(0.0);
    else
      ik += kw[i] * (sample(kx[i]) + sample(-kx[i]));
  }
  const auto& gx = g7::abscissa();
  const auto& gw = g7::weights();
  for (std::size_t i = 0; i < gx.size(); ++i) {
    if (gx[i] == 0.0)
      ig += gw[i] * sample(0.0);
    else
      ig += gw[i] * (sample(gx[i]) + sample(-gx[i]));
  }
  seg.integral = ik;
  seg.err = std::abs(ik - ig);
  return seg;
}

inline std::string fmt_complex(Complex z) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%.6g, %.6g)", z.real(), z.imag());
  return buf;
}

}  // namespace detail

// Adaptive contour integral of f over [0, inf) along the contour described
// by spec. Returns the value with an error bound (rule differences plus the
// tail truncation estimate). Throws NonConvergence if the subdivision budget
// is exhausted above tolerance, SingularIntegrand on non-finite samples.
template <class F>
ComplexValue integrate_halfline(F&& f, const ContourSpec& spec) {
  spec.validate();
  const Complex i1(0.0, 1.0);
  const double th = spec.head();
  const double tt = spec.tail();

  std::priority_queue<detail::Segment> heap;
  Complex total(0.0, 0.0);
  double err_active = 0.0;   // refinable segments
  double err_frozen = 0.0;   // unsplittable segments + tail truncation
  auto push = [&](detail::Segment&& s) {
    total += s.integral;
    err_active += s.err;
    heap.push(std::move(s));
  };

  // Head, in u = sqrt(t): straight from 0 to sqrt(t_split) e^{i head/2}.
  push(detail::eval_segment(
      f, detail::Piece{Complex(0.0, 0.0),
                       std::sqrt(spec.t_split) * std::exp(i1 * (th / 2.0)), true},
      0.0, 1.0));

  // Bridge between the two rays when they differ.
  if (th != tt) {
    push(detail::eval_segment(
        f, detail::Piece{spec.t_split * std::exp(i1 * th),
                         spec.t_split * std::exp(i1 * tt), false},
        0.0, 1.0));
  }

  // Tail: march geometrically growing panels along e^{i tail} until the
  // panel contribution stays below the floor twice in a row (and tail_min
  // has been passed). The unresolved remainder is estimated from the decay
  // rate of the last panels and frozen into the error bound.
  {
    const Complex dir = std::exp(i1 * tt);
    double s = spec.t_split;
    double len = spec.t_split;
    int consecutive_small = 0;
    double prev_fmax = -1.0, prev_len = 0.0;
    double last_fmax = 0.0, last_len = 0.0;
    for (std::size_t panel = 0;; ++panel) {
      if (panel > 4096)
        throw NonConvergence(
            "integrate_halfline: tail envelope did not decay within 4096 panels "
            "(tail arg " + std::to_string(tt) + ")",
            err_active + err_frozen);
      auto seg = detail::eval_segment(
          f, detail::Piece{s * dir, (s + len) * dir, false}, 0.0, 1.0);
      const double contrib = seg.fmax * len;
      prev_fmax = last_fmax;
      prev_len = last_len;
      last_fmax = seg.fmax;
      last_len = len;
      push(std::move(seg));
      const double floor =
          std::max(spec.abs_tol * 1e-2, spec.rel_tol * 1e-2 * std::abs(total));
      consecutive_small = (contrib < floor) ? consecutive_small + 1 : 0;
      s += len;
      len *= 1.6;
      if (consecutive_small >= 2 && s >= spec.tail_min) break;
    }
    if (last_fmax > 0.0 && prev_fmax > last_fmax) {
      const double lam =
          std::log(prev_fmax / last_fmax) / (0.5 * (prev_len + last_len));
      err_frozen += last_fmax / lam;
    } else {
      err_frozen += last_fmax * last_len * 4.0;
    }
  }

  // Global refinement: bisect the worst segment until the combined error
  // bound meets tolerance or the budget runs out.
  int splits = 0;
  auto tol = [&]() {
    return std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
  };
  while (err_active + err_frozen > tol() && !heap.empty()) {
    if (splits >= spec.max_subdivisions) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "integrate_halfline: %d subdivisions exhausted, err %.3g "
                    "vs tolerance %.3g, value %s",
                    splits, err_active + err_frozen, tol(),
                    detail::fmt_complex(total).c_str());
      throw NonConvergence(buf, err_active + err_frozen);
    }
    detail::Segment worst = heap.top();
    heap.pop();
    err_active -= worst.err;
    const double xm = 0.5 * (worst.x0 + worst.x1);
    if (!(xm > worst.x0 && xm < worst.x1)) {
      err_frozen += worst.err;  // cannot be split further in double
      continue;
    }
    total -= worst.integral;
    push(detail::eval_segment(f, worst.piece, worst.x0, xm));
    push(detail::eval_segment(f, worst.piece, xm, worst.x1));
    ++splits;
  }
  return ComplexValue{total, err_active + err_frozen};
}

// Stationary points of phi(t) = inv_t/t + t1 t + t2 t^2 + t3 t^3, i.e. roots
// of phi'(t) = -inv_t/t^2 + t1 + 2 t2 t + 3 t3 t^2. Multiplying by t^2 gives
// a polynomial of degree <= 4; when inv_t = 0 the spurious double root at
// t = 0 is factored out up front. Roots are polished by Newton steps and
// returned sorted by (Re, Im). Throws DegenerateError when phi' vanishes
// identically; a nonzero constant phi' yields an empty list.
inline std::vector<Complex> stationary_points(const PhaseCoeffs& pc) {
  const bool z_inv = pc.inv_t == 0.0, z1 = pc.t1 == 0.0, z2 = pc.t2 == 0.0,
             z3 = pc.t3 == 0.0;
  if (z_inv && z1 && z2 && z3)
    throw DegenerateError("stationary_points: phase derivative vanishes identically");

  // Ascending coefficients of the polynomial to solve.
  std::vector<double> a;
  if (z_inv) {
    a = {pc.t1, 2.0 * pc.t2, 3.0 * pc.t3};  // phi' itself
  } else {
    a = {-pc.inv_t, 0.0, pc.t1, 2.0 * pc.t2, 3.0 * pc.t3};  // t^2 phi'
  }
  while (a.size() > 1 && a.back() == 0.0) a.pop_back();
  const std::size_t deg = a.size() - 1;
  if (deg == 0) return {};  // nonzero constant phi': no stationary points

  // Monic complex coefficients c[0..deg-1]; leading coefficient 1.
  std::vector<Complex> c(deg);
  for (std::size_t k = 0; k < deg; ++k) c[k] = Complex(a[k] / a[deg], 0.0);
  auto poly = [&](Complex z) {
    Complex p(1.0, 0.0);
    for (std::size_t k = deg; k-- > 0;) p = p * z + c[k];
    return p;
  };
  auto dpoly = [&](Complex z) {
    Complex p(static_cast<double>(deg), 0.0);
    for (std::size_t k = deg; k-- > 1;)
      p = p * z + static_cast<double>(k) * c[k];
    return p;
  };

  // Durand-Kerner from a scaled spiral start, then Newton polish.
  double radius = 0.0;
  for (const auto& ck : c) radius = std::max(radius, std::abs(ck));
  radius = 1.0 + radius;
  std::vector<Complex> z(deg);
  const Complex seed(0.4, 0.9);
  Complex p = seed;
  for (std::size_t j = 0; j < deg; ++j, p *= seed) z[j] = radius * p;
  for (int iter = 0; iter < 300; ++iter) {
    double move = 0.0;
    for (std::size_t j = 0; j < deg; ++j) {
      Complex denom(1.0, 0.0);
      for (std::size_t k = 0; k < deg; ++k)
        if (k != j) denom *= (z[j] - z[k]);
      if (denom == Complex(0.0, 0.0)) denom = Complex(1e-30, 0.0);
      const Complex step = poly(z[j]) / denom;
      z[j] -= step;
      move = std::max(move, std::abs(step));
    }
    if (move < 1e-14 * radius) break;
  }
  for (auto& r : z)
    for (int it = 0; it < 3; ++it) {
      const Complex d = dpoly(r);
      if (std::abs(d) > 0.0) r -= poly(r) / d;
    }
  std::sort(z.begin(), z.end(), [](Complex u, Complex v) {
    if (u.real() != v.real()) return u.real() < v.real();
    return u.imag() < v.imag();
  });
  return z;
}

// Quadratic saddle-point value of \int amp(t) e^{i phase(t)} dt at tstar:
//   amp(t*) sqrt(2 pi / (-i phase''(t*))) e^{i phase(t*)}   (principal sqrt).
// phase'' is taken from phase_dd if given, else by Richardson-extrapolated
// central differences. Throws DegenerateSaddle when phase'' is numerically
// zero on the scale of the phase.
template <class A, class P>
Complex saddle_value(A&& amp, P&& phase, Complex tstar,
                     std::optional<Complex> phase_dd = std::nullopt) {
  const Complex i1(0.0, 1.0);
  const Complex phi0 = phase(tstar);
  Complex ddd;
  if (phase_dd) {
    ddd = *phase_dd;
  } else {
    const double h = 1e-3 * std::max(std::abs(tstar), 1.0);
    auto second = [&](double hh) {
      return (phase(tstar + hh) - 2.0 * phi0 + phase(tstar - hh)) / (hh * hh);
    };
    ddd = (4.0 * second(h / 2.0) - second(h)) / 3.0;
  }
  const double scale2 = std::max(std::abs(tstar) * std::abs(tstar), 1e-12);
  if (std::abs(ddd) * scale2 <= 1e-8 * (1.0 + std::abs(phi0)))
    throw DegenerateSaddle("saddle_value: phase'' vanishes at the stationary point");
  const double two_pi = 6.283185307179586;
  return amp(tstar) * std::sqrt(two_pi / (-i1 * ddd)) * std::exp(i1 * phi0);
}

namespace detail {

// Log magnitude of e^{i phi(s e^{i th})} along the ray of argument th.
inline double log_envelope(const PhaseCoeffs& pc, double th, double s) {
  return pc.inv_t * std::sin(th) / s - pc.t1 * s * std::sin(th) -
         pc.t2 * s * s * std::sin(2.0 * th) -
         pc.t3 * s * s * s * std::sin(3.0 * th);
}

}  // namespace detail

// Derive contour geometry (ray angles, t_split, tail_min) suited to the
// phase coefficients, preserving tolerances/budget/eta from base. The rules:
//   - a stationary point in the fourth quadrant pulls the ray through it
//     (no amplitude blow-up anywhere along the contour);
//   - a positive real stationary point (free propagation) bends the contour:
//     head down, tail up through the real axis;
//   - otherwise (evanescent): plain downward rotation by base.rotation_angle.
// t_split is placed where the tail-ray envelope has dropped 3 below its
// peak, tail_min where it has dropped 80 (the tail stop rule may not fire
// before that). base.pin_geometry short-circuits everything.
inline ContourSpec adapt_contour(const PhaseCoeffs& pc, ContourSpec base) {
  if (base.pin_geometry) return base;
  constexpr double kMinArg = 0.05, kMaxArg = 0.78;
  if (pc.inv_t == 0.0 && pc.t1 == 0.0 && pc.t2 == 0.0 && pc.t3 == 0.0)
    return base;

  std::vector<Complex> roots;
  try {
    roots = stationary_points(pc);
  } catch (const DegenerateError&) {
    return base;
  }

  double head = -std::clamp(base.rotation_angle, kMinArg, kMaxArg);
  double tail = head;
  double free_saddle = 0.0;  // largest positive real stationary point
  bool bent = false;
  {
    const Complex* best = nullptr;
    for (const auto& r : roots) {
      const double m = std::abs(r);
      if (m == 0.0) continue;
      if (std::abs(r.imag()) <= 1e-9 * m && r.real() > 0.0)
        free_saddle = std::max(free_saddle, r.real());
      else if (r.real() > 1e-9 * m && r.imag() < -1e-9 * m)
        if (!best || r.real() > best->real()) best = &r;
    }
    if (best) {
      head = tail = std::clamp(std::arg(*best), -kMaxArg, -kMinArg);
    } else if (free_saddle > 0.0 || (pc.t3 == 0.0 && pc.t2 == 0.0 && pc.t1 > 0.0)) {
      // Decay at infinity needs the bent contour: down, across, then up.
      bent = true;
      head = -std::clamp(base.rotation_angle, kMinArg, kMaxArg);
      tail = -head;
    }
  }

  // Candidate length scales for the envelope scan.
  std::vector<double> scales;
  for (const auto& r : roots)
    if (std::abs(r) > 0.0) scales.push_back(std::abs(r));
  if (pc.t1 != 0.0) scales.push_back(1.0 / std::abs(pc.t1));
  if (pc.t3 != 0.0) scales.push_back(std::cbrt(1.0 / std::abs(pc.t3)));
  if (pc.inv_t != 0.0 && pc.t1 != 0.0)
    scales.push_back(std::sqrt(std::abs(pc.inv_t / pc.t1)));
  if (pc.inv_t != 0.0 && pc.t3 != 0.0)
    scales.push_back(std::pow(std::abs(pc.inv_t / pc.t3), 0.25));
  if (scales.empty()) return base;
  const auto [lo_it, hi_it] = std::minmax_element(scales.begin(), scales.end());

  ContourSpec out = base;
  if (bent) {
    out.head_arg = head;
    out.tail_arg = tail;
    out.t_split = 2.0 * free_saddle + 3.0 / std::abs(pc.t1) +
                  (pc.inv_t != 0.0 ? std::sqrt(pc.inv_t / pc.t1) : 0.0);
    // March until the up-ray envelope has dropped 80 below its start.
    const double e0 = detail::log_envelope(pc, tail, out.t_split);
    double s = out.t_split;
    for (int k = 0; k < 400; ++k) {
      s *= 1.3;
      if (detail::log_envelope(pc, tail, s) < e0 - 80.0) break;
    }
    out.tail_min = 1.25 * s;
    return out;
  }

  // Scan the envelope along the chosen ray on a log grid.
  const double s_lo = *lo_it * 1e-3, s_hi = *hi_it * 1e6;
  const int n = 600;
  const double ratio = std::pow(s_hi / s_lo, 1.0 / (n - 1));
  double peak = -1e308;
  int ipeak = 0;
  std::vector<double> env(n);
  {
    double s = s_lo;
    for (int k = 0; k < n; ++k, s *= ratio) {
      env[k] = detail::log_envelope(pc, tail, s);
      if (env[k] > peak) {
        peak = env[k];
        ipeak = k;
      }
    }
  }
  auto s_at = [&](int k) { return s_lo * std::pow(ratio, k); };
  double s_split = s_at(ipeak), s_stop = s_hi;
  for (int k = ipeak; k < n; ++k)
    if (env[k] <= peak - 3.0) {
      s_split = s_at(k);
      break;
    }
  for (int k = ipeak; k < n; ++k)
    if (env[k] <= peak - 80.0) {
      s_stop = s_at(k);
      break;
    }
  out.head_arg = head;
  out.tail_arg = tail;
  out.t_split = s_split;
  out.tail_min = 1.25 * s_stop;
  return out;
}

}  // namespace tunneltime
