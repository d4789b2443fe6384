#pragma once

#include <cmath>
#include <complex>

#include "tunneltime/params.hpp"
#include "tunneltime/quadrature.hpp"

namespace tunneltime {

// Arguments of the relativistic fixed-energy amplitude in the crossed static
// field (E along x, B along y, both of strength E0): eps includes the rest
// energy; pz, py are the conserved transverse canonical momenta.
struct RelArgs {
  double eps = 0.0;
  double pz = 0.0;
  double py = 0.0;
  double E0 = 0.0;
  double c = kSpeedOfLight;
};

// Proper-time phase of the amplitude: phi(tau) = x^2/(2 tau) + c1 tau + c3 tau^3.
inline PhaseCoeffs phase_rel(double x, const RelArgs& a) {
  const double c2 = a.c * a.c;
  const double c1 = 0.5 * (-(c2 + a.py * a.py + a.pz * a.pz) +
                           (a.c * a.E0 * a.pz * x + a.eps * (a.eps - a.E0 * x)) / c2);
  const double dclight = a.eps - a.c * a.pz;
  const double c3 = -a.E0 * a.E0 * dclight * dclight / (24.0 * c2 * c2);
  return PhaseCoeffs{0.5 * x * x, c1, 0.0, c3};
}

// Proper-time integrand; the prefactor -e^{3 i pi/4}/(2c) already carries the
// spectral -i (it equals -i e^{i pi/4}), so the half-line integral of this is
// the amplitude itself. Checked against the E0=0 closed form.
inline Complex integrand_rel(double x, Complex tau, const RelArgs& a) {
  const Complex i1(0.0, 1.0);
  const double two_pi = 6.283185307179586;
  const double inv_sqrt2 = 0.7071067811865476;
  const Complex pref = -Complex(-inv_sqrt2, inv_sqrt2) / (2.0 * a.c) /
                       std::sqrt(two_pi * tau);
  const PhaseCoeffs pc = phase_rel(x, a);
  const Complex phase = pc.inv_t / tau + pc.t1 * tau + pc.t3 * tau * tau * tau;
  return pref * std::exp(i1 * phase);
}

namespace detail {

// phi with eps continued to eps + i*eta (resolvent prescription cross-check).
struct RelPhase {
  Complex half_x2, c1, c3;
  RelPhase(double x, const RelArgs& a, double eta) {
    const Complex eps(a.eps, eta);
    const double c2 = a.c * a.c;
    half_x2 = Complex(0.5 * x * x, 0.0);
    c1 = 0.5 * (-(c2 + a.py * a.py + a.pz * a.pz) +
                (a.c * a.E0 * a.pz * x + eps * (eps - a.E0 * x)) / c2);
    const Complex d = eps - a.c * a.pz;
    c3 = -a.E0 * a.E0 * d * d / (24.0 * c2 * c2);
  }
  Complex operator()(Complex tau) const {
    return half_x2 / tau + c1 * tau + c3 * tau * tau * tau;
  }
};

template <class Extra>
ComplexValue spectral_rel(double x, const RelArgs& a, const ContourSpec& spec,
                          Extra&& extra) {
  const ContourSpec geo = adapt_contour(phase_rel(x, a), spec);
  const Complex i1(0.0, 1.0);
  const double two_pi = 6.283185307179586;
  const double inv_sqrt2 = 0.7071067811865476;
  const Complex pref = -Complex(-inv_sqrt2, inv_sqrt2) / (2.0 * a.c);
  const RelPhase phi(x, a, spec.eta);
  auto f = [&](Complex tau) {
    return extra(tau) * pref / std::sqrt(two_pi * tau) *
           std::exp(i1 * phi(tau));
  };
  return integrate_halfline(f, geo);
}

}  // namespace detail

// G(x, 0; eps, pz, py) as a proper-time contour integral.
inline ComplexValue green_rel(double x, const RelArgs& a,
                              const ContourSpec& spec = {}) {
  return detail::spectral_rel(x, a, spec,
                              [](Complex) { return Complex(1.0, 0.0); });
}

// d/d eps on the same contour: factor i * dphi/deps,
//   dphi/deps = tau (2 eps - E0 x)/(2 c^2) - tau^3 E0^2 (eps - c pz)/(12 c^4).
inline ComplexValue dgreen_deps_rel(double x, const RelArgs& a,
                                    const ContourSpec& spec = {}) {
  const Complex i1(0.0, 1.0);
  const double c2 = a.c * a.c;
  const Complex eps(a.eps, spec.eta);
  return detail::spectral_rel(x, a, spec, [=](Complex tau) {
    const Complex d1 = (2.0 * eps - a.E0 * x) / (2.0 * c2);
    const Complex d3 = -a.E0 * a.E0 * (eps - a.c * a.pz) / (12.0 * c2 * c2);
    return i1 * (d1 * tau + d3 * tau * tau * tau);
  });
}

// d/d pz on the same contour: factor i * dphi/dpz,
//   dphi/dpz = tau (E0 x/(2c) - pz) + tau^3 E0^2 (eps - c pz)/(12 c^3).
inline ComplexValue dgreen_dpz_rel(double x, const RelArgs& a,
                                   const ContourSpec& spec = {}) {
  const Complex i1(0.0, 1.0);
  const double c2 = a.c * a.c;
  const Complex eps(a.eps, spec.eta);
  return detail::spectral_rel(x, a, spec, [=](Complex tau) {
    const Complex d1 = a.E0 * x / (2.0 * a.c) - a.pz;
    const Complex d3 = a.E0 * a.E0 * (eps - a.c * a.pz) / (12.0 * c2 * a.c);
    return i1 * (d1 * tau + d3 * tau * tau * tau);
  });
}

}  // namespace tunneltime
