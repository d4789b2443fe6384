#pragma once

#include <cmath>
#include <complex>

#include <boost/math/special_functions/airy.hpp>

#include "tunneltime/quadrature.hpp"

namespace tunneltime {

// Time-domain propagator of H = p^2/2 - E0 x between x'=0 and x, for real or
// complex t in the right half plane (principal square root):
//   K(x,0;t) = (2 pi i t)^{-1/2} exp(i [x^2/(2t) + E0 t x/2 - E0^2 t^3/24]).
inline Complex kernel_nr(double x, Complex t, double E0) {
  const Complex i1(0.0, 1.0);
  const double two_pi = 6.283185307179586;
  const Complex phase =
      x * x / (2.0 * t) + 0.5 * E0 * x * t - E0 * E0 * t * t * t / 24.0;
  return std::sqrt(1.0 / (two_pi * i1 * t)) * std::exp(i1 * phase);
}

// Full time phase of e^{i eps t} K(x,0;t); geometry derivations key off this.
inline PhaseCoeffs phase_nr(double x, double eps, double E0) {
  return PhaseCoeffs{0.5 * x * x, eps + 0.5 * E0 * x, 0.0, -E0 * E0 / 24.0};
}

namespace detail {

// Common contour evaluation: spectral integral of extra(t) * e^{i eps t} K.
// The -i in front converts the bare half-line integral into the retarded
// fixed-energy amplitude (checked against the closed forms: -e^{-kappa|x|}/kappa
// below threshold, -(i/k) e^{ik|x|} free). spec.eta > 0 evaluates at eps+i*eta.
template <class Extra>
ComplexValue spectral_nr(double x, double eps, double E0, const ContourSpec& spec,
                         Extra&& extra) {
  const ContourSpec geo = adapt_contour(phase_nr(x, eps, E0), spec);
  const Complex i1(0.0, 1.0);
  const Complex eps_c(eps, spec.eta);
  auto f = [&](Complex t) {
    return extra(t) * std::exp(i1 * eps_c * t) * kernel_nr(x, t, E0);
  };
  ComplexValue bare = integrate_halfline(f, geo);
  return ComplexValue{-i1 * bare.value, bare.err_abs};
}

}  // namespace detail

// Fixed-energy amplitude G(x,0;eps) = -i \int_0^inf dt e^{i eps t} K(x,0;t).
inline ComplexValue green_nr(double x, double eps, double E0,
                             const ContourSpec& spec = {}) {
  return detail::spectral_nr(x, eps, E0, spec,
                             [](Complex) { return Complex(1.0, 0.0); });
}

// Energy derivative on the same contour: the integrand gains a factor (i t).
inline ComplexValue dgreen_deps_nr(double x, double eps, double E0,
                                   const ContourSpec& spec = {}) {
  const Complex i1(0.0, 1.0);
  return detail::spectral_nr(x, eps, E0, spec,
                             [i1](Complex t) { return i1 * t; });
}

// Independent closed form used as an oracle: for the linear potential the
// fixed-energy amplitude factorizes into Airy functions,
//   u_left(x)  = Ai(z),  z(x) = -(2 E0)^{1/3} (x + eps/E0)   (decays x -> -inf)
//   u_right(x) = Bi(z) + i Ai(z)                             (outgoing x -> +inf)
// with x-Wronskian -(2E0)^{1/3}/pi and source jump G'|+ - G'|- = 2, so
//   G(x,0;eps) = -(2 pi / (2E0)^{1/3}) * Ai(z(min)) * (Bi+iAi)(z(max)).
inline Complex green_nr_airy(double x, double eps, double E0) {
  if (!(E0 > 0.0)) throw DomainError("green_nr_airy: requires E0 > 0");
  const double alpha = std::cbrt(2.0 * E0);
  auto z = [&](double xx) { return -alpha * (xx + eps / E0); };
  const double two_pi = 6.283185307179586;
  const double z_near = z(std::min(x, 0.0));   // more negative coordinate
  const double z_far = z(std::max(x, 0.0));
  const Complex ci(boost::math::airy_bi(z_far), boost::math::airy_ai(z_far));
  return -(two_pi / alpha) * boost::math::airy_ai(z_near) * ci;
}

}  // namespace tunneltime
