#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "tunneltime/propagator_nr.hpp"

using namespace tunneltime;

namespace {

const Complex kI(0.0, 1.0);

double rel_dev(Complex got, Complex want) {
  return std::abs(got - want) / std::abs(want);
}

}  // namespace

TEST_CASE("driven kernel values", "[propagator_nr]") {
  // Free kernel at x = t = 1: (2 pi i)^{-1/2} e^{i/2}.
  REQUIRE(rel_dev(kernel_nr(1.0, Complex(1.0, 0.0), 0.0),
                  Complex(0.38280491754448324284, -0.11231802257721919717)) < 5e-16);
  // At the origin only the field terms survive.
  REQUIRE(rel_dev(kernel_nr(0.0, Complex(1.0, 0.0), 1.0 / 7.0),
                  Complex(0.28185481329085743346, -0.28233456628027541546)) < 5e-16);
}

TEST_CASE("kernel solves the evolution equation", "[propagator_nr]") {
  // i dK/dt = -K''/2 - E0 x K, checked by finite differences at complex t.
  const double E0 = 1.0 / 7.0;
  const double x = 0.7;
  const Complex t0(0.8, -0.4);
  const double ht = 1e-5, hx = 1e-4;
  const Complex dt =
      (kernel_nr(x, t0 + ht, E0) - kernel_nr(x, t0 - ht, E0)) / (2.0 * ht);
  const Complex dxx = (kernel_nr(x + hx, t0, E0) - 2.0 * kernel_nr(x, t0, E0) +
                       kernel_nr(x - hx, t0, E0)) /
                      (hx * hx);
  const Complex resid = kI * dt + 0.5 * dxx + E0 * x * kernel_nr(x, t0, E0);
  REQUIRE(std::abs(resid) < 1e-6 * std::abs(kernel_nr(x, t0, E0)));
}

TEST_CASE("kernel composes over intermediate positions", "[propagator_nr]") {
  // Free case: int dy K(x-y; t1) K(y; t2) = K(x; t1+t2) for lower-half times.
  const Complex t1(0.3, -0.2), t2(0.5, -0.1);
  const double x = 0.7;
  const double L = 25.0;
  const int n = 20000;
  const double h = 2.0 * L / n;
  auto f = [&](double y) {
    return kernel_nr(x - y, t1, 0.0) * kernel_nr(y, t2, 0.0);
  };
  Complex acc = f(-L) + f(L);
  for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(-L + k * h);
  const Complex composed = acc * h / 3.0;
  REQUIRE(rel_dev(composed, kernel_nr(x, t1 + t2, 0.0)) < 1e-7);
}

TEST_CASE("spectral integral matches the Airy closed form", "[propagator_nr]") {
  struct Case {
    double x, eps, E0;
    Complex want;
  };
  const Case cases[] = {
      {1.0, -0.5, 1.0 / 7.0, {-0.45195195196400671376, -0.012100723128608251902}},
      {0.0, -0.5, 1.0 / 7.0, {-1.0161589557198362139, -0.0044711275326679736803}},
      {3.5, -0.5, 1.0 / 7.0, {-0.12699884452011541356, -0.073322817070460062917}},
      {50.0, -0.5, 1.0 / 7.0, {-0.038478749918089894775, -0.031188054135542515782}},
      {-1.0, -0.5, 1.0 / 7.0, {-0.33020247566877973383, -0.0014529000330189066578}},
      {0.5, -0.5, 1.0, {-0.62400030681870580581, -0.36026674511618886645}},
  };
  for (const auto& cs : cases) {
    CAPTURE(cs.x, cs.eps, cs.E0);
    REQUIRE(rel_dev(green_nr_airy(cs.x, cs.eps, cs.E0), cs.want) < 1e-13);
    const auto g = green_nr(cs.x, cs.eps, cs.E0);
    REQUIRE(rel_dev(g.value, cs.want) < 1e-10);
  }
  REQUIRE_THROWS_AS(green_nr_airy(1.0, -0.5, 0.0), DomainError);
}

TEST_CASE("field-free limits", "[propagator_nr]") {
  // Bound side: G = -e^{-kappa |x|}/kappa with kappa = sqrt(-2 eps).
  const auto ev1 = green_nr(1.0, -0.5, 0.0);
  REQUIRE(std::abs(ev1.value - Complex(-std::exp(-1.0), 0.0)) < 1e-12);
  const auto ev2 = green_nr(2.0, -0.5, 0.0);
  REQUIRE(std::abs(ev2.value - Complex(-std::exp(-2.0), 0.0)) < 1e-12);
  // Open side: G = -i e^{ikx}/k with k = sqrt(2 eps).
  const auto fr0 = green_nr(0.0, 0.5, 0.0);
  REQUIRE(std::abs(fr0.value - Complex(0.0, -1.0)) < 1e-12);
  const auto fr2 = green_nr(2.0, 0.5, 0.0);
  REQUIRE(std::abs(fr2.value - (-kI * std::exp(2.0 * kI))) < 1e-12);

  // Weak-field convergence toward the field-free bound value at x = 1.
  const double d1 = std::abs(green_nr_airy(1.0, -0.5, 1e-3) - Complex(-std::exp(-1.0), 0.0));
  const double d4 = std::abs(green_nr_airy(1.0, -0.5, 4e-3) - Complex(-std::exp(-1.0), 0.0));
  REQUIRE(d1 < 2e-3);
  REQUIRE(d4 / d1 > 2.0);
  REQUIRE(d4 / d1 < 6.0);
}

TEST_CASE("contact condition at the source", "[propagator_nr]") {
  // The derivative of G jumps by 2 across x = 0 (one-dimensional zero-range
  // normalization), independently of the field.
  const double h = 1e-5;
  for (double E0 : {1.0 / 7.0, 1.0}) {
    const Complex jump = (green_nr_airy(h, -0.5, E0) - 2.0 * green_nr_airy(0.0, -0.5, E0) +
                          green_nr_airy(-h, -0.5, E0)) /
                         h;
    REQUIRE(std::abs(jump - 2.0) < 1e-3);
  }
  const Complex jq = (green_nr(h, -0.5, 1.0 / 7.0).value -
                      2.0 * green_nr(0.0, -0.5, 1.0 / 7.0).value +
                      green_nr(-h, -0.5, 1.0 / 7.0).value) /
                     h;
  REQUIRE(std::abs(jq - 2.0) < 1e-3);
}

TEST_CASE("fixed-energy equation away from the source", "[propagator_nr]") {
  // (eps + d^2/2 + E0 x) G = 0 for x != 0, via a 5-point second derivative.
  const double eps = -0.5, E0 = 1.0 / 7.0, x = 2.0, h = 1e-3;
  auto g = [&](double xx) { return green_nr_airy(xx, eps, E0); };
  const Complex d2 = (-g(x + 2 * h) + 16.0 * g(x + h) - 30.0 * g(x) +
                      16.0 * g(x - h) - g(x - 2 * h)) /
                     (12.0 * h * h);
  const Complex resid = eps * g(x) + 0.5 * d2 + E0 * x * g(x);
  REQUIRE(std::abs(resid) < 1e-8 * std::abs(g(x)));
}

TEST_CASE("energy derivative of the spectral integral", "[propagator_nr]") {
  // Field-free closed forms: d/deps[-e^{-kappa x}/kappa] = -(x/kappa^2 +
  // 1/kappa^3) e^{-kappa x} and d/deps[-i/k] = i (2 eps)^{-3/2}.
  const auto dv = dgreen_deps_nr(2.0, -0.5, 0.0);
  REQUIRE(std::abs(dv.value - Complex(-3.0 * std::exp(-2.0), 0.0)) <
          1e-9 * std::abs(dv.value));
  const auto df = dgreen_deps_nr(0.0, 0.5, 0.0);
  REQUIRE(std::abs(df.value - Complex(0.0, 1.0)) < 1e-9);
}

TEST_CASE("imaginary energy shift is a smooth perturbation", "[propagator_nr]") {
  const double x = 1.0, eps = -0.5, E0 = 1.0 / 7.0;
  const Complex g0 = green_nr(x, eps, E0).value;
  const Complex dg = dgreen_deps_nr(x, eps, E0).value;
  ContourSpec s;
  s.eta = 1e-4;
  const Complex geta = green_nr(x, eps, E0, s).value;
  // G(eps + i eta) = G + i eta G' + O(eta^2)
  REQUIRE(std::abs(geta - g0 - kI * s.eta * dg) < 1e-7);
  s.eta = 1e-6;
  REQUIRE(std::abs(green_nr(x, eps, E0, s).value - g0) < 2e-6 * std::abs(dg) + 1e-12);
}

TEST_CASE("rotation invariance under the barrier", "[propagator_nr]") {
  ComplexValue r[3];
  const double angles[] = {0.45, 0.65, 0.85};
  for (int i = 0; i < 3; ++i) {
    ContourSpec s;
    s.rotation_angle = angles[i];
    r[i] = green_nr(1.0, -0.5, 1.0 / 7.0, s);
  }
  REQUIRE(std::abs(r[0].value - r[1].value) <= r[0].err_abs + r[1].err_abs + 1e-12);
  REQUIRE(std::abs(r[1].value - r[2].value) <= r[1].err_abs + r[2].err_abs + 1e-12);
}

TEST_CASE("hostile pinned geometry fails loudly", "[propagator_nr]") {
  // A nearly real pinned ray leaves the error estimate pinned at the panel
  // roundoff floor (~1e-15 here), so a tolerance far below that must exhaust
  // the refinement budget rather than silently report success.
  ContourSpec s;
  s.pin_geometry = true;
  s.head_arg = -0.05;
  s.tail_arg = -0.05;
  s.t_split = 1.0;
  s.max_subdivisions = 60;
  s.rel_tol = 1e-30;
  s.abs_tol = 1e-30;
  REQUIRE_THROWS_AS(green_nr(70.0, -0.5, 1.0 / 7.0, s), NonConvergence);
}
