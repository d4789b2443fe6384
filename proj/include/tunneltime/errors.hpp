#pragma once

#include <stdexcept>
#include <string>

namespace tunneltime {

// Quadrature did not reach the requested tolerance within its budget.
// Carries the best value and the achieved error bound so callers can decide.
class NonConvergence : public std::runtime_error {
public:
  NonConvergence(const std::string& msg, double achieved_err)
      : std::runtime_error(msg), err_abs(achieved_err) {}
  double err_abs;
};

// Integrand returned a non-finite value away from the t=0 endpoint.
class SingularIntegrand : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Phase derivative vanishes identically; stationary points are not isolated.
class DegenerateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Second derivative at a stationary point is (numerically) zero; the
// quadratic saddle formula does not apply.
class DegenerateSaddle : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// |G| underflowed; the phase (and its derivatives) are undefined.
class ZeroAmplitude : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A trajectory inversion (x -> time) failed to bracket/converge.
class InversionFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Parameters outside the validity domain of a formula (e.g. field too
// strong for a bound state to exist).
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad run configuration (unknown key, wrong type, out-of-range value).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace tunneltime
