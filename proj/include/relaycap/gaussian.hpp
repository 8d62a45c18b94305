// Closed forms for the Gaussian relay channel Y = X + Z, Y1 = X + Z1 with
// fully correlated noises (rho = +1 or -1) and a rate-R0 noiseless link.
// rho = 0 (independent noises) is a long-standing open problem and is
// rejected rather than approximated.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace relaycap {

class UnsupportedRhoError : public std::domain_error {
 public:
  explicit UnsupportedRhoError(double rho)
      : std::domain_error(rho == 0.0
                              ? "rho = 0: capacity of the independent-noise Gaussian relay is an "
                                "open problem; refusing to return a bound"
                              : "rho = " + std::to_string(rho) +
                                    ": only rho in {-1, +1} is supported"),
        rho(rho) {}
  double rho;
};

struct GaussianRelaySpec {
  double power;  // signal power P, linear units
  double noise;  // noise variance N, linear units
  double rho;    // noise correlation, must be exactly -1 or +1

  GaussianRelaySpec(double power, double noise, double rho)
      : power(power), noise(noise), rho(rho) {
    if (power <= 0.0) throw std::invalid_argument("gaussian: power must be positive");
    if (noise <= 0.0) throw std::invalid_argument("gaussian: noise variance must be positive");
    if (rho != -1.0 && rho != 1.0) throw UnsupportedRhoError(rho);
  }
};

// Direct-link capacity, relay ignored: (1/2) log2(1 + P/N).
inline double gaussian_c0(const GaussianRelaySpec& spec) {
  return 0.5 * std::log2(1.0 + spec.power / spec.noise);
}

namespace detail {
inline void require_rho_minus1(const GaussianRelaySpec& spec, const char* fn) {
  if (spec.rho != -1.0)
    throw std::domain_error(std::string(fn) + ": parametric description requires rho = -1");
}
}  // namespace detail

// Decoding rate of the test channel Yhat1 = Y1 + U, U ~ N(0, sigma2):
// R*(sigma2) = (1/2) log2( ((P+N) sigma2 + 4PN) / (N sigma2) ).
inline double gaussian_cf_rstar(const GaussianRelaySpec& spec, double sigma2) {
  detail::require_rho_minus1(spec, "gaussian_cf_rstar");
  if (sigma2 <= 0.0) throw std::invalid_argument("gaussian_cf_rstar: sigma2 must be positive");
  const double P = spec.power, N = spec.noise;
  return 0.5 * std::log2(((P + N) * sigma2 + 4.0 * P * N) / (N * sigma2));
}

// Link cost of the same test channel:
// R0(sigma2) = (1/2) log2( ((P+N) sigma2 + 4PN) / ((P+N) sigma2) ).
inline double gaussian_cf_r0(const GaussianRelaySpec& spec, double sigma2) {
  detail::require_rho_minus1(spec, "gaussian_cf_r0");
  if (sigma2 <= 0.0) throw std::invalid_argument("gaussian_cf_r0: sigma2 must be positive");
  const double P = spec.power, N = spec.noise;
  return 0.5 * std::log2(((P + N) * sigma2 + 4.0 * P * N) / ((P + N) * sigma2));
}

// Solves R0(sigma2) = r0 for sigma2: sigma2 = 4PN / ((P+N)(2^{2 r0} - 1)).
inline double gaussian_invert_r0(const GaussianRelaySpec& spec, double r0) {
  detail::require_rho_minus1(spec, "gaussian_invert_r0");
  if (r0 <= 0.0) throw std::invalid_argument("gaussian_invert_r0: r0 must be positive");
  const double P = spec.power, N = spec.noise;
  return 4.0 * P * N / ((P + N) * (std::exp2(2.0 * r0) - 1.0));
}

// rho = +1: the relay sees what the receiver sees and is useless, C = C(0).
// rho = -1: (Y, Y1) determine X, and C = C(0) + r0.
inline double gaussian_capacity(const GaussianRelaySpec& spec, double r0) {
  if (r0 < 0.0) throw std::invalid_argument("gaussian_capacity: r0 must be nonnegative");
  const double c0 = gaussian_c0(spec);
  return spec.rho == 1.0 ? c0 : c0 + r0;
}

}  // namespace relaycap
