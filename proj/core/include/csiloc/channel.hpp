#pragma once

// Statistical fading channels, multipath frequency responses on the OFDM
// subcarrier grid, pilot-based CSI estimation and the Doppler formula.

#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "csiloc/random.hpp"

namespace csiloc::channel {

using Complex = std::complex<double>;

inline constexpr std::size_t kDefaultFftSize = 56;
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Additive white Gaussian noise only; the coefficient itself is 1 + 0j.
struct Awgn {
  double sigma2 = 0.0;
};

/// Unit mean-square Rayleigh fading: h = a + jb, a, b ~ N(0, 1/2).
struct Rayleigh {};

/// Rician fading with deterministic-to-scattered power ratio `k`,
/// normalized so that E[|h|^2] = 1.
struct Rician {
  double k = 0.0;
};

/// Nakagami-m fading with shape `m` >= 0.5 and spread `omega` = E[|h|^2].
struct Nakagami {
  double m = 1.0;
  double omega = 1.0;
};

using FadingModel = std::variant<Awgn, Rayleigh, Rician, Nakagami>;

/// Throws DomainError when a model parameter is outside its domain.
void validate(const FadingModel& model);

struct Tap {
  std::size_t delay = 0;  // in samples
  double power = 1.0;
  FadingModel model = Rayleigh{};
};

/// Discrete multipath delay profile. Delays strictly increase and stay below
/// fft_size.
struct TapProfile {
  std::vector<Tap> taps;
  std::size_t fft_size = kDefaultFftSize;

  void validate() const;
  double total_power() const;
  /// Copy with tap powers scaled to sum to one.
  TapProfile normalized() const;
};

/// Per-subcarrier channel coefficients H[k].
struct ChannelRealization {
  std::vector<Complex> response;
};

Complex sample_coefficient(const FadingModel& model, Rng& rng);

/// Closed-form amplitude density p(r). Throws DomainError for r < 0 and for
/// Awgn, whose amplitude is degenerate (a point mass at 1).
double pdf_amplitude(const FadingModel& model, double r);

/// Modified Bessel function of the first kind, order zero, by power series.
double bessel_i0(double x);
/// exp(-|x|) * I0(x), summed in the log domain so large arguments do not
/// overflow.
double bessel_i0_scaled(double x);

/// Draws one coefficient per tap (scaled by sqrt(power)) and places it at its
/// delay in a length-fft_size impulse response.
std::vector<Complex> draw_impulse_response(const TapProfile& profile, Rng& rng);

/// DFT with H[k] = sum_t h[t] exp(-j 2 pi k t / N), N = impulse.size().
std::vector<Complex> spectrum(std::span<const Complex> impulse);

/// spectrum(draw_impulse_response(profile, rng)).
ChannelRealization freq_response(const TapProfile& profile, Rng& rng);

/// y = x + n with n complex Gaussian of total variance sigma2.
std::vector<Complex> apply_awgn(std::span<const Complex> signal, double sigma2, Rng& rng);

/// Least-squares per-subcarrier estimate H[k] = Y[k] / X[k].
ChannelRealization estimate_csi(std::span<const Complex> pilot, std::span<const Complex> received);

/// f_d = f_c * v * cos(theta) / c.
double doppler_shift(double carrier_hz, double speed_mps, double theta_rad,
                     double propagation_speed = kSpeedOfLight);

}  // namespace csiloc::channel
