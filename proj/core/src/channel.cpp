#include "csiloc/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "csiloc/error.hpp"

namespace csiloc::channel {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// a + jb with a, b ~ N(0, 1/2).
Complex unit_gaussian(Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const double a = normal(rng);
  const double b = normal(rng);
  return {a, b};
}

}  // namespace

void validate(const FadingModel& model) {
  std::visit(Overloaded{
                 [](const Awgn& m) {
                   if (!(m.sigma2 >= 0.0) || !std::isfinite(m.sigma2))
                     throw DomainError("AWGN noise variance must be finite and >= 0");
                 },
                 [](const Rayleigh&) {},
                 [](const Rician& m) {
                   if (!(m.k >= 0.0) || !std::isfinite(m.k))
                     throw DomainError("Rician K must be finite and >= 0");
                 },
                 [](const Nakagami& m) {
                   if (!(m.m >= 0.5) || !std::isfinite(m.m))
                     throw DomainError("Nakagami m must be finite and >= 0.5");
                   if (!(m.omega > 0.0) || !std::isfinite(m.omega))
                     throw DomainError("Nakagami omega must be finite and > 0");
                 },
             },
             model);
}

void TapProfile::validate() const {
  if (fft_size == 0) throw DomainError("tap profile fft_size must be positive");
  if (taps.empty()) throw DomainError("tap profile has no taps");
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const Tap& tap = taps[i];
    if (tap.delay >= fft_size)
      throw DomainError("tap " + std::to_string(i) + " delay " + std::to_string(tap.delay) +
                        " is not below fft_size " + std::to_string(fft_size));
    if (i > 0 && tap.delay <= taps[i - 1].delay)
      throw DomainError("tap delays must be strictly increasing (tap " + std::to_string(i) + ")");
    if (!(tap.power > 0.0) || !std::isfinite(tap.power))
      throw DomainError("tap " + std::to_string(i) + " power must be finite and > 0");
    channel::validate(tap.model);
  }
}

double TapProfile::total_power() const {
  double sum = 0.0;
  for (const Tap& tap : taps) sum += tap.power;
  return sum;
}

TapProfile TapProfile::normalized() const {
  TapProfile out = *this;
  const double total = total_power();
  if (!(total > 0.0)) throw DomainError("cannot normalize a profile with zero total power");
  for (Tap& tap : out.taps) tap.power /= total;
  return out;
}

Complex sample_coefficient(const FadingModel& model, Rng& rng) {
  validate(model);
  return std::visit(
      Overloaded{
          [](const Awgn&) { return Complex{1.0, 0.0}; },
          [&](const Rayleigh&) { return unit_gaussian(rng); },
          [&](const Rician& m) {
            // D = sqrt(2 sigma_s^2 K) with sigma_s^2 = 1/2; dividing by
            // sqrt(D^2 + 1) makes E[|h|^2] = 1.
            const double d = std::sqrt(m.k);
            const Complex scatter = unit_gaussian(rng);
            return (Complex{d, 0.0} + scatter) / std::sqrt(d * d + 1.0);
          },
          [&](const Nakagami& m) {
            std::gamma_distribution<double> gamma(m.m, m.omega / m.m);
            const double amplitude = std::sqrt(gamma(rng));
            const double phase = std::numbers::pi - 2.0 * std::numbers::pi * uniform01(rng);
            return std::polar(amplitude, phase);
          },
      },
      model);
}

double bessel_i0(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 100000; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

double bessel_i0_scaled(double x) {
  x = std::fabs(x);
  if (x < 50.0) return bessel_i0(x) * std::exp(-x);
  const double log_q = 2.0 * std::log(0.5 * x);
  double log_term = -x;
  double sum = std::exp(log_term);
  for (int k = 1; k < 1000000; ++k) {
    log_term += log_q - 2.0 * std::log(static_cast<double>(k));
    const double term = std::exp(log_term);
    sum += term;
    if (k > x && term < 1e-16 * sum) break;
  }
  return sum;
}

double pdf_amplitude(const FadingModel& model, double r) {
  validate(model);
  if (!(r >= 0.0)) throw DomainError("amplitude must be >= 0, got " + std::to_string(r));
  return std::visit(
      Overloaded{
          [](const Awgn&) -> double {
            throw DomainError("AWGN channel amplitude is a point mass at 1 and has no density");
          },
          [&](const Rayleigh&) { return 2.0 * r * std::exp(-r * r); },
          [&](const Rician& m) {
            const double k = m.k;
            const double x = 2.0 * r * std::sqrt(k * (k + 1.0));
            return 2.0 * r * (1.0 + k) * std::exp(-k - (1.0 + k) * r * r + x) * bessel_i0_scaled(x);
          },
          [&](const Nakagami& m) {
            const double shape = m.m;
            const double omega = m.omega;
            if (r == 0.0) {
              return shape == 0.5 ? 2.0 * std::sqrt(shape / omega) / std::tgamma(shape) : 0.0;
            }
            const double log_pdf = std::log(2.0) + shape * std::log(shape) - shape * std::log(omega) -
                                   std::lgamma(shape) + (2.0 * shape - 1.0) * std::log(r) -
                                   r * r * shape / omega;
            return std::exp(log_pdf);
          },
      },
      model);
}

std::vector<Complex> draw_impulse_response(const TapProfile& profile, Rng& rng) {
  profile.validate();
  std::vector<Complex> impulse(profile.fft_size, Complex{0.0, 0.0});
  for (const Tap& tap : profile.taps) {
    impulse[tap.delay] = std::sqrt(tap.power) * sample_coefficient(tap.model, rng);
  }
  return impulse;
}

std::vector<Complex> spectrum(std::span<const Complex> impulse) {
  const std::size_t n = impulse.size();
  std::vector<Complex> twiddle(n);
  for (std::size_t i = 0; i < n; ++i) {
    twiddle[i] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  std::vector<Complex> out(n, Complex{0.0, 0.0});
  for (std::size_t t = 0; t < n; ++t) {
    if (impulse[t] == Complex{0.0, 0.0}) continue;
    for (std::size_t k = 0; k < n; ++k) out[k] += impulse[t] * twiddle[(k * t) % n];
  }
  return out;
}

ChannelRealization freq_response(const TapProfile& profile, Rng& rng) {
  const std::vector<Complex> impulse = draw_impulse_response(profile, rng);
  return {spectrum(impulse)};
}

std::vector<Complex> apply_awgn(std::span<const Complex> signal, double sigma2, Rng& rng) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
    throw DomainError("noise variance must be finite and >= 0");
  std::vector<Complex> out(signal.begin(), signal.end());
  if (sigma2 == 0.0) return out;
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * sigma2));
  for (Complex& y : out) {
    const double re = normal(rng);
    const double im = normal(rng);
    y += Complex{re, im};
  }
  return out;
}

ChannelRealization estimate_csi(std::span<const Complex> pilot, std::span<const Complex> received) {
  if (pilot.size() != received.size())
    throw PreconditionError("pilot has " + std::to_string(pilot.size()) + " bins but received has " +
                            std::to_string(received.size()));
  ChannelRealization est;
  est.response.resize(pilot.size());
  for (std::size_t k = 0; k < pilot.size(); ++k) {
    if (pilot[k] == Complex{0.0, 0.0})
      throw DomainError("pilot symbol at bin " + std::to_string(k) + " is zero");
    est.response[k] = received[k] / pilot[k];
  }
  return est;
}

double doppler_shift(double carrier_hz, double speed_mps, double theta_rad, double propagation_speed) {
  if (!(propagation_speed > 0.0)) throw DomainError("propagation speed must be > 0");
  return carrier_hz * speed_mps * std::cos(theta_rad) / propagation_speed;
}

}  // namespace csiloc::channel
