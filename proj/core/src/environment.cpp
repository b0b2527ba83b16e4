#include "csiloc/environment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <string>
#include <thread>

#include "csiloc/error.hpp"
#include "csiloc/random.hpp"

namespace csiloc::env {
namespace {

constexpr int kAntennas = 3;
constexpr std::size_t kTones = 56;
constexpr std::uint16_t kChannelMhz = 2462;

// Purpose tags for derive_seed.
enum : std::uint64_t { kTagProfile = 1, kTagMean = 2, kTagPackets = 3, kTagCounts = 4 };

std::uint64_t as_u64(int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v)); }

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// QPSK pilot known to both ends.
channel::Complex pilot_symbol(std::size_t k) {
  const double phase = std::numbers::pi / 4.0 * static_cast<double>(2 * (k % 4) + 1);
  return std::polar(1.0, phase);
}

std::vector<std::size_t> imbalanced_counts(const ImbalancedCount& c, std::size_t n, Rng& rng) {
  std::vector<std::size_t> counts(n);
  auto draw = [&](std::size_t lo, std::size_t hi, double skew) {
    const double u = std::pow(uniform01(rng), skew);
    return lo + static_cast<std::size_t>(std::llround(u * static_cast<double>(hi - lo)));
  };
  if (n < 3) {
    for (auto& v : counts) v = draw(c.min, c.max, 1.0);
    return counts;
  }

  // Sorted slots: [0] = min, [mid] = median, [n-1] = max, the rest drawn on
  // either side of the median and then nudged to hit the total.
  const std::size_t mid = n / 2;
  counts[0] = c.min;
  counts[mid] = c.median;
  counts[n - 1] = c.max;
  for (std::size_t i = 1; i < mid; ++i) counts[i] = draw(c.min, c.median, 1.0);
  for (std::size_t i = mid + 1; i + 1 < n; ++i) counts[i] = draw(c.median, c.max, 3.0);

  auto sum = [&] {
    std::size_t s = 0;
    for (auto v : counts) s += v;
    return s;
  };
  std::vector<std::size_t> adjustable;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (i != mid) adjustable.push_back(i);
  auto lower_bound_of = [&](std::size_t i) { return i < mid ? c.min : c.median; };
  auto upper_bound_of = [&](std::size_t i) { return i < mid ? c.median : c.max; };

  std::size_t current = sum();
  bool moved = true;
  while (current != c.total && moved) {
    moved = false;
    for (std::size_t i : adjustable) {
      if (current == c.total) break;
      if (current < c.total && counts[i] < upper_bound_of(i)) {
        ++counts[i];
        ++current;
        moved = true;
      } else if (current > c.total && counts[i] > lower_bound_of(i)) {
        --counts[i];
        --current;
        moved = true;
      }
    }
  }
  std::shuffle(counts.begin(), counts.end(), rng);
  return counts;
}

std::uint8_t rssi_db(double power) {
  if (!(power > 0.0)) return 0;
  const double db = std::round(10.0 * std::log10(power));
  return static_cast<std::uint8_t>(std::clamp(db, 0.0, 255.0));
}

}  // namespace

void EnvironmentSpec::validate() const {
  if (cols <= 0 || rows <= 0) throw DomainError("environment needs positive rows and cols");
  if (!(cell_m > 0.0)) throw DomainError("environment cell size must be > 0");
}

void validate(GridLabel label, const EnvironmentSpec& env) {
  if (label.value() < 1 || label.value() > env.grid_count())
    throw DomainError("grid label " + std::to_string(label.value()) + " outside 1.." +
                      std::to_string(env.grid_count()));
}

GridCoords label_to_coords(GridLabel label, const EnvironmentSpec& env) {
  validate(label, env);
  const int zero = label.value() - 1;
  return {zero % env.cols + 1, zero / env.cols + 1};
}

GridLabel coords_to_label(GridCoords c, const EnvironmentSpec& env) {
  if (c.x < 1 || c.x > env.cols || c.y < 1 || c.y > env.rows)
    throw DomainError("grid coordinates (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                      ") outside the environment");
  return GridLabel((c.y - 1) * env.cols + c.x);
}

Position label_to_position(GridLabel label, const EnvironmentSpec& env) {
  const GridCoords c = label_to_coords(label, env);
  return {c.x * env.cell_m, c.y * env.cell_m};
}

void GenConfig::validate(const EnvironmentSpec& env) const {
  env.validate();
  if (grids < 1 || grids > env.grid_count())
    throw DomainError("grid count " + std::to_string(grids) + " outside 1.." + std::to_string(env.grid_count()));
  if (!(scatter_ratio >= 0.0 && scatter_ratio < 1.0)) throw DomainError("scatter ratio must lie in [0, 1)");
  if (!(csi_noise_sigma2 >= 0.0)) throw DomainError("CSI noise variance must be >= 0");
  if (tap_count_min < 1 || tap_count_max < tap_count_min) throw DomainError("invalid tap count range");
  if (!(rician_k_first_tap >= 0.0)) throw DomainError("Rician K must be >= 0");
  if (!(quantization_peak >= 1.0 && quantization_peak <= 32767.0))
    throw DomainError("quantization peak must lie in [1, 32767]");
  if (const auto* fixed = std::get_if<FixedCount>(&packets_per_grid); fixed && fixed->count < 1)
    throw DomainError("packets per grid must be >= 1");
  if (const auto* imb = std::get_if<ImbalancedCount>(&packets_per_grid)) {
    if (imb->min < 1 || imb->min > imb->median || imb->median > imb->max)
      throw DomainError("imbalance bounds must satisfy 1 <= min <= median <= max");
  }
}

channel::TapProfile grid_channel(GridLabel label, int rx_antenna, int tx_antenna, const GenConfig& config) {
  validate(label);
  if (rx_antenna < 1 || rx_antenna > kAntennas || tx_antenna < 1 || tx_antenna > kAntennas)
    throw DomainError("antenna indices must lie in 1..3");
  Rng rng(derive_seed(config.master_seed,
                      {kTagProfile, as_u64(label.value()), as_u64(rx_antenna), as_u64(tx_antenna)}));

  const int taps = uniform_int(rng, config.tap_count_min, config.tap_count_max);
  const double decay = 2.0 + 4.0 * uniform01(rng);  // samples

  channel::TapProfile profile;
  profile.fft_size = kTones;
  std::size_t delay = 0;
  for (int t = 0; t < taps; ++t) {
    if (t > 0) delay += static_cast<std::size_t>(uniform_int(rng, 1, 3));
    const double jitter = 0.5 + uniform01(rng);
    const double power = std::exp(-static_cast<double>(delay) / decay) * jitter;
    channel::FadingModel model = channel::Rayleigh{};
    if (t == 0) model = channel::Rician{config.rician_k_first_tap};
    profile.taps.push_back({delay, power, model});
  }
  return profile.normalized();
}

std::vector<channel::Complex> grid_mean_response(GridLabel label, int rx_antenna, int tx_antenna,
                                                 const GenConfig& config) {
  const channel::TapProfile profile = grid_channel(label, rx_antenna, tx_antenna, config);
  Rng rng(derive_seed(config.master_seed,
                      {kTagMean, as_u64(label.value()), as_u64(rx_antenna), as_u64(tx_antenna)}));
  return channel::freq_response(profile, rng).response;
}

std::vector<std::size_t> draw_packet_counts(const GenConfig& config) {
  const auto n = static_cast<std::size_t>(config.grids);
  if (const auto* fixed = std::get_if<FixedCount>(&config.packets_per_grid))
    return std::vector<std::size_t>(n, fixed->count);
  Rng rng(derive_seed(config.master_seed, {kTagCounts}));
  return imbalanced_counts(std::get<ImbalancedCount>(config.packets_per_grid), n, rng);
}

std::vector<codec::CsiPacket> synthesize_grid(GridLabel label, std::size_t count, const GenConfig& config) {
  config.validate();
  validate(label);

  // Static part of every subchannel plus the profile its scatter follows.
  std::vector<std::vector<channel::Complex>> mean(kAntennas * kAntennas);
  std::vector<channel::TapProfile> scatter_profile(kAntennas * kAntennas);
  for (int i = 1; i <= kAntennas; ++i) {
    for (int j = 1; j <= kAntennas; ++j) {
      const std::size_t s = static_cast<std::size_t>((i - 1) * kAntennas + (j - 1));
      mean[s] = grid_mean_response(label, i, j, config);
      scatter_profile[s] = grid_channel(label, i, j, config);
      for (auto& tap : scatter_profile[s].taps) tap.model = channel::Rayleigh{};
    }
  }

  std::vector<channel::Complex> pilot(kTones);
  for (std::size_t k = 0; k < kTones; ++k) pilot[k] = pilot_symbol(k);

  const double keep = std::sqrt(1.0 - config.scatter_ratio);
  const double spread = std::sqrt(config.scatter_ratio);
  Rng rng(derive_seed(config.master_seed, {kTagPackets, as_u64(label.value())}));

  std::vector<codec::CsiPacket> packets;
  packets.reserve(count);
  std::uint64_t timestamp = 1'000'000 * static_cast<std::uint64_t>(label.value());
  std::vector<channel::Complex> estimate(kAntennas * kAntennas * kTones);
  std::vector<channel::Complex> transmitted(kTones);

  for (std::size_t n = 0; n < count; ++n) {
    for (int i = 0; i < kAntennas; ++i) {
      // Per-packet receive-chain gain; the magnitude normalization cancels it.
      const double gain = 0.8 + 0.4 * uniform01(rng);
      for (int j = 0; j < kAntennas; ++j) {
        const std::size_t s = static_cast<std::size_t>(i * kAntennas + j);
        const auto scatter = channel::freq_response(scatter_profile[s], rng).response;
        for (std::size_t k = 0; k < kTones; ++k)
          transmitted[k] = gain * (keep * mean[s][k] + spread * scatter[k]) * pilot[k];
        const auto received = channel::apply_awgn(transmitted, config.csi_noise_sigma2, rng);
        const auto h = channel::estimate_csi(pilot, received).response;
        std::copy(h.begin(), h.end(), estimate.begin() + static_cast<std::ptrdiff_t>(s * kTones));
      }
    }

    double peak = 0.0;
    for (const auto& h : estimate) peak = std::max({peak, std::fabs(h.real()), std::fabs(h.imag())});
    const double scale = peak > 0.0 ? config.quantization_peak / peak : 1.0;

    codec::CsiPacket p;
    timestamp += 9'000 + static_cast<std::uint64_t>(uniform_int(rng, 0, 2'000));
    p.timestamp = timestamp;
    p.channel = kChannelMhz;
    p.err_info = 0;
    p.noise_floor = 0;
    p.rate = 11;
    p.bandwidth = 0;
    p.num_tones = kTones;
    p.nr = kAntennas;
    p.nc = kAntennas;
    p.csi = codec::CsiMatrix(kAntennas, kAntennas, kTones);

    double total_power = 0.0;
    std::uint8_t* rssi_slots[kAntennas] = {&p.rssi1, &p.rssi2, &p.rssi3};
    for (int i = 0; i < kAntennas; ++i) {
      double antenna_power = 0.0;
      for (int j = 0; j < kAntennas; ++j) {
        for (std::size_t k = 0; k < kTones; ++k) {
          const auto& h = estimate[(static_cast<std::size_t>(i * kAntennas + j)) * kTones + k];
          codec::CsiEntry& e = p.csi.at(i, j, k);
          e.re = static_cast<std::int16_t>(std::lround(h.real() * scale));
          e.im = static_cast<std::int16_t>(std::lround(h.imag() * scale));
          antenna_power += double(e.re) * e.re + double(e.im) * e.im;
        }
      }
      *rssi_slots[i] = rssi_db(antenna_power);
      total_power += antenna_power;
    }
    p.rssi = rssi_db(total_power);

    const auto index = static_cast<std::uint32_t>(n);
    p.payload = {static_cast<std::uint8_t>(index), static_cast<std::uint8_t>(index >> 8),
                 static_cast<std::uint8_t>(index >> 16), static_cast<std::uint8_t>(index >> 24),
                 static_cast<std::uint8_t>(label.value()), 0, 0, 0};
    codec::sync_lengths(p);
    packets.push_back(std::move(p));
  }
  return packets;
}

std::filesystem::path grid_log_name(GridLabel label) {
  return "grid_" + std::to_string(label.value()) + ".csilog";
}

std::vector<GridSummary> generate_dataset(const GenConfig& config, const EnvironmentSpec& env,
                                          const std::filesystem::path& out_dir, unsigned workers) {
  config.validate(env);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const std::vector<std::size_t> counts = draw_packet_counts(config);
  const auto grids = static_cast<std::size_t>(config.grids);
  std::vector<GridSummary> summary(grids);
  std::vector<std::exception_ptr> failures(grids);

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, grids));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t g = next++; g < grids; g = next++) {
      try {
        const GridLabel label(static_cast<int>(g + 1));
        const auto packets = synthesize_grid(label, counts[g], config);
        codec::write_log_file(out_dir / grid_log_name(label), packets);
        summary[g] = {label, packets.size()};
      } catch (...) {
        failures[g] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  std::ofstream manifest(out_dir / "manifest.csv");
  if (!manifest) throw IoError("cannot write manifest in " + out_dir.string());
  manifest << "label,X,Y,x_m,y_m,count\n";
  for (const GridSummary& s : summary) {
    const GridCoords c = label_to_coords(s.label, env);
    const Position pos = label_to_position(s.label, env);
    char line[128];
    std::snprintf(line, sizeof line, "%d,%d,%d,%.2f,%.2f,%zu\n", s.label.value(), c.x, c.y, pos.x, pos.y,
                  s.count);
    manifest << line;
  }
  if (!manifest) throw IoError("failed writing manifest in " + out_dir.string());
  return summary;
}

}  // namespace csiloc::env
