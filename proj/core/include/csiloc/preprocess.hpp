#pragma once

// CSI packet -> 9 x 56 fingerprint pipeline, target encoding, stratified
// splitting and the ".csids" dataset container.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "csiloc/codec.hpp"
#include "csiloc/environment.hpp"

namespace csiloc::prep {

inline constexpr std::size_t kAntennas = 3;
inline constexpr std::size_t kTones = 56;
inline constexpr std::size_t kRows = kAntennas * kAntennas;
inline constexpr std::size_t kFingerprintSize = kRows * kTones;
inline constexpr std::size_t kDefaultWindow = 8;

/// Real 3 x 3 x 56 array indexed (rx, tx, tone), zero-based, tone innermost.
struct AntennaCube {
  std::array<double, kFingerprintSize> values{};

  double& at(std::size_t i, std::size_t j, std::size_t k) { return values[(i * kAntennas + j) * kTones + k]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values[(i * kAntennas + j) * kTones + k];
  }
  std::span<double, kTones> pair(std::size_t i, std::size_t j) {
    return std::span<double, kTones>(values.data() + (i * kAntennas + j) * kTones, kTones);
  }
  std::span<const double, kTones> pair(std::size_t i, std::size_t j) const {
    return std::span<const double, kTones>(values.data() + (i * kAntennas + j) * kTones, kTones);
  }
};

struct Fingerprint {
  /// Row-major 9 x 56; row (i * 3 + j) holds antenna pair (i, j).
  std::array<double, kFingerprintSize> values{};
  env::GridLabel label{1};
  env::Position position{};

  double at(std::size_t row, std::size_t col) const { return values[row * kTones + col]; }
};

/// Per receive antenna, divides |csi|^2 by the 3 x 56 slice energy over 56
/// and takes the square root, so each receive slice has energy 56.
AntennaCube magnitude_normalize(const codec::CsiMatrix& csi);

/// Zero mean, unit population variance. Throws DomainError on a constant
/// vector.
std::vector<double> unit_power(std::span<const double> v);

/// Centered moving mean. A window of w covers [k - w/2, k + (w-1)/2]; at the
/// edges it shrinks to the available elements.
std::vector<double> moving_average(std::span<const double> v, std::size_t window = kDefaultWindow);

/// Row (i * 3 + j) of the fingerprint is the (i, j) antenna-pair vector.
std::array<double, kFingerprintSize> to_fingerprint(const AntennaCube& cube);
AntennaCube from_fingerprint(std::span<const double, kFingerprintSize> values);

/// magnitude_normalize -> per-pair unit_power -> per-pair moving_average ->
/// reshape. Throws PreconditionError when the packet fails filter_packets.
Fingerprint pipeline(const codec::CsiPacket& packet, env::GridLabel label,
                     std::size_t window = kDefaultWindow);

struct Targets {
  env::Position position;
  std::vector<double> one_hot;  // length grid_count, 1 at index label - 1
};

Targets encode_targets(env::GridLabel label, const env::EnvironmentSpec& env = {});

struct SplitFractions {
  double train = 0.75;
  double validation = 0.10;
  double test = 0.15;
};

struct DatasetSplit {
  std::vector<Fingerprint> train;
  std::vector<Fingerprint> validation;
  std::vector<Fingerprint> test;
};

/// Per-grid sizes from largest-remainder rounding of n * fractions.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitFractions& fractions = {});

/// Stratified by label and shuffled by seed. A partition of the input.
DatasetSplit split_dataset(std::span<const Fingerprint> fingerprints, std::uint64_t seed,
                           const SplitFractions& fractions = {});

// ".csids": magic "CSIDS01\0", u32 count, u8 rows = 9, u8 cols = 56,
// u16 reserved, then per record u16 label, f32 x, f32 y, 504 x f32.
inline constexpr char kDatasetMagic[8] = {'C', 'S', 'I', 'D', 'S', '0', '1', '\0'};

std::vector<std::uint8_t> encode_dataset(std::span<const Fingerprint> fingerprints);
std::vector<Fingerprint> decode_dataset(std::span<const std::uint8_t> bytes);
void write_dataset(const std::filesystem::path& path, std::span<const Fingerprint> fingerprints);
std::vector<Fingerprint> read_dataset(const std::filesystem::path& path);

}  // namespace csiloc::prep
