#include "csiloc/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "csiloc/error.hpp"
#include "csiloc/random.hpp"

namespace csiloc::prep {

AntennaCube magnitude_normalize(const codec::CsiMatrix& csi) {
  if (csi.nr() != kAntennas || csi.nc() != kAntennas || csi.num_tones() != kTones)
    throw PreconditionError("magnitude normalization needs a 3x3x56 CSI matrix");
  AntennaCube out;
  for (std::size_t i = 0; i < kAntennas; ++i) {
    double energy = 0.0;
    for (std::size_t j = 0; j < kAntennas; ++j) {
      for (std::size_t k = 0; k < kTones; ++k) {
        const codec::CsiEntry& e = csi.at(i, j, k);
        const double power = double(e.re) * e.re + double(e.im) * e.im;
        out.at(i, j, k) = power;
        energy += power;
      }
    }
    if (!(energy > 0.0))
      throw DomainError("receive antenna " + std::to_string(i + 1) + " has an all-zero CSI slice");
    const double mean_power = energy / static_cast<double>(kTones);
    for (std::size_t j = 0; j < kAntennas; ++j)
      for (std::size_t k = 0; k < kTones; ++k) out.at(i, j, k) = std::sqrt(out.at(i, j, k) / mean_power);
  }
  return out;
}

std::vector<double> unit_power(std::span<const double> v) {
  if (v.empty()) throw DomainError("unit_power of an empty vector");
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= n;
  const double sd = std::sqrt(var);
  if (!(sd > 1e-12)) throw DomainError("unit_power of a constant vector (zero variance)");
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = (v[k] - mean) / sd;
  return out;
}

std::vector<double> moving_average(std::span<const double> v, std::size_t window) {
  if (window < 1) throw DomainError("moving average window must be >= 1");
  const std::size_t before = window / 2;
  const std::size_t after = (window - 1) / 2;
  const std::size_t n = v.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k >= before ? k - before : 0;
    const std::size_t hi = std::min(n - 1, k + after);
    double sum = 0.0;
    for (std::size_t t = lo; t <= hi; ++t) sum += v[t];
    out[k] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::array<double, kFingerprintSize> to_fingerprint(const AntennaCube& cube) {
  // Cube storage is already (i, j) major with tones innermost.
  return cube.values;
}

AntennaCube from_fingerprint(std::span<const double, kFingerprintSize> values) {
  AntennaCube cube;
  std::copy(values.begin(), values.end(), cube.values.begin());
  return cube;
}

Fingerprint pipeline(const codec::CsiPacket& packet, env::GridLabel label, std::size_t window) {
  if (!codec::passes_filter(packet))
    throw PreconditionError("packet fails the validity filter (err_info=" + std::to_string(packet.err_info) +
                            ", nr=" + std::to_string(packet.nr) + ", nc=" + std::to_string(packet.nc) +
                            ", num_tones=" + std::to_string(packet.num_tones) + ")");
  AntennaCube cube = magnitude_normalize(packet.csi);
  for (std::size_t i = 0; i < kAntennas; ++i) {
    for (std::size_t j = 0; j < kAntennas; ++j) {
      auto pair = cube.pair(i, j);
      const auto smoothed = moving_average(unit_power(pair), window);
      std::copy(smoothed.begin(), smoothed.end(), pair.begin());
    }
  }
  Fingerprint fp;
  fp.values = to_fingerprint(cube);
  fp.label = label;
  fp.position = env::label_to_position(label);
  return fp;
}

Targets encode_targets(env::GridLabel label, const env::EnvironmentSpec& env) {
  Targets t;
  t.position = env::label_to_position(label, env);
  t.one_hot.assign(static_cast<std::size_t>(env.grid_count()), 0.0);
  t.one_hot[label.index()] = 1.0;
  return t;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitFractions& f) {
  const double parts[3] = {f.train, f.validation, f.test};
  if (std::fabs(parts[0] + parts[1] + parts[2] - 1.0) > 1e-9 || parts[0] < 0 || parts[1] < 0 || parts[2] < 0)
    throw DomainError("split fractions must be non-negative and sum to 1");
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int s = 0; s < 3; ++s) {
    const double exact = parts[s] * static_cast<double>(n);
    sizes[s] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[s] = exact - static_cast<double>(sizes[s]);
    assigned += sizes[s];
  }
  // Largest remainder; ties go to the earlier subset.
  while (assigned < n) {
    int best = 0;
    for (int s = 1; s < 3; ++s)
      if (remainder[s] > remainder[best]) best = s;
    ++sizes[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  return sizes;
}

DatasetSplit split_dataset(std::span<const Fingerprint> fingerprints, std::uint64_t seed,
                           const SplitFractions& fractions) {
  if (fingerprints.empty()) throw PreconditionError("cannot split an empty dataset");
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t n = 0; n < fingerprints.size(); ++n) by_label[fingerprints[n].label.value()].push_back(n);

  DatasetSplit split;
  for (auto& [label, members] : by_label) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(label)}));
    std::shuffle(members.begin(), members.end(), rng);
    const auto sizes = split_sizes(members.size(), fractions);
    std::size_t pos = 0;
    for (std::size_t n = 0; n < sizes[0]; ++n) split.train.push_back(fingerprints[members[pos++]]);
    for (std::size_t n = 0; n < sizes[1]; ++n) split.validation.push_back(fingerprints[members[pos++]]);
    for (std::size_t n = 0; n < sizes[2]; ++n) split.test.push_back(fingerprints[members[pos++]]);
  }
  return split;
}

}  // namespace csiloc::prep
