#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "csiloc/environment.hpp"
#include "csiloc/error.hpp"
#include "csiloc/preprocess.hpp"
#include "support/oracles.hpp"

using namespace csiloc;
using namespace csiloc::prep;

namespace {

codec::CsiMatrix random_csi(Rng& rng) {
  codec::CsiMatrix m(3, 3, 56);
  for (auto& e : m.entries())
    e = {static_cast<std::int16_t>(static_cast<int>(rng() % 2001) - 1000),
         static_cast<std::int16_t>(static_cast<int>(rng() % 2001) - 1000)};
  return m;
}

std::vector<double> random_vector(Rng& rng, std::size_t n = 56) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng) * 3.0 + 1.5;
  return v;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double pop_variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

std::vector<Fingerprint> labelled(int grids, int per_grid) {
  std::vector<Fingerprint> out;
  for (int g = 1; g <= grids; ++g)
    for (int i = 0; i < per_grid; ++i) {
      Fingerprint f;
      f.label = env::GridLabel(g);
      f.values[0] = g * 1000 + i;  // identity tag
      out.push_back(f);
    }
  return out;
}

std::multiset<double> tags(const std::vector<Fingerprint>& v) {
  std::multiset<double> s;
  for (const auto& f : v) s.insert(f.values[0]);
  return s;
}

}  // namespace

TEST(MagnitudeNormalize, AllOnes) {
  codec::CsiMatrix m(3, 3, 56);
  for (auto& e : m.entries()) e = {1, 0};
  const AntennaCube c = magnitude_normalize(m);
  for (double v : c.values) EXPECT_NEAR(v, 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(MagnitudeNormalize, EnergyPerReceiveAntenna) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const AntennaCube c = magnitude_normalize(random_csi(rng));
    for (std::size_t i = 0; i < 3; ++i) {
      double e = 0.0;
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 56; ++k) e += c.at(i, j, k) * c.at(i, j, k);
      EXPECT_NEAR(e, 56.0, 1e-9);
    }
  }
}

TEST(MagnitudeNormalize, ScaleInvariantPerAntenna) {
  Rng rng(2);
  codec::CsiMatrix m(3, 3, 56);
  for (auto& e : m.entries())
    e = {static_cast<std::int16_t>(static_cast<int>(rng() % 201) - 100),
         static_cast<std::int16_t>(static_cast<int>(rng() % 201) - 100)};
  codec::CsiMatrix scaled = m;
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 56; ++k) {
      auto& e = scaled.at(1, j, k);
      e = {static_cast<std::int16_t>(e.re * 7), static_cast<std::int16_t>(e.im * 7)};
    }
  const AntennaCube a = magnitude_normalize(m), b = magnitude_normalize(scaled);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 56; ++k) EXPECT_NEAR(a.at(1, j, k), b.at(1, j, k), 1e-14);
}

TEST(MagnitudeNormalize, DegenerateAntenna) {
  Rng rng(3);
  codec::CsiMatrix m = random_csi(rng);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 56; ++k) m.at(2, j, k) = {0, 0};
  EXPECT_THROW(magnitude_normalize(m), DomainError);
}

TEST(UnitPower, AlternatingUnchanged) {
  std::vector<double> v(56);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i % 2 ? -1.0 : 1.0;
  const auto out = unit_power(v);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(out[i], v[i], 1e-15);
}

TEST(UnitPower, RandomVectors) {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const auto out = unit_power(random_vector(rng));
    EXPECT_NEAR(mean(out), 0.0, 1e-9);
    EXPECT_NEAR(pop_variance(out), 1.0, 1e-9);
  }
}

TEST(UnitPower, AffineInvariance) {
  Rng rng(5);
  const auto v = random_vector(rng);
  const auto base = unit_power(v);
  for (double a : {2.5, -0.3}) {
    std::vector<double> w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = a * v[i] + 4.0;
    const auto out = unit_power(w);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(out[i], (a > 0 ? 1 : -1) * base[i], 1e-12);
  }
}

TEST(UnitPower, ConstantRejected) { EXPECT_THROW(unit_power(std::vector<double>(56, 2.0)), DomainError); }

TEST(MovingAverage, Constant) {
  const auto out = moving_average(std::vector<double>(56, 3.25));
  for (double v : out) EXPECT_DOUBLE_EQ(v, 3.25);
}

TEST(MovingAverage, ImpulseSpreadsOverEightOutputs) {
  std::vector<double> v(56, 0.0);
  v[28] = 1.0;
  const auto out = moving_average(v, 8);
  for (std::size_t k = 0; k < 56; ++k) {
    // Output k covers [k-4, k+3], so index 28 is covered for k in [25, 32].
    const double expected = (k >= 25 && k <= 32) ? 1.0 / 8.0 : 0.0;
    EXPECT_DOUBLE_EQ(out[k], expected) << k;
  }
}

TEST(MovingAverage, MatchesWindowedMeanOracle) {
  Rng rng(6);
  for (std::size_t w : {1u, 2u, 3u, 8u, 9u, 56u, 80u}) {
    const auto v = random_vector(rng);
    EXPECT_EQ(moving_average(v, w), oracle::windowed_mean(v, w)) << "window " << w;
  }
  EXPECT_THROW(moving_average(std::vector<double>(5, 1.0), 0), DomainError);
}

TEST(MovingAverage, RampInteriorShift) {
  std::vector<double> v(56);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  const auto out = moving_average(v, 8);
  // Mean of k-4..k+3 is k - 0.5.
  for (std::size_t k = 4; k + 3 < 56; ++k) EXPECT_DOUBLE_EQ(out[k], static_cast<double>(k) - 0.5);
}

TEST(Fingerprint, RowOrderAndRoundTrip) {
  AntennaCube c;
  for (std::size_t k = 0; k < 56; ++k) {
    c.at(0, 0, k) = 5.0;
    c.at(2, 2, k) = 7.0;
    c.at(1, 2, k) = static_cast<double>(k);
  }
  const auto f = to_fingerprint(c);
  for (std::size_t k = 0; k < 56; ++k) {
    EXPECT_EQ(f[0 * 56 + k], 5.0);
    EXPECT_EQ(f[8 * 56 + k], 7.0);
    EXPECT_EQ(f[5 * 56 + k], static_cast<double>(k));
  }
  EXPECT_EQ(from_fingerprint(f).values, c.values);
}

TEST(Pipeline, SyntheticPacket) {
  env::GenConfig cfg;
  cfg.master_seed = 1;
  const auto packets = env::synthesize_grid(env::GridLabel(3), 2, cfg);
  const Fingerprint f = pipeline(packets[0], env::GridLabel(3));
  EXPECT_EQ(f.label.value(), 3);
  EXPECT_NEAR(f.position.x, 1.35, 1e-12);
  for (double v : f.values) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(f.values, pipeline(packets[0], env::GridLabel(3)).values);
}

TEST(Pipeline, RejectsFilteredPacket) {
  codec::CsiPacket p;
  p.num_tones = 56;
  p.nr = 3;
  p.nc = 2;
  p.csi = codec::CsiMatrix(3, 2, 56);
  codec::sync_lengths(p);
  EXPECT_THROW(pipeline(p, env::GridLabel(1)), PreconditionError);
}

TEST(Targets, Encoding) {
  const Targets t = encode_targets(env::GridLabel(63));
  ASSERT_EQ(t.one_hot.size(), 63u);
  EXPECT_EQ(t.one_hot[62], 1.0);
  double sum = 0.0;
  for (double v : t.one_hot) sum += v;
  EXPECT_EQ(sum, 1.0);
  const Targets u = encode_targets(env::coords_to_label({3, 1}));
  EXPECT_NEAR(u.position.x, 1.35, 1e-12);
  EXPECT_NEAR(u.position.y, 0.45, 1e-12);
}

TEST(Split, SizesLargestRemainder) {
  EXPECT_EQ(split_sizes(100), (std::array<std::size_t, 3>{75, 10, 15}));
  EXPECT_EQ(split_sizes(1), (std::array<std::size_t, 3>{1, 0, 0}));
  const auto s = split_sizes(1343);
  EXPECT_EQ(s[0] + s[1] + s[2], 1343u);
}

TEST(Split, PartitionStratifiedDeterministic) {
  const auto data = labelled(5, 37);
  const DatasetSplit a = split_dataset(data, 9);
  std::multiset<double> all = tags(a.train);
  for (double t : tags(a.validation)) all.insert(t);
  for (double t : tags(a.test)) all.insert(t);
  EXPECT_EQ(all, tags(data));
  std::map<int, int> per_label;
  for (const auto& f : a.train) ++per_label[f.label.value()];
  for (const auto& [label, n] : per_label) EXPECT_EQ(static_cast<std::size_t>(n), split_sizes(37)[0]) << label;
  const DatasetSplit b = split_dataset(data, 9);
  EXPECT_EQ(tags(a.test), tags(b.test));
  std::vector<double> order_a, order_b;
  for (const auto& f : a.train) order_a.push_back(f.values[0]);
  for (const auto& f : split_dataset(data, 10).train) order_b.push_back(f.values[0]);
  EXPECT_NE(order_a, order_b);
}

TEST(Split, Errors) {
  EXPECT_THROW(split_dataset({}, 1), PreconditionError);
  SplitFractions bad{0.5, 0.5, 0.5};
  EXPECT_THROW(split_dataset(labelled(1, 4), 1, bad), DomainError);
}

TEST(DatasetFile, RoundTripAsFloat) {
  env::GenConfig cfg;
  std::vector<Fingerprint> fps;
  for (const auto& p : env::synthesize_grid(env::GridLabel(10), 3, cfg)) fps.push_back(pipeline(p, env::GridLabel(10)));
  const auto path = std::filesystem::temp_directory_path() / "csiloc_prep.csids";
  write_dataset(path, fps);
  const auto back = read_dataset(path);
  ASSERT_EQ(back.size(), fps.size());
  for (std::size_t i = 0; i < fps.size(); ++i) {
    EXPECT_EQ(back[i].label, fps[i].label);
    for (std::size_t k = 0; k < kFingerprintSize; ++k)
      EXPECT_EQ(back[i].values[k], static_cast<double>(static_cast<float>(fps[i].values[k])));
  }
  std::filesystem::remove(path);
}

TEST(DatasetFile, Malformed) {
  auto bytes = encode_dataset(labelled(1, 2));
  EXPECT_THROW(decode_dataset(std::span(bytes).first(bytes.size() - 1)), FormatError);
  bytes[0] = 'Z';
  EXPECT_THROW(decode_dataset(bytes), FormatError);
}
