#include <algorithm>
#include <cmath>
#include <string>

#include "csiloc/error.hpp"
#include "csiloc/preprocess.hpp"
#include "io_util.hpp"

namespace csiloc::prep {
namespace {

constexpr std::size_t kHeaderSize = 16;
constexpr std::size_t kRecordSize = 2 + 4 + 4 + 4 * kFingerprintSize;

}  // namespace

std::vector<std::uint8_t> encode_dataset(std::span<const Fingerprint> fingerprints) {
  std::vector<std::uint8_t> out(std::begin(kDatasetMagic), std::end(kDatasetMagic));
  out.reserve(kHeaderSize + fingerprints.size() * kRecordSize);
  detail::put(out, static_cast<std::uint32_t>(fingerprints.size()));
  detail::put(out, static_cast<std::uint8_t>(kRows));
  detail::put(out, static_cast<std::uint8_t>(kTones));
  detail::put(out, std::uint16_t{0});
  for (const Fingerprint& fp : fingerprints) {
    detail::put(out, static_cast<std::uint16_t>(fp.label.value()));
    detail::put(out, static_cast<float>(fp.position.x));
    detail::put(out, static_cast<float>(fp.position.y));
    for (double v : fp.values) detail::put(out, static_cast<float>(v));
  }
  return out;
}

std::vector<Fingerprint> decode_dataset(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw TruncationError("dataset header truncated", kHeaderSize, bytes.size());
  if (!std::equal(std::begin(kDatasetMagic), std::end(kDatasetMagic), bytes.begin(),
                  [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; }))
    throw FormatError("bad magic: not a CSIDS01 file");
  detail::Reader in(bytes.subspan(sizeof(kDatasetMagic)));
  const auto count = in.get<std::uint32_t>();
  const auto rows = in.get<std::uint8_t>();
  const auto cols = in.get<std::uint8_t>();
  in.get<std::uint16_t>();
  if (rows != kRows || cols != kTones)
    throw FormatError("dataset fingerprints are " + std::to_string(rows) + "x" + std::to_string(cols) +
                      ", expected 9x56");
  const std::size_t needed = kHeaderSize + std::size_t{count} * kRecordSize;
  if (bytes.size() < needed) throw TruncationError("dataset body truncated", needed, bytes.size());
  if (bytes.size() > needed) throw FormatError("trailing bytes after dataset records");

  std::vector<Fingerprint> out(count);
  for (Fingerprint& fp : out) {
    const int label = in.get<std::uint16_t>();
    if (label < 1) throw FormatError("dataset record has label 0");
    fp.label = env::GridLabel(label);
    fp.position.x = in.get<float>();
    fp.position.y = in.get<float>();
    for (double& v : fp.values) {
      v = in.get<float>();
      if (!std::isfinite(v)) throw FormatError("dataset record holds a non-finite value");
    }
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, std::span<const Fingerprint> fingerprints) {
  detail::write_file(path, encode_dataset(fingerprints));
}

std::vector<Fingerprint> read_dataset(const std::filesystem::path& path) {
  return decode_dataset(detail::read_file(path));
}

}  // namespace csiloc::prep
