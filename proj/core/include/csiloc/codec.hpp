#pragma once

// CSI packet records and the little-endian ".csilog" container.
//
// Record layout (26-byte header, no padding):
//
//   off  size  field
//     0     8  timestamp (us)
//     8     2  csi_len (bytes) = nr * nc * num_tones * 4
//    10     2  channel (MHz)
//    12     1  err_info (0 = success)
//    13     1  noise_floor (dB, signed)
//    14     1  rate
//    15     1  bandwidth (0 = 20 MHz, 1 = 40 MHz)
//    16     1  num_tones
//    17     1  nr
//    18     1  nc
//    19     1  rssi
//    20     1  rssi1
//    21     1  rssi2
//    22     1  rssi3
//    23     2  payload_len (bytes)
//    25     1  reserved, always 0
//    26        csi_len bytes of (i16 re, i16 im), tone innermost, then
//              transmit antenna, receive antenna outermost
//              payload_len payload bytes
//
// File: magic "CSILOG1\0", u32 packet count, then the records.
//
// This layout is our own; it is not wire compatible with any vendor tool.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace csiloc::codec {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kRecordHeaderSize = 26;
inline constexpr std::size_t kLogHeaderSize = 12;
inline constexpr char kLogMagic[8] = {'C', 'S', 'I', 'L', 'O', 'G', '1', '\0'};

struct CsiEntry {
  std::int16_t re = 0;
  std::int16_t im = 0;

  friend bool operator==(const CsiEntry&, const CsiEntry&) = default;
};

/// nr x nc x num_tones complex int16 matrix, receive antenna outermost.
class CsiMatrix {
 public:
  CsiMatrix() = default;
  CsiMatrix(std::uint8_t nr, std::uint8_t nc, std::uint8_t num_tones);
  CsiMatrix(std::uint8_t nr, std::uint8_t nc, std::uint8_t num_tones, std::vector<CsiEntry> entries);

  std::uint8_t nr() const noexcept { return nr_; }
  std::uint8_t nc() const noexcept { return nc_; }
  std::uint8_t num_tones() const noexcept { return num_tones_; }

  /// Zero-based (receive antenna, transmit antenna, tone).
  CsiEntry& at(std::size_t i, std::size_t j, std::size_t k) { return entries_[index(i, j, k)]; }
  const CsiEntry& at(std::size_t i, std::size_t j, std::size_t k) const {
    return entries_[index(i, j, k)];
  }

  std::span<const CsiEntry> entries() const noexcept { return entries_; }
  std::span<CsiEntry> entries() noexcept { return entries_; }

  friend bool operator==(const CsiMatrix&, const CsiMatrix&) = default;

 private:
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * nc_ + j) * num_tones_ + k;
  }

  std::uint8_t nr_ = 0;
  std::uint8_t nc_ = 0;
  std::uint8_t num_tones_ = 0;
  std::vector<CsiEntry> entries_;
};

struct CsiPacket {
  std::uint64_t timestamp = 0;
  std::uint16_t csi_len = 0;
  std::uint16_t channel = 0;
  std::uint8_t err_info = 0;
  std::int8_t noise_floor = 0;
  std::uint8_t rate = 0;
  std::uint8_t bandwidth = 0;
  std::uint8_t num_tones = 0;
  std::uint8_t nr = 0;
  std::uint8_t nc = 0;
  std::uint8_t rssi = 0;
  std::uint8_t rssi1 = 0;
  std::uint8_t rssi2 = 0;
  std::uint8_t rssi3 = 0;
  std::uint16_t payload_len = 0;
  CsiMatrix csi;
  Bytes payload;

  friend bool operator==(const CsiPacket&, const CsiPacket&) = default;
};

/// Fills csi_len and payload_len from the matrix and payload sizes.
void sync_lengths(CsiPacket& packet);

/// Throws EncodeError naming the first violated field.
void validate(const CsiPacket& packet);

std::size_t encoded_size(const CsiPacket& packet);

Bytes encode_packet(const CsiPacket& packet);
void append_packet(Bytes& out, const CsiPacket& packet);

struct DecodedPacket {
  CsiPacket packet;
  std::size_t consumed = 0;
};

/// Decodes one record from the front of `bytes`; trailing bytes are left
/// untouched and reported through `consumed`.
DecodedPacket decode_packet_prefix(std::span<const std::uint8_t> bytes);

/// Decodes exactly one record; trailing bytes are a FormatError.
CsiPacket decode_packet(std::span<const std::uint8_t> bytes);

Bytes write_log(std::span<const CsiPacket> packets);

struct LogContents {
  std::vector<CsiPacket> packets;
  std::uint32_t declared_count = 0;
  /// Set when the body ended early, held a malformed record or carried
  /// trailing bytes. Packets before the problem are still returned.
  std::optional<std::string> diagnostic;
};

/// Throws FormatError on bad magic and TruncationError when the file header
/// itself is incomplete.
LogContents read_log(std::span<const std::uint8_t> bytes);

void write_log_file(const std::filesystem::path& path, std::span<const CsiPacket> packets);
LogContents read_log_file(const std::filesystem::path& path);

/// Keeps packets with err_info == 0, nr == nc == 3 and 56 tones, in order.
std::vector<CsiPacket> filter_packets(std::span<const CsiPacket> packets);
bool passes_filter(const CsiPacket& packet);

}  // namespace csiloc::codec
