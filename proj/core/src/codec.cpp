#include "csiloc/codec.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "csiloc/error.hpp"
#include "io_util.hpp"

namespace csiloc::codec {
namespace {

std::size_t csi_bytes(std::size_t nr, std::size_t nc, std::size_t tones) { return nr * nc * tones * 4; }

}  // namespace

CsiMatrix::CsiMatrix(std::uint8_t nr, std::uint8_t nc, std::uint8_t num_tones)
    : nr_(nr), nc_(nc), num_tones_(num_tones), entries_(std::size_t{nr} * nc * num_tones) {}

CsiMatrix::CsiMatrix(std::uint8_t nr, std::uint8_t nc, std::uint8_t num_tones, std::vector<CsiEntry> entries)
    : nr_(nr), nc_(nc), num_tones_(num_tones), entries_(std::move(entries)) {
  if (entries_.size() != std::size_t{nr} * nc * num_tones)
    throw PreconditionError("CSI matrix has " + std::to_string(entries_.size()) + " entries, dims need " +
                            std::to_string(std::size_t{nr} * nc * num_tones));
}

void sync_lengths(CsiPacket& packet) {
  packet.csi_len = static_cast<std::uint16_t>(csi_bytes(packet.nr, packet.nc, packet.num_tones));
  packet.payload_len = static_cast<std::uint16_t>(packet.payload.size());
}

void validate(const CsiPacket& p) {
  const std::size_t expected = csi_bytes(p.nr, p.nc, p.num_tones);
  if (expected > 0xFFFF) throw EncodeError("csi_len", "cannot hold " + std::to_string(expected) + " bytes");
  if (p.csi_len != expected)
    throw EncodeError("csi_len", "is " + std::to_string(p.csi_len) + " but nr*nc*num_tones*4 = " +
                                     std::to_string(expected));
  if (p.csi.nr() != p.nr || p.csi.nc() != p.nc || p.csi.num_tones() != p.num_tones)
    throw EncodeError("csi", "matrix dimensions do not match nr/nc/num_tones");
  if (p.payload.size() != p.payload_len)
    throw EncodeError("payload_len", "is " + std::to_string(p.payload_len) + " but payload holds " +
                                         std::to_string(p.payload.size()) + " bytes");
  if (p.bandwidth > 1) throw EncodeError("bandwidth", "must be 0 (20 MHz) or 1 (40 MHz)");
}

std::size_t encoded_size(const CsiPacket& p) { return kRecordHeaderSize + p.csi_len + p.payload_len; }

void append_packet(Bytes& out, const CsiPacket& p) {
  validate(p);
  out.reserve(out.size() + encoded_size(p));
  detail::put(out, p.timestamp);
  detail::put(out, p.csi_len);
  detail::put(out, p.channel);
  detail::put(out, p.err_info);
  detail::put(out, p.noise_floor);
  detail::put(out, p.rate);
  detail::put(out, p.bandwidth);
  detail::put(out, p.num_tones);
  detail::put(out, p.nr);
  detail::put(out, p.nc);
  detail::put(out, p.rssi);
  detail::put(out, p.rssi1);
  detail::put(out, p.rssi2);
  detail::put(out, p.rssi3);
  detail::put(out, p.payload_len);
  detail::put(out, std::uint8_t{0});
  for (const CsiEntry& e : p.csi.entries()) {
    detail::put(out, e.re);
    detail::put(out, e.im);
  }
  out.insert(out.end(), p.payload.begin(), p.payload.end());
}

Bytes encode_packet(const CsiPacket& packet) {
  Bytes out;
  append_packet(out, packet);
  return out;
}

DecodedPacket decode_packet_prefix(std::span<const std::uint8_t> bytes) {
  detail::Reader in(bytes);
  if (!in.has(kRecordHeaderSize))
    throw TruncationError("packet header truncated", kRecordHeaderSize, bytes.size());

  CsiPacket p;
  p.timestamp = in.get<std::uint64_t>();
  p.csi_len = in.get<std::uint16_t>();
  p.channel = in.get<std::uint16_t>();
  p.err_info = in.get<std::uint8_t>();
  p.noise_floor = in.get<std::int8_t>();
  p.rate = in.get<std::uint8_t>();
  p.bandwidth = in.get<std::uint8_t>();
  p.num_tones = in.get<std::uint8_t>();
  p.nr = in.get<std::uint8_t>();
  p.nc = in.get<std::uint8_t>();
  p.rssi = in.get<std::uint8_t>();
  p.rssi1 = in.get<std::uint8_t>();
  p.rssi2 = in.get<std::uint8_t>();
  p.rssi3 = in.get<std::uint8_t>();
  p.payload_len = in.get<std::uint16_t>();
  const auto reserved = in.get<std::uint8_t>();

  if (reserved != 0) throw FormatError("reserved header byte is " + std::to_string(reserved) + ", expected 0");
  if (p.bandwidth > 1) throw FormatError("bandwidth code " + std::to_string(p.bandwidth) + " is not 0 or 1");
  const std::size_t expected = csi_bytes(p.nr, p.nc, p.num_tones);
  if (p.csi_len != expected)
    throw FormatError("csi_len " + std::to_string(p.csi_len) + " disagrees with nr*nc*num_tones*4 = " +
                      std::to_string(expected));

  const std::size_t body = std::size_t{p.csi_len} + p.payload_len;
  if (!in.has(body)) throw TruncationError("packet body truncated", kRecordHeaderSize + body, bytes.size());

  std::vector<CsiEntry> entries(std::size_t{p.nr} * p.nc * p.num_tones);
  for (CsiEntry& e : entries) {
    e.re = in.get<std::int16_t>();
    e.im = in.get<std::int16_t>();
  }
  p.csi = CsiMatrix(p.nr, p.nc, p.num_tones, std::move(entries));
  const auto payload = in.take(p.payload_len);
  p.payload.assign(payload.begin(), payload.end());
  return {std::move(p), in.offset()};
}

CsiPacket decode_packet(std::span<const std::uint8_t> bytes) {
  DecodedPacket d = decode_packet_prefix(bytes);
  if (d.consumed != bytes.size())
    throw FormatError(std::to_string(bytes.size() - d.consumed) + " trailing bytes after packet record");
  return std::move(d.packet);
}

Bytes write_log(std::span<const CsiPacket> packets) {
  Bytes out(std::begin(kLogMagic), std::end(kLogMagic));
  detail::put(out, static_cast<std::uint32_t>(packets.size()));
  for (const CsiPacket& p : packets) append_packet(out, p);
  return out;
}

LogContents read_log(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kLogMagic)) throw TruncationError("log header truncated", kLogHeaderSize, bytes.size());
  if (!std::equal(std::begin(kLogMagic), std::end(kLogMagic), bytes.begin(),
                  [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; }))
    throw FormatError("bad magic: not a CSILOG1 file");
  if (bytes.size() < kLogHeaderSize) throw TruncationError("log header truncated", kLogHeaderSize, bytes.size());

  detail::Reader in(bytes.subspan(sizeof(kLogMagic)));
  LogContents log;
  log.declared_count = in.get<std::uint32_t>();
  std::size_t offset = kLogHeaderSize;
  // Capacity is bounded by the bytes actually present, not the declared count.
  log.packets.reserve(std::min<std::size_t>(log.declared_count, bytes.size() / kRecordHeaderSize));

  for (std::uint32_t n = 0; n < log.declared_count; ++n) {
    try {
      DecodedPacket d = decode_packet_prefix(bytes.subspan(offset));
      offset += d.consumed;
      log.packets.push_back(std::move(d.packet));
    } catch (const FormatError& e) {
      log.diagnostic = "packet " + std::to_string(n) + " of " + std::to_string(log.declared_count) +
                       " at byte " + std::to_string(offset) + ": " + e.what();
      return log;
    }
  }
  if (offset != bytes.size())
    log.diagnostic = std::to_string(bytes.size() - offset) + " trailing bytes after " +
                     std::to_string(log.declared_count) + " declared packets";
  return log;
}

void write_log_file(const std::filesystem::path& path, std::span<const CsiPacket> packets) {
  detail::write_file(path, write_log(packets));
}

LogContents read_log_file(const std::filesystem::path& path) { return read_log(detail::read_file(path)); }

bool passes_filter(const CsiPacket& p) {
  return p.err_info == 0 && p.nr == 3 && p.nc == 3 && p.num_tones == 56;
}

std::vector<CsiPacket> filter_packets(std::span<const CsiPacket> packets) {
  std::vector<CsiPacket> out;
  std::copy_if(packets.begin(), packets.end(), std::back_inserter(out), passes_filter);
  return out;
}

}  // namespace csiloc::codec
