#pragma once

// Model checkpoint, little-endian:
//
//   magic "CSINET1\0"
//   u8 task (0 regression, 1 classification)
//   u8 input rank, then u32 per input dimension
//   u32 layer count
//   per layer: u8 tag, then
//     0 conv:     u32 filters, filter_h, filter_w, stride_h, stride_w,
//                 in_channels; u64 n; n x f64 (weights fh x fw x C x F, then bias)
//     1 dense:    u32 units, in_features; u64 n; n x f64 (weights units x in,
//                 then bias)
//     2 leaky:    f64 gamma
//     3 softmax
//     4 dropout:  f64 p
//     5 flatten
//
// Parameters are stored as raw IEEE-754 doubles, so a round trip is exact.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "csiloc/nn/network.hpp"

namespace csiloc::nn {

inline constexpr char kCheckpointMagic[8] = {'C', 'S', 'I', 'N', 'E', 'T', '1', '\0'};

std::vector<std::uint8_t> encode_checkpoint(Network& network);
Network decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(Network& network, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace csiloc::nn
