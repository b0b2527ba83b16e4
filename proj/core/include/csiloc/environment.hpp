#pragma once

// The 9 x 7 grid test area, label/coordinate conversions and seeded
// synthesis of location-dependent CSI packet logs.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "csiloc/channel.hpp"
#include "csiloc/codec.hpp"

namespace csiloc::env {

struct EnvironmentSpec {
  int cols = 9;
  int rows = 7;
  double cell_m = 0.45;

  int grid_count() const noexcept { return cols * rows; }
  double width_m() const noexcept { return cols * cell_m; }
  double depth_m() const noexcept { return rows * cell_m; }
  void validate() const;
};

/// Grid label in 1..grid_count.
class GridLabel {
 public:
  constexpr GridLabel() = default;
  constexpr explicit GridLabel(int value) : value_(value) {}
  constexpr int value() const noexcept { return value_; }
  constexpr std::size_t index() const noexcept { return static_cast<std::size_t>(value_ - 1); }
  friend constexpr auto operator<=>(GridLabel, GridLabel) = default;

 private:
  int value_ = 1;
};

/// 1-based grid column X and row Y.
struct GridCoords {
  int x = 1;
  int y = 1;
  friend bool operator==(const GridCoords&, const GridCoords&) = default;
};

/// Grid-center position in meters.
struct Position {
  double x = 0.0;
  double y = 0.0;
};

void validate(GridLabel label, const EnvironmentSpec& env = {});

/// Row-major: label = (Y - 1) * cols + X.
GridCoords label_to_coords(GridLabel label, const EnvironmentSpec& env = {});
GridLabel coords_to_label(GridCoords coords, const EnvironmentSpec& env = {});
/// (X * cell, Y * cell).
Position label_to_position(GridLabel label, const EnvironmentSpec& env = {});

struct FixedCount {
  std::size_t count = 200;
};

/// Per-grid packet counts reproducing the measured statistics: every count
/// in [min, max], the sorted middle element equal to median, and the sum
/// equal to total (when the grid count is 63 and the targets are feasible).
struct ImbalancedCount {
  std::size_t min = 1208;
  std::size_t max = 2365;
  std::size_t median = 1343;
  std::size_t total = 89677;
};

using PacketCountPolicy = std::variant<FixedCount, ImbalancedCount>;

struct GenConfig {
  std::uint64_t master_seed = 0;
  int grids = 63;  // labels 1..grids are generated
  PacketCountPolicy packets_per_grid = ImbalancedCount{};
  double scatter_ratio = 0.05;      // rho: fraction of per-packet random channel power
  double csi_noise_sigma2 = 0.01;   // estimation noise relative to unit channel power
  int tap_count_min = 4;
  int tap_count_max = 8;
  double rician_k_first_tap = 3.0;
  double quantization_peak = 1000.0;

  void validate(const EnvironmentSpec& env = {}) const;
};

/// Deterministic delay profile of the (rx, tx) subchannel (1-based antenna
/// indices) at a grid: a Rician first tap followed by Rayleigh taps with
/// exponentially decaying powers normalized to one.
channel::TapProfile grid_channel(GridLabel label, int rx_antenna, int tx_antenna, const GenConfig& config);

/// The location's static response of one subchannel: a fixed realization of
/// grid_channel's profile.
std::vector<channel::Complex> grid_mean_response(GridLabel label, int rx_antenna, int tx_antenna,
                                                 const GenConfig& config);

/// Packet count per label (index 0 is label 1).
std::vector<std::size_t> draw_packet_counts(const GenConfig& config);

/// Synthesizes `count` valid packets observed at `label`.
std::vector<codec::CsiPacket> synthesize_grid(GridLabel label, std::size_t count, const GenConfig& config);

struct GridSummary {
  GridLabel label;
  std::size_t count = 0;
};

/// Writes grid_<label>.csilog for every grid plus manifest.csv
/// (label,X,Y,x_m,y_m,count) into `out_dir`. Grids are generated on a worker
/// pool; output is independent of scheduling.
std::vector<GridSummary> generate_dataset(const GenConfig& config, const EnvironmentSpec& env,
                                          const std::filesystem::path& out_dir, unsigned workers = 0);

std::filesystem::path grid_log_name(GridLabel label);

}  // namespace csiloc::env
