#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "mcmpipe/error.hpp"

namespace mcmpipe {

using count_t = std::int64_t;

enum class LayerKind { Conv, FC };

/// Shape of one weight layer. Pooling that follows a conv is folded into the
/// layer as an integer output divisor: MACs use the conv output, the next
/// layer sees the pooled output.
struct LayerDesc {
  LayerKind kind = LayerKind::Conv;
  count_t c_in = 1;
  count_t c_out = 1;
  count_t h_in = 1;
  count_t w_in = 1;
  count_t k_h = 1;
  count_t k_w = 1;
  count_t stride = 1;
  count_t padding = 0;
  count_t pool = 1;
  std::string name;

  bool is_conv() const { return kind == LayerKind::Conv; }

  count_t h_out() const {
    if (!is_conv()) return 1;
    return (h_in + 2 * padding - k_h) / stride + 1;
  }
  count_t w_out() const {
    if (!is_conv()) return 1;
    return (w_in + 2 * padding - k_w) / stride + 1;
  }
  // Spatial extent handed to the next layer.
  count_t next_h() const { return h_out() / pool; }
  count_t next_w() const { return w_out() / pool; }

  bool operator==(const LayerDesc&) const = default;
};

inline LayerDesc conv_layer(std::string name, count_t c_in, count_t c_out, count_t hw_in,
                            count_t k, count_t stride = 1, count_t padding = -1,
                            count_t pool = 1) {
  LayerDesc l;
  l.kind = LayerKind::Conv;
  l.name = std::move(name);
  l.c_in = c_in;
  l.c_out = c_out;
  l.h_in = l.w_in = hw_in;
  l.k_h = l.k_w = k;
  l.stride = stride;
  l.padding = padding < 0 ? k / 2 : padding;
  l.pool = pool;
  return l;
}

inline LayerDesc fc_layer(std::string name, count_t c_in, count_t c_out) {
  LayerDesc l;
  l.kind = LayerKind::FC;
  l.name = std::move(name);
  l.c_in = c_in;
  l.c_out = c_out;
  return l;
}

inline void validate_layer(const LayerDesc& l) {
  const std::string who = l.name.empty() ? std::string("layer") : "layer '" + l.name + "'";
  if (l.c_in < 1 || l.c_out < 1 || l.h_in < 1 || l.w_in < 1 || l.k_h < 1 || l.k_w < 1 ||
      l.stride < 1 || l.pool < 1)
    throw Error(ErrorKind::InvalidLayer, who + ": all counts must be >= 1");
  if (l.padding < 0) throw Error(ErrorKind::InvalidLayer, who + ": padding must be >= 0");
  if (!l.is_conv() &&
      (l.h_in != 1 || l.w_in != 1 || l.k_h != 1 || l.k_w != 1 || l.stride != 1 || l.pool != 1))
    throw Error(ErrorKind::InvalidLayer, who + ": FC layers have unit spatial dims");
  // Checked before the division so negative numerators never reach h_out().
  if (l.h_in + 2 * l.padding < l.k_h || l.w_in + 2 * l.padding < l.k_w)
    throw Error(ErrorKind::InvalidLayer, who + ": derived h_out/w_out < 1");
  if (l.next_h() < 1 || l.next_w() < 1)
    throw Error(ErrorKind::InvalidLayer, who + ": pooled output is empty");
}

struct Network {
  std::string name;
  std::vector<LayerDesc> layers;

  std::size_t size() const { return layers.size(); }
  const LayerDesc& operator[](std::size_t i) const { return layers[i]; }
};

/// Throws InvariantViolation naming the first broken constraint.
inline void validate_network(const Network& net) {
  if (net.layers.empty())
    throw Error(ErrorKind::InvariantViolation, "network '" + net.name + "' has no layers");
  for (const auto& l : net.layers) validate_layer(l);
  for (std::size_t k = 0; k + 1 < net.layers.size(); ++k) {
    const auto& a = net.layers[k];
    const auto& b = net.layers[k + 1];
    const std::string where = "layers[" + std::to_string(k) + "]->layers[" +
                              std::to_string(k + 1) + "]";
    if (b.is_conv()) {
      if (!a.is_conv())
        throw Error(ErrorKind::InvariantViolation, where + ": conv layer cannot follow FC");
      if (b.c_in != a.c_out)
        throw Error(ErrorKind::InvariantViolation,
                    where + ": c_in " + std::to_string(b.c_in) + " != predecessor c_out " +
                        std::to_string(a.c_out));
      if (b.h_in != a.next_h() || b.w_in != a.next_w())
        throw Error(ErrorKind::InvariantViolation,
                    where + ": input spatial dims do not match predecessor output");
    } else {
      const count_t features = a.c_out * a.next_h() * a.next_w();
      if (b.c_in != features)
        throw Error(ErrorKind::InvariantViolation,
                    where + ": FC input features " + std::to_string(b.c_in) +
                        " != flattened predecessor output " + std::to_string(features));
    }
  }
}

inline Network slice_network(const Network& net, std::size_t first, std::size_t last) {
  if (first >= last || last > net.size())
    throw Error(ErrorKind::InvariantViolation, "layer slice out of range");
  Network out;
  out.name = net.name + "[" + std::to_string(first) + ":" + std::to_string(last) + "]";
  out.layers.assign(net.layers.begin() + static_cast<std::ptrdiff_t>(first),
                    net.layers.begin() + static_cast<std::ptrdiff_t>(last));
  return out;
}

/// Package parameters. Defaults are the 16-chiplet reference configuration.
struct HardwareConfig {
  count_t num_chiplets = 16;
  count_t mesh_rows = 4;
  count_t mesh_cols = 4;
  count_t pes_per_chiplet = 16;
  count_t lanes_per_pe = 8;
  count_t macs_per_lane = 8;
  double clock_hz = 8.0e8;
  count_t weight_buf_per_pe = 65536;
  count_t global_buf = 65536;
  double nop_bw_per_chiplet = 1.0e11;
  double dram_bw_total = 1.0e11;
  double e_mac = 0.2e-12;
  double e_nop_bit = 1.3e-12;
  double e_dram_bit = 4.0e-12;
  count_t act_bytes = 1;
  count_t wgt_bytes = 1;

  count_t lanes_per_chiplet() const { return pes_per_chiplet * lanes_per_pe; }
  count_t weight_capacity() const { return pes_per_chiplet * weight_buf_per_pe; }

  bool operator==(const HardwareConfig&) const = default;
};

inline void validate_hardware(const HardwareConfig& hw) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::InvariantViolation, "hardware: " + what);
  };
  if (hw.num_chiplets < 1 || hw.mesh_rows < 1 || hw.mesh_cols < 1) fail("chiplet counts must be >= 1");
  if (hw.mesh_rows * hw.mesh_cols != hw.num_chiplets) fail("mesh_rows*mesh_cols != num_chiplets");
  if (hw.pes_per_chiplet < 1 || hw.lanes_per_pe < 1 || hw.macs_per_lane < 1)
    fail("compute hierarchy counts must be >= 1");
  if (hw.weight_buf_per_pe < 1 || hw.global_buf < 1) fail("buffer sizes must be positive");
  if (!(hw.clock_hz > 0) || !(hw.nop_bw_per_chiplet > 0) || !(hw.dram_bw_total > 0))
    fail("clock and bandwidths must be positive");
  if (!(hw.e_mac > 0) || !(hw.e_nop_bit > 0) || !(hw.e_dram_bit > 0))
    fail("energies must be positive");
  if (hw.act_bytes < 1 || hw.wgt_bytes < 1) fail("element sizes must be >= 1");
}

/// Most-square factorization, rows <= cols.
inline std::pair<count_t, count_t> square_mesh(count_t chiplets) {
  count_t rows = 1;
  for (count_t r = 1; r * r <= chiplets; ++r)
    if (chiplets % r == 0) rows = r;
  return {rows, chiplets / rows};
}

inline HardwareConfig with_chiplets(HardwareConfig hw, count_t chiplets) {
  auto [rows, cols] = square_mesh(chiplets);
  hw.num_chiplets = chiplets;
  hw.mesh_rows = rows;
  hw.mesh_cols = cols;
  return hw;
}

enum class Partition { ISP, WSP };

constexpr const char* to_string(Partition p) { return p == Partition::ISP ? "ISP" : "WSP"; }

struct Coord {
  count_t row = 0;
  count_t col = 0;
  auto operator<=>(const Coord&) const = default;
};

/// Half-open layer range [first, last).
struct LayerRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const { return last - first; }
  bool operator==(const LayerRange&) const = default;
};

struct Cluster {
  LayerRange layers;
  count_t region_size = 1;
  std::vector<Coord> placement;
  std::vector<Partition> partitions;  // one per layer in `layers`
};

struct Segment {
  std::vector<Cluster> clusters;
  LayerRange layers() const {
    return clusters.empty() ? LayerRange{} : LayerRange{clusters.front().layers.first,
                                                        clusters.back().layers.last};
  }
};

struct Schedule {
  std::vector<Segment> segments;
};

inline void validate_schedule(const Schedule& s, const Network& net, const HardwareConfig& hw) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::InvariantViolation, "schedule: " + what);
  };
  std::size_t next = 0;
  for (std::size_t si = 0; si < s.segments.size(); ++si) {
    const auto& seg = s.segments[si];
    const std::string at = "segment " + std::to_string(si);
    if (seg.clusters.empty()) fail(at + " has no clusters");
    count_t total = 0;
    std::vector<Coord> used;
    for (const auto& c : seg.clusters) {
      if (c.layers.first != next || c.layers.last <= c.layers.first)
        fail(at + ": cluster layer ranges are not contiguous");
      next = c.layers.last;
      if (c.region_size < 1) fail(at + ": region_size < 1");
      if (c.partitions.size() != c.layers.size()) fail(at + ": partition count mismatch");
      if (static_cast<count_t>(c.placement.size()) != c.region_size)
        fail(at + ": placement size != region_size");
      for (std::size_t k = 0; k < c.layers.size(); ++k)
        if (c.partitions[k] == Partition::WSP && !net[c.layers.first + k].is_conv())
          fail(at + ": FC layer '" + net[c.layers.first + k].name + "' must use ISP");
      for (const auto& p : c.placement) {
        if (p.row < 0 || p.col < 0 || p.row >= hw.mesh_rows || p.col >= hw.mesh_cols)
          fail(at + ": chiplet outside mesh");
        used.push_back(p);
      }
      total += c.region_size;
    }
    if (total != hw.num_chiplets) fail(at + ": region sizes do not sum to num_chiplets");
    std::sort(used.begin(), used.end());
    if (std::adjacent_find(used.begin(), used.end()) != used.end())
      fail(at + ": region placements overlap");
  }
  if (next != net.size()) fail("segments do not cover all layers");
}

struct LayerStats {
  count_t macs = 0;
  count_t weight_elems = 0;
  count_t in_elems = 0;
  count_t out_elems = 0;      // conv output before folded pooling
  count_t act_out_elems = 0;  // what is handed to the next layer
};

inline LayerStats layer_stats(const LayerDesc& l) {
  validate_layer(l);
  LayerStats s;
  if (l.is_conv()) {
    const count_t ho = l.h_out(), wo = l.w_out();
    s.weight_elems = l.c_out * l.c_in * l.k_h * l.k_w;
    s.out_elems = l.c_out * ho * wo;
    s.macs = s.out_elems * l.c_in * l.k_h * l.k_w;
    s.in_elems = l.c_in * l.h_in * l.w_in;
    s.act_out_elems = l.c_out * l.next_h() * l.next_w();
  } else {
    s.macs = l.c_in * l.c_out;
    s.weight_elems = l.c_in * l.c_out;
    s.in_elems = l.c_in;
    s.out_elems = l.c_out;
    s.act_out_elems = l.c_out;
  }
  return s;
}

/// Overlapping input rows exchanged when the output height is split `n_parts` ways.
inline count_t halo_elems(const LayerDesc& l, count_t n_parts) {
  if (!l.is_conv()) throw Error(ErrorKind::UnsupportedPartition, "halo of FC layer '" + l.name + "'");
  if (n_parts < 1) throw Error(ErrorKind::InvalidRegionSize, "n_parts must be >= 1");
  return (n_parts - 1) * std::max<count_t>(l.k_h - l.stride, 0) * l.w_in * l.c_in;
}

inline count_t total_weight_bytes(const Network& net, LayerRange r, const HardwareConfig& hw) {
  count_t w = 0;
  for (std::size_t i = r.first; i < r.last; ++i) w += layer_stats(net[i]).weight_elems * hw.wgt_bytes;
  return w;
}

}  // namespace mcmpipe
