#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcmpipe/core_model.hpp"
#include "mcmpipe/placement.hpp"

namespace mcmpipe {

constexpr count_t ceil_div(count_t a, count_t b) { return (a + b - 1) / b; }

// ---------------------------------------------------------------------------
// Per-layer phase models
// ---------------------------------------------------------------------------

/// Seconds to compute one sample of `layer` on each of `n` chiplets.
///
/// Output channels map onto lanes, the reduction (c_in*k_h*k_w) onto the MACs
/// of a lane, and output pixels are iterated. ISP divides output channels, so a
/// small per-chiplet channel count leaves lanes idle; WSP divides output rows.
inline double compute_time(const LayerDesc& layer, Partition p, count_t n, const HardwareConfig& hw) {
  if (n < 1) throw Error(ErrorKind::InvalidRegionSize, "region size must be >= 1");
  if (p == Partition::WSP && !layer.is_conv())
    throw Error(ErrorKind::UnsupportedPartition, "FC layer '" + layer.name + "' cannot use WSP");
  const count_t h_out = layer.h_out(), w_out = layer.w_out();
  if (p == Partition::WSP && n > h_out)
    throw Error(ErrorKind::InvalidRegionSize, "WSP split of " + std::to_string(h_out) + " rows over " +
                                                  std::to_string(n) + " chiplets");
  count_t c_out = layer.c_out;
  count_t spatial = h_out * w_out;
  if (p == Partition::ISP) {
    c_out = ceil_div(layer.c_out, n);
  } else {
    spatial = ceil_div(h_out, n) * w_out;
  }
  const count_t cycles = ceil_div(c_out, hw.lanes_per_chiplet()) * spatial *
                         ceil_div(layer.c_in * layer.k_h * layer.k_w, hw.macs_per_lane);
  return static_cast<double>(cycles) / hw.clock_hz;
}

/// True when compute_time accepts (layer, p, n).
inline bool partition_valid(const LayerDesc& layer, Partition p, count_t n) {
  if (n < 1) return false;
  if (p == Partition::ISP) return true;
  return layer.is_conv() && n <= layer.h_out();
}

struct LayerEndpoint {
  const LayerDesc* layer = nullptr;
  Partition partition = Partition::ISP;
  count_t region_size = 1;
};

/// Bytes moved from `cur` to `next` (same region: Case1, different: Case2).
/// Halo is taken against the consumer's split.
inline count_t comm_volume(const LayerEndpoint& cur, const LayerEndpoint& next, bool same_region,
                           const HardwareConfig& hw) {
  const count_t output = layer_stats(*cur.layer).act_out_elems * hw.act_bytes;
  auto halo = [&] { return halo_elems(*next.layer, next.region_size) * hw.act_bytes; };
  const bool next_wsp = next.partition == Partition::WSP;
  if (!same_region) return next_wsp ? output : next.region_size * output;
  const count_t r = cur.region_size;
  if (cur.partition == Partition::WSP) return next_wsp ? halo() : (r - 1) * output;
  return next_wsp ? (r - 1) * output + halo() : (r - 1) * output;
}

/// Endpoint-bandwidth transfer time. Within one region every chiplet sends in
/// parallel; across regions the narrower side or the shared boundary limits.
inline double comm_time(count_t volume, count_t src_size, count_t dst_size, count_t boundary,
                        bool same_region, const HardwareConfig& hw) {
  if (volume <= 0) return 0.0;
  const count_t links =
      same_region ? src_size : std::min({src_size, dst_size, std::max<count_t>(boundary, 1)});
  return static_cast<double>(volume) / (static_cast<double>(links) * hw.nop_bw_per_chiplet);
}

inline double comm_time(count_t volume, const RegionPlacement& src, const RegionPlacement& dst,
                        const HardwareConfig& hw) {
  const bool same = src == dst;
  const count_t width = same ? 0 : boundary_width(src, dst);
  return comm_time(volume, static_cast<count_t>(src.size()), static_cast<count_t>(dst.size()), width,
                   same, hw);
}

enum class WeightMode { Distributed, Replicated };

/// Weight preparation time. The DRAM load term applies only on the first
/// deployment of a segment; the steady-state term is the per-sample all-gather
/// of a distributed WSP layer.
inline double prep_time(const LayerDesc& layer, Partition p, count_t n, const HardwareConfig& hw,
                        bool first_deployment, WeightMode mode = WeightMode::Distributed) {
  if (n < 1) throw Error(ErrorKind::InvalidRegionSize, "region size must be >= 1");
  const auto w = static_cast<double>(layer_stats(layer).weight_elems * hw.wgt_bytes);
  double t = first_deployment ? w / hw.dram_bw_total : 0.0;
  if (p == Partition::WSP && mode == WeightMode::Distributed && n > 1)
    t += w * static_cast<double>(n - 1) / (static_cast<double>(n) * hw.nop_bw_per_chiplet);
  return t;
}

// ---------------------------------------------------------------------------
// Weight footprint
// ---------------------------------------------------------------------------

struct RegionFootprint {
  count_t region_size = 1;
  double resident = 0;        // bytes per chiplet, weights distributed 1/n
  double transient_peak = 0;  // resident + the largest WSP layer materialized in full
  double replicated = 0;      // bytes per chiplet if every WSP layer is kept in full
  bool replicate = false;     // full replication fits, so no per-sample all-gather
  bool feasible = true;
  double peak() const { return replicate ? replicated : transient_peak; }
};

inline RegionFootprint region_footprint(const Network& net, LayerRange layers,
                                        std::span<const Partition> partitions, count_t n,
                                        const HardwareConfig& hw) {
  count_t sum = 0, sum_wsp = 0, max_wsp = 0;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const count_t w = layer_stats(net[layers.first + k]).weight_elems * hw.wgt_bytes;
    sum += w;
    if (partitions[k] == Partition::WSP) {
      sum_wsp += w;
      max_wsp = std::max(max_wsp, w);
    }
  }
  const count_t cap = hw.weight_capacity();
  const auto nd = static_cast<double>(n);
  RegionFootprint f;
  f.region_size = n;
  f.resident = static_cast<double>(sum) / nd;
  f.transient_peak = static_cast<double>(sum + max_wsp * (n - 1)) / nd;
  f.replicated = static_cast<double>(sum - sum_wsp) / nd + static_cast<double>(sum_wsp);
  // Integer comparisons keep the capacity boundary exact.
  f.feasible = sum + max_wsp * (n - 1) <= cap * n;
  f.replicate = sum_wsp > 0 && (sum - sum_wsp) + n * sum_wsp <= cap * n;
  return f;
}

struct SegmentFootprint {
  std::vector<RegionFootprint> regions;
  std::vector<double> per_chiplet;  // indexed row * mesh_cols + col
  bool feasible = true;
  bool streaming = false;
  std::optional<Coord> over_capacity;
};

/// A lone layer whose weights exceed the whole package cannot be stationary.
/// It streams ISP weight tiles from DRAM, each tile applied to every sample, so
/// the buffers run full and DRAM still delivers the weights once.
inline bool is_streaming_segment(const Segment& seg, const Network& net, const HardwareConfig& hw) {
  if (seg.clusters.size() != 1 || seg.clusters.front().layers.size() != 1) return false;
  const auto& c = seg.clusters.front();
  const count_t w = layer_stats(net[c.layers.first]).weight_elems * hw.wgt_bytes;
  return w > hw.weight_capacity() * c.region_size;
}

inline SegmentFootprint weight_footprint(const Segment& seg, const Network& net, const HardwareConfig& hw) {
  SegmentFootprint out;
  out.per_chiplet.assign(static_cast<std::size_t>(hw.num_chiplets), 0.0);
  if (is_streaming_segment(seg, net, hw)) {
    const auto& c = seg.clusters.front();
    RegionFootprint f;
    f.region_size = c.region_size;
    f.resident = f.transient_peak = static_cast<double>(hw.weight_capacity());
    f.feasible = c.partitions.front() == Partition::ISP;
    out.streaming = true;
    out.feasible = f.feasible;
    for (const auto& p : c.placement) out.per_chiplet[static_cast<std::size_t>(p.row * hw.mesh_cols + p.col)] = f.peak();
    if (!f.feasible && !c.placement.empty()) out.over_capacity = c.placement.front();
    out.regions.push_back(f);
    return out;
  }
  for (const auto& c : seg.clusters) {
    auto f = region_footprint(net, c.layers, c.partitions, c.region_size, hw);
    for (const auto& p : c.placement)
      out.per_chiplet[static_cast<std::size_t>(p.row * hw.mesh_cols + p.col)] = f.peak();
    if (!f.feasible && out.feasible) {
      out.feasible = false;
      if (!c.placement.empty()) out.over_capacity = c.placement.front();
    }
    out.regions.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct PhaseTimes {
  double t_pre = 0;
  double t_comp = 0;
  double t_comm = 0;
  double t_layer = 0;
};

inline PhaseTimes compose_phases(double t_pre, double t_comp, double t_comm) {
  return {t_pre, t_comp, t_comm, t_pre + std::max(t_comm, t_comp)};
}

struct LayerReport {
  std::size_t layer = 0;
  Partition partition = Partition::ISP;
  PhaseTimes times;
};

struct ClusterReport {
  double t_cluster = 0;
  count_t region_size = 0;
  count_t macs = 0;
  std::vector<LayerReport> layers;
};

struct SegmentReport {
  double t_segment = 0;
  double t_pipeline = 0;     // (m + N - 1) * max t_cluster
  double t_weight_load = 0;  // one DRAM load of the segment's weights
  std::vector<ClusterReport> clusters;
};

struct EnergyReport {
  double e_mac = 0;
  double e_nop = 0;
  double e_dram = 0;
  double total() const { return e_mac + e_nop + e_dram; }
};

struct CostReport {
  double t_system = 0;
  std::vector<SegmentReport> segments;
  EnergyReport energy;
  std::vector<double> chiplet_peak_weight_bytes;
  count_t m_samples = 1;
};

inline double pipeline_time(std::span<const double> cluster_times, count_t m) {
  double worst = 0;
  for (double t : cluster_times) worst = std::max(worst, t);
  return static_cast<double>(m + static_cast<count_t>(cluster_times.size()) - 1) * worst;
}

// Traffic in bytes for one sample, plus the once-per-deployment weight load.
struct SegmentTraffic {
  count_t macs = 0;
  count_t nop_bytes = 0;
  count_t dram_act_bytes = 0;
  count_t dram_weight_bytes = 0;

  EnergyReport energy(const HardwareConfig& hw, count_t m) const {
    const auto md = static_cast<double>(m);
    return {hw.e_mac * static_cast<double>(macs) * md,
            hw.e_nop_bit * 8.0 * static_cast<double>(nop_bytes) * md,
            hw.e_dram_bit * 8.0 *
                (static_cast<double>(dram_weight_bytes) + static_cast<double>(dram_act_bytes) * md)};
  }
};

struct SegmentEval {
  bool feasible = false;
  std::string diagnostic;
  SegmentReport report;
  SegmentTraffic traffic;
  SegmentFootprint footprint;

  double latency() const { return report.t_segment; }
};

enum class Detail { ClustersOnly, Full };

/// Evaluates one segment deployed on the whole package. Never throws for
/// infeasible plans; `feasible` is false and `diagnostic` says why.
///
/// Each segment reads its input activations from DRAM in the first layer's
/// preparation phase and writes its output to DRAM in the last layer's
/// communication phase; between clusters activations travel over the NoP.
inline SegmentEval evaluate_segment(const Segment& seg, const Network& net, const HardwareConfig& hw,
                                    count_t m, Detail detail = Detail::Full) {
  SegmentEval ev;
  const Mesh mesh = Mesh::of(hw);
  const std::size_t n_clusters = seg.clusters.size();

  std::vector<RegionPlacement> placements;
  placements.reserve(n_clusters);
  for (const auto& c : seg.clusters) placements.push_back(c.placement);
  const auto widths = consecutive_boundary_widths(placements, mesh);

  ev.footprint = weight_footprint(seg, net, hw);
  if (!ev.footprint.feasible) {
    const auto& p = *ev.footprint.over_capacity;
    ev.diagnostic = "chiplet (" + std::to_string(p.row) + "," + std::to_string(p.col) +
                    ") exceeds weight capacity of " + std::to_string(hw.weight_capacity()) + " bytes";
    return ev;
  }

  const LayerRange span = seg.layers();
  std::vector<double> cluster_times;
  cluster_times.reserve(n_clusters);
  ev.report.clusters.reserve(n_clusters);

  for (std::size_t j = 0; j < n_clusters; ++j) {
    const Cluster& c = seg.clusters[j];
    const count_t n = c.region_size;
    const WeightMode mode = ev.footprint.regions[j].replicate ? WeightMode::Replicated : WeightMode::Distributed;
    ClusterReport cr;
    cr.region_size = n;
    if (detail == Detail::Full) cr.layers.reserve(c.layers.size());

    for (std::size_t k = 0; k < c.layers.size(); ++k) {
      const std::size_t li = c.layers.first + k;
      const LayerDesc& layer = net[li];
      const Partition p = c.partitions[k];
      if (!partition_valid(layer, p, n)) {
        ev.diagnostic = "layer '" + layer.name + "' cannot use " + to_string(p) + " on " +
                        std::to_string(n) + " chiplets";
        return ev;
      }
      const LayerStats st = layer_stats(layer);
      ev.traffic.macs += st.macs;
      ev.traffic.dram_weight_bytes += st.weight_elems * hw.wgt_bytes;

      double t_pre = prep_time(layer, p, n, hw, false, mode);
      if (p == Partition::WSP && mode == WeightMode::Distributed)
        ev.traffic.nop_bytes += st.weight_elems * hw.wgt_bytes * (n - 1);
      if (li == span.first) {
        const count_t in_bytes = st.in_elems * hw.act_bytes;
        t_pre += static_cast<double>(in_bytes) / hw.dram_bw_total;
        ev.traffic.dram_act_bytes += in_bytes;
      }

      const double t_comp = compute_time(layer, p, n, hw);

      double t_comm = 0;
      const LayerEndpoint cur{&layer, p, n};
      if (k + 1 < c.layers.size()) {
        const LayerEndpoint next{&net[li + 1], c.partitions[k + 1], n};
        const count_t vol = comm_volume(cur, next, true, hw);
        ev.traffic.nop_bytes += vol;
        t_comm = comm_time(vol, n, n, 0, true, hw);
      } else if (j + 1 < n_clusters) {
        const Cluster& nc = seg.clusters[j + 1];
        const LayerEndpoint next{&net[li + 1], nc.partitions.front(), nc.region_size};
        const count_t vol = comm_volume(cur, next, false, hw);
        ev.traffic.nop_bytes += vol;
        t_comm = comm_time(vol, n, nc.region_size, widths[j], false, hw);
      } else {
        const count_t out_bytes = st.act_out_elems * hw.act_bytes;
        ev.traffic.dram_act_bytes += out_bytes;
        t_comm = static_cast<double>(out_bytes) / hw.dram_bw_total;
      }

      const PhaseTimes pt = compose_phases(t_pre, t_comp, t_comm);
      cr.t_cluster += pt.t_layer;
      cr.macs += st.macs;
      if (detail == Detail::Full) cr.layers.push_back({li, p, pt});
    }
    cluster_times.push_back(cr.t_cluster);
    ev.report.clusters.push_back(std::move(cr));
  }

  ev.report.t_weight_load = static_cast<double>(ev.traffic.dram_weight_bytes) / hw.dram_bw_total;
  ev.report.t_pipeline = pipeline_time(cluster_times, m);
  ev.report.t_segment = ev.report.t_weight_load + ev.report.t_pipeline;
  ev.feasible = true;
  return ev;
}

/// Full-schedule evaluation. Throws InfeasibleSchedule naming the chiplet or
/// layer that breaks the plan.
inline CostReport evaluate(const Schedule& schedule, const Network& net, const HardwareConfig& hw, count_t m) {
  validate_hardware(hw);
  validate_network(net);
  validate_schedule(schedule, net, hw);
  if (m < 1) throw Error(ErrorKind::InvariantViolation, "m_samples must be >= 1");
  CostReport report;
  report.m_samples = m;
  report.chiplet_peak_weight_bytes.assign(static_cast<std::size_t>(hw.num_chiplets), 0.0);
  for (std::size_t si = 0; si < schedule.segments.size(); ++si) {
    auto ev = evaluate_segment(schedule.segments[si], net, hw, m);
    if (!ev.feasible)
      throw Error(ErrorKind::InfeasibleSchedule, "segment " + std::to_string(si) + ": " + ev.diagnostic);
    const auto e = ev.traffic.energy(hw, m);
    report.energy.e_mac += e.e_mac;
    report.energy.e_nop += e.e_nop;
    report.energy.e_dram += e.e_dram;
    for (std::size_t i = 0; i < report.chiplet_peak_weight_bytes.size(); ++i)
      report.chiplet_peak_weight_bytes[i] =
          std::max(report.chiplet_peak_weight_bytes[i], ev.footprint.per_chiplet[i]);
    report.t_system += ev.report.t_segment;
    report.segments.push_back(std::move(ev.report));
  }
  return report;
}

/// Recomputes the level identities of a report; returns the first mismatch.
inline std::optional<std::string> check_report_identities(const CostReport& r) {
  double system = 0;
  for (std::size_t si = 0; si < r.segments.size(); ++si) {
    const auto& seg = r.segments[si];
    const std::string at = "segment " + std::to_string(si);
    std::vector<double> cluster_times;
    for (std::size_t j = 0; j < seg.clusters.size(); ++j) {
      const auto& c = seg.clusters[j];
      double sum = 0;
      for (const auto& l : c.layers) {
        const auto& t = l.times;
        if (t.t_layer != t.t_pre + std::max(t.t_comm, t.t_comp))
          return at + " layer " + std::to_string(l.layer) + ": t_layer != t_pre + max(t_comm, t_comp)";
        sum += t.t_layer;
      }
      if (!c.layers.empty() && c.t_cluster != sum)
        return at + " cluster " + std::to_string(j) + ": t_cluster != sum of t_layer";
      cluster_times.push_back(c.t_cluster);
    }
    if (seg.t_pipeline != pipeline_time(cluster_times, r.m_samples))
      return at + ": t_pipeline != (m + N - 1) * max t_cluster";
    if (seg.t_segment != seg.t_weight_load + seg.t_pipeline)
      return at + ": t_segment != t_weight_load + t_pipeline";
    system += seg.t_segment;
  }
  if (r.t_system != system) return std::string("t_system != sum of t_segment");
  return std::nullopt;
}

}  // namespace mcmpipe
