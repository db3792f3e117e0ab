#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mcmpipe/core_model.hpp"
#include "mcmpipe/cost_engine.hpp"
#include "mcmpipe/parallel.hpp"
#include "mcmpipe/placement.hpp"

namespace mcmpipe {

using BigInt = boost::multiprecision::cpp_int;
using ClusterDivision = std::vector<LayerRange>;

// ---------------------------------------------------------------------------
// Cluster merge table
// ---------------------------------------------------------------------------

/// Output spatial tile count; 1 for FC.
inline double layer_parallelism(const LayerDesc& l) {
  return static_cast<double>(l.h_out() * l.w_out());
}

/// MAC-weighted geometric mean of member-layer parallelism.
inline double compute_parallelism(LayerRange r, const Network& net) {
  if (r.size() == 0) throw Error(ErrorKind::InvariantViolation, "empty cluster");
  const double first = layer_parallelism(net[r.first]);
  bool uniform = true;
  for (std::size_t i = r.first + 1; i < r.last; ++i) uniform = uniform && layer_parallelism(net[i]) == first;
  if (uniform) return first;
  double wsum = 0, acc = 0;
  for (std::size_t i = r.first; i < r.last; ++i) {
    const auto w = static_cast<double>(layer_stats(net[i]).macs);
    wsum += w;
    acc += w * std::log(layer_parallelism(net[i]));
  }
  return std::exp(acc / wsum);
}

/// levels[N] holds the division into N clusters, N in [1, L]. levels[0] is unused.
struct CMT {
  std::vector<ClusterDivision> levels;
  std::size_t max_clusters() const { return levels.empty() ? 0 : levels.size() - 1; }
  const ClusterDivision& operator[](std::size_t n) const { return levels.at(n); }
};

inline CMT gen_cmt(LayerRange segment, const Network& net) {
  const std::size_t L = segment.size();
  if (L == 0) throw Error(ErrorKind::InvariantViolation, "empty segment");
  CMT cmt;
  cmt.levels.resize(L + 1);
  ClusterDivision cur;
  for (std::size_t i = segment.first; i < segment.last; ++i) cur.push_back({i, i + 1});
  cmt.levels[L] = cur;
  std::vector<double> par;
  std::vector<count_t> load;
  for (const auto& c : cur) {
    par.push_back(compute_parallelism(c, net));
    load.push_back(layer_stats(net[c.first]).macs);
  }
  for (std::size_t n = L; n >= 2; --n) {
    // Equal offsets (common within one resolution stage) go to the lighter
    // merged pair, then the lower index, so clusters grow evenly.
    std::size_t best = 0;
    double best_off = std::numeric_limits<double>::infinity();
    count_t best_load = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double off = std::abs(par[j] / par[j + 1] - 1.0);
      const count_t merged = load[j] + load[j + 1];
      const bool tie = std::abs(off - best_off) <= 1e-9;
      if ((off < best_off && !tie) || (tie && merged < best_load)) {
        best_off = off;
        best_load = merged;
        best = j;
      }
    }
    cur[best].last = cur[best + 1].last;
    cur.erase(cur.begin() + static_cast<std::ptrdiff_t>(best) + 1);
    par.erase(par.begin() + static_cast<std::ptrdiff_t>(best) + 1);
    load[best] += load[best + 1];
    load.erase(load.begin() + static_cast<std::ptrdiff_t>(best) + 1);
    par[best] = compute_parallelism(cur[best], net);
    cmt.levels[n - 1] = cur;
  }
  return cmt;
}

// ---------------------------------------------------------------------------
// Region sizing
// ---------------------------------------------------------------------------

/// Largest-remainder apportionment of `chiplets` proportional to `loads`,
/// each share at least 1. Ties go to the lowest index.
inline std::vector<count_t> proportional_allocate(std::span<const count_t> loads, count_t chiplets) {
  const auto n = static_cast<count_t>(loads.size());
  if (n == 0) throw Error(ErrorKind::InvariantViolation, "no clusters to allocate");
  if (n > chiplets)
    throw Error(ErrorKind::TooManyClusters,
                std::to_string(n) + " clusters on " + std::to_string(chiplets) + " chiplets");
  using wide = __int128;
  wide total = 0;
  for (count_t l : loads) {
    if (l < 0) throw Error(ErrorKind::InvariantViolation, "negative load");
    total += l;
  }
  std::vector<count_t> sizes(loads.size());
  if (total == 0) {
    std::vector<count_t> equal(loads.size(), 1);
    return proportional_allocate(equal, chiplets);
  }
  // Quota of i is chiplets*loads[i]/total; compare scaled by total to stay exact.
  auto quota_x = [&](std::size_t i) { return static_cast<wide>(chiplets) * loads[i]; };
  count_t assigned = 0;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    sizes[i] = std::max<count_t>(1, static_cast<count_t>(quota_x(i) / total));
    assigned += sizes[i];
  }
  while (assigned > chiplets) {
    std::size_t pick = loads.size();
    wide worst = 0;
    for (std::size_t i = 0; i < loads.size(); ++i) {
      if (sizes[i] <= 1) continue;
      const wide excess = static_cast<wide>(sizes[i]) * total - quota_x(i);
      if (pick == loads.size() || excess > worst) {
        pick = i;
        worst = excess;
      }
    }
    --sizes[pick];
    --assigned;
  }
  while (assigned < chiplets) {
    std::size_t pick = 0;
    wide best = 0;
    for (std::size_t i = 0; i < loads.size(); ++i) {
      const wide deficit = quota_x(i) - static_cast<wide>(sizes[i]) * total;
      if (i == 0 || deficit > best) {
        pick = i;
        best = deficit;
      }
    }
    ++sizes[pick];
    ++assigned;
  }
  return sizes;
}

inline std::vector<count_t> cluster_loads(const ClusterDivision& clusters, const Network& net) {
  std::vector<count_t> loads;
  loads.reserve(clusters.size());
  for (const auto& c : clusters) {
    count_t macs = 0;
    for (std::size_t i = c.first; i < c.last; ++i) macs += layer_stats(net[i]).macs;
    loads.push_back(macs);
  }
  return loads;
}

inline std::vector<count_t> proportional_allocate(const ClusterDivision& clusters, const Network& net,
                                                  count_t chiplets) {
  return proportional_allocate(cluster_loads(clusters, net), chiplets);
}

/// Assembles a segment: per-cluster partitions sliced from the segment-wide
/// vector, regions laid out along the zigzag walk.
inline Segment make_segment(const ClusterDivision& clusters, std::span<const Partition> partitions,
                            std::span<const count_t> sizes, const HardwareConfig& hw) {
  const std::size_t base = clusters.front().first;
  auto placements = zigzag_place(sizes, Mesh::of(hw));
  Segment seg;
  seg.clusters.reserve(clusters.size());
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    Cluster c;
    c.layers = clusters[j];
    c.region_size = sizes[j];
    c.placement = std::move(placements[j]);
    c.partitions.assign(partitions.begin() + static_cast<std::ptrdiff_t>(c.layers.first - base),
                        partitions.begin() + static_cast<std::ptrdiff_t>(c.layers.last - base));
    seg.clusters.push_back(std::move(c));
  }
  return seg;
}

struct SizedEval {
  std::vector<count_t> sizes;
  SegmentEval eval;
  count_t evaluations = 0;
  count_t moves = 0;
};

inline SegmentEval evaluate_sizes(const ClusterDivision& clusters, std::span<const Partition> partitions,
                                  std::span<const count_t> sizes, const Network& net,
                                  const HardwareConfig& hw, count_t m, Detail detail = Detail::ClustersOnly) {
  return evaluate_segment(make_segment(clusters, partitions, sizes, hw), net, hw, m, detail);
}

/// Moves chiplets into regions whose weights overflow, taking them from the
/// largest region that stays within capacity. Returns nullopt when no such
/// donor exists.
inline std::optional<std::vector<count_t>> repair_capacity(const ClusterDivision& clusters,
                                                           std::span<const Partition> partitions,
                                                           std::vector<count_t> sizes, const Network& net,
                                                           const HardwareConfig& hw) {
  if (clusters.size() < 2) return sizes;
  const std::size_t base = clusters.front().first;
  auto fits = [&](std::size_t j, count_t n) {
    const auto& c = clusters[j];
    return region_footprint(net, c, partitions.subspan(c.first - base, c.size()), n, hw).feasible;
  };
  for (count_t iter = 0; iter <= hw.num_chiplets; ++iter) {
    std::size_t needy = clusters.size();
    for (std::size_t j = 0; j < clusters.size(); ++j)
      if (!fits(j, sizes[j])) {
        needy = j;
        break;
      }
    if (needy == clusters.size()) return sizes;
    std::size_t donor = clusters.size();
    for (std::size_t j = 0; j < clusters.size(); ++j) {
      if (j == needy || sizes[j] <= 1 || !fits(j, sizes[j] - 1)) continue;
      if (donor == clusters.size() || sizes[j] > sizes[donor]) donor = j;
    }
    if (donor == clusters.size()) return std::nullopt;
    --sizes[donor];
    ++sizes[needy];
  }
  return std::nullopt;
}

/// Shifts one chiplet at a time from the fastest region to the slowest while
/// segment latency strictly decreases. Stops when a move would empty a region
/// or produce an infeasible plan.
inline SizedEval rebalance_regions(const ClusterDivision& clusters, std::span<const Partition> partitions,
                                   std::vector<count_t> sizes, const Network& net, const HardwareConfig& hw,
                                   count_t m) {
  SizedEval best;
  best.eval = evaluate_sizes(clusters, partitions, sizes, net, hw, m);
  best.evaluations = 1;
  best.sizes = sizes;
  if (!best.eval.feasible || clusters.size() < 2) return best;
  const count_t max_iter = hw.num_chiplets * static_cast<count_t>(net.size());
  for (count_t iter = 0; iter < max_iter; ++iter) {
    const auto& cl = best.eval.report.clusters;
    std::size_t slow = 0, fast = 0;
    for (std::size_t j = 1; j < cl.size(); ++j) {
      if (cl[j].t_cluster > cl[slow].t_cluster) slow = j;
      if (cl[j].t_cluster < cl[fast].t_cluster) fast = j;
    }
    if (slow == fast || best.sizes[fast] <= 1) break;
    auto cand = best.sizes;
    ++cand[slow];
    --cand[fast];
    auto ev = evaluate_sizes(clusters, partitions, cand, net, hw, m);
    ++best.evaluations;
    if (!ev.feasible || !(ev.latency() < best.eval.latency())) break;
    best.sizes = std::move(cand);
    best.eval = std::move(ev);
    ++best.moves;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Segment search
// ---------------------------------------------------------------------------

/// WSP for the first `idx` layers of the segment (FC layers stay ISP), ISP after.
inline std::vector<Partition> transition_partitions(LayerRange segment, const Network& net, std::size_t idx) {
  std::vector<Partition> p(segment.size(), Partition::ISP);
  for (std::size_t k = 0; k < idx && k < p.size(); ++k)
    if (net[segment.first + k].is_conv()) p[k] = Partition::WSP;
  return p;
}

struct TraceEntry {
  std::size_t segment = 0;
  std::size_t n_clusters = 0;
  std::size_t idx = 0;
  std::optional<double> latency;  // empty when no feasible region sizing exists
};

struct SegmentSearch {
  Segment plan;
  SegmentEval eval;
  count_t candidates_evaluated = 0;
  count_t evaluations = 0;
  std::vector<TraceEntry> trace;
  bool feasible() const { return eval.feasible; }
};

struct SearchOptions {
  // Restrict the scan to one cluster count; a value larger than the segment
  // means "all singletons".
  std::optional<std::size_t> fixed_clusters;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Sizes a fixed (division, partition) candidate: proportional start,
/// capacity repair if needed, then rebalancing.
inline SizedEval size_candidate(const ClusterDivision& div, std::span<const Partition> parts, const Network& net,
                                const HardwareConfig& hw, count_t m) {
  SizedEval out;
  if (static_cast<count_t>(div.size()) > hw.num_chiplets) return out;
  auto sizes = proportional_allocate(div, net, hw.num_chiplets);
  auto repaired = repair_capacity(div, parts, std::move(sizes), net, hw);
  if (!repaired) return out;
  return rebalance_regions(div, parts, std::move(*repaired), net, hw, m);
}

/// Scans every WSP->ISP transition point against every merge-table level.
inline SegmentSearch search_segment(LayerRange segment, const Network& net, const HardwareConfig& hw, count_t m,
                                    const SearchOptions& opts = {}) {
  const std::size_t L = segment.size();
  const CMT cmt = gen_cmt(segment, net);
  std::vector<std::size_t> levels;
  if (opts.fixed_clusters) {
    levels.push_back(std::min(*opts.fixed_clusters, L));
  } else {
    for (std::size_t n = 1; n <= L; ++n) levels.push_back(n);
  }

  struct Slot {
    std::size_t idx, n;
    SizedEval result;
  };
  std::vector<Slot> slots;
  for (std::size_t idx = 0; idx <= L; ++idx)
    for (std::size_t n : levels) slots.push_back({idx, n, {}});

  auto run = [&](Slot& s) {
    const auto parts = transition_partitions(segment, net, s.idx);
    s.result = size_candidate(cmt[s.n], parts, net, hw, m);
  };
  parallel_for(slots.size(), opts.threads, [&](std::size_t i) { run(slots[i]); });

  // Slots are in (idx, N) order, so a strict comparison keeps the
  // lexicographically smallest key among equal latencies.
  SegmentSearch out;
  const Slot* best = nullptr;
  for (const auto& s : slots) {
    out.evaluations += s.result.evaluations;
    TraceEntry t{0, s.n, s.idx, std::nullopt};
    if (s.result.eval.feasible) {
      t.latency = s.result.eval.latency();
      if (!best || s.result.eval.latency() < best->result.eval.latency()) best = &s;
    }
    out.trace.push_back(t);
  }
  out.candidates_evaluated = static_cast<count_t>(slots.size());
  if (best) {
    const auto parts = transition_partitions(segment, net, best->idx);
    out.plan = make_segment(cmt[best->n], parts, best->result.sizes, hw);
    out.eval = evaluate_segment(out.plan, net, hw, m, Detail::Full);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Segmentation and whole-network schedulers
// ---------------------------------------------------------------------------

/// Greedy segmentation: a segment grows while every member layer could sit in
/// its own ISP region, i.e. sum of ceil(W_i / capacity) stays within the
/// package, and while it holds no more layers than there are chiplets. A layer
/// too large for the whole package becomes a weight-streaming segment of its
/// own, or raises LayerTooLarge when `stream_oversized` is false.
inline std::vector<LayerRange> divide_segments(const Network& net, const HardwareConfig& hw,
                                               bool stream_oversized = true) {
  const count_t cap = hw.weight_capacity();
  const count_t C = hw.num_chiplets;
  std::vector<LayerRange> out;
  std::size_t start = 0;
  count_t chiplets_needed = 0;
  auto close = [&](std::size_t end) {
    if (end > start) out.push_back({start, end});
    start = end;
    chiplets_needed = 0;
  };
  for (std::size_t i = 0; i < net.size(); ++i) {
    const count_t w = layer_stats(net[i]).weight_elems * hw.wgt_bytes;
    const count_t need = std::max<count_t>(1, ceil_div(w, cap));
    if (need > C) {
      if (!stream_oversized)
        throw Error(ErrorKind::LayerTooLarge, "layer '" + net[i].name + "' needs " + std::to_string(w) +
                                                  " bytes, package holds " + std::to_string(cap * C));
      close(i);
      close(i + 1);
      continue;
    }
    if (chiplets_needed + need > C || static_cast<count_t>(i - start) + 1 > C) close(i);
    chiplets_needed += need;
  }
  close(net.size());
  return out;
}

enum class Method { Merged, Sequential, FullPipeline, Segmented };

constexpr const char* to_string(Method m) {
  switch (m) {
    case Method::Merged: return "scope";
    case Method::Sequential: return "sequential";
    case Method::FullPipeline: return "full_pipeline";
    case Method::Segmented: return "segmented";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (auto m : {Method::Merged, Method::Sequential, Method::FullPipeline, Method::Segmented})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

struct SearchResult {
  Method method = Method::Merged;
  Schedule schedule;
  CostReport report;
  count_t candidates_evaluated = 0;
  count_t evaluations = 0;
  std::vector<TraceEntry> trace;
};

inline SearchResult run_segments(Method method, const std::vector<LayerRange>& segments, const Network& net,
                                 const HardwareConfig& hw, count_t m, const SearchOptions& opts) {
  SearchResult res;
  res.method = method;
  for (std::size_t si = 0; si < segments.size(); ++si) {
    auto ss = search_segment(segments[si], net, hw, m, opts);
    for (auto& t : ss.trace) {
      t.segment = si;
      res.trace.push_back(t);
    }
    res.candidates_evaluated += ss.candidates_evaluated;
    res.evaluations += ss.evaluations;
    if (!ss.feasible())
      throw Error(ErrorKind::NoFeasibleSchedule,
                  std::string(to_string(method)) + ": no feasible configuration for layers [" +
                      std::to_string(segments[si].first) + ", " + std::to_string(segments[si].last) + ")");
    res.schedule.segments.push_back(std::move(ss.plan));
  }
  res.report = evaluate(res.schedule, net, hw, m);
  return res;
}

inline SearchResult schedule_merged(const Network& net, const HardwareConfig& hw, count_t m,
                                    SearchOptions opts = {}) {
  validate_network(net);
  validate_hardware(hw);
  opts.fixed_clusters.reset();
  return run_segments(Method::Merged, divide_segments(net, hw), net, hw, m, opts);
}

inline SearchResult schedule_baseline(Method kind, const Network& net, const HardwareConfig& hw, count_t m,
                                      SearchOptions opts = {}) {
  validate_network(net);
  validate_hardware(hw);
  switch (kind) {
    case Method::Merged:
      return schedule_merged(net, hw, m, opts);
    case Method::Sequential: {
      std::vector<LayerRange> segs;
      for (std::size_t i = 0; i < net.size(); ++i) segs.push_back({i, i + 1});
      opts.fixed_clusters = 1;
      return run_segments(kind, segs, net, hw, m, opts);
    }
    case Method::FullPipeline: {
      const LayerRange all{0, net.size()};
      const count_t need = total_weight_bytes(net, all, hw);
      const count_t have = hw.weight_capacity() * hw.num_chiplets;
      if (need > have)
        throw Error(ErrorKind::NoFeasibleSchedule,
                    "full_pipeline: weight buffer overflow, network needs " + std::to_string(need) +
                        " bytes, package holds " + std::to_string(have));
      if (static_cast<count_t>(net.size()) > hw.num_chiplets)
        throw Error(ErrorKind::NoFeasibleSchedule, "full_pipeline: " + std::to_string(net.size()) +
                                                       " layers exceed " + std::to_string(hw.num_chiplets) +
                                                       " chiplets");
      opts.fixed_clusters = net.size();
      return run_segments(kind, {all}, net, hw, m, opts);
    }
    case Method::Segmented:
      opts.fixed_clusters = std::numeric_limits<std::size_t>::max();
      return run_segments(kind, divide_segments(net, hw), net, hw, m, opts);
  }
  throw Error(ErrorKind::InvariantViolation, "unknown method");
}

inline SearchResult schedule(Method kind, const Network& net, const HardwareConfig& hw, count_t m,
                             SearchOptions opts = {}) {
  return kind == Method::Merged ? schedule_merged(net, hw, m, opts) : schedule_baseline(kind, net, hw, m, opts);
}

// ---------------------------------------------------------------------------
// Design-space size and exhaustive oracle
// ---------------------------------------------------------------------------

inline BigInt binomial(count_t n, count_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (count_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

/// Cluster/region configurations with exactly `n_clusters` divisions.
inline BigInt design_space_q(count_t n_clusters, count_t L, count_t C) {
  return binomial(L - 1, n_clusters - 1) * binomial(C - 1, n_clusters - 1);
}

/// Every (cluster division, region sizing, per-layer partition) triple.
inline BigInt design_space_size(count_t L, count_t C) {
  if (L < 1 || C < 1) throw Error(ErrorKind::InvariantViolation, "L and C must be >= 1");
  BigInt sum = 0;
  for (count_t n = 1; n <= std::min(L, C); ++n) sum += design_space_q(n, L, C);
  return (BigInt(1) << static_cast<unsigned>(L)) * sum;
}

/// Calls f(parts) for every composition of `total` into `k` positive parts, in
/// lexicographic order.
template <typename F>
void for_each_composition(count_t total, count_t k, F&& f) {
  std::vector<count_t> parts(static_cast<std::size_t>(k), 1);
  if (k < 1 || total < k) return;
  parts.back() = total - (k - 1);
  auto rec = [&](auto&& self, std::size_t pos, count_t remaining) -> void {
    if (pos + 1 == parts.size()) {
      parts[pos] = remaining;
      f(std::as_const(parts));
      return;
    }
    const count_t slots_after = static_cast<count_t>(parts.size() - pos - 1);
    for (count_t v = 1; v <= remaining - slots_after; ++v) {
      parts[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  rec(rec, 0, total);
}

struct Candidate {
  count_t id = 0;
  double latency = 0;
  bool feasible = false;
};

struct ExhaustiveResult {
  std::vector<Candidate> candidates;  // enumeration order
  std::optional<Segment> best;
  double best_latency = std::numeric_limits<double>::infinity();
  count_t feasible_count = 0;

  std::vector<double> sorted_feasible_latencies() const {
    std::vector<double> v;
    for (const auto& c : candidates)
      if (c.feasible) v.push_back(c.latency);
    std::sort(v.begin(), v.end());
    return v;
  }
};

inline count_t default_enumeration_limit() { return 10'000'000; }

/// Enumerates the full design space of one segment. FC layers assigned WSP and
/// other invalid plans are listed as infeasible candidates.
inline ExhaustiveResult exhaustive_search(LayerRange segment, const Network& net, const HardwareConfig& hw,
                                          count_t m, count_t limit = default_enumeration_limit()) {
  const auto L = static_cast<count_t>(segment.size());
  const count_t C = hw.num_chiplets;
  const BigInt space = design_space_size(L, C);
  if (space > limit)
    throw Error(ErrorKind::SpaceTooLarge, "design space has " + space.str() + " candidates, limit is " +
                                              std::to_string(limit));
  ExhaustiveResult out;
  out.candidates.reserve(static_cast<std::size_t>(space));
  std::vector<Partition> parts(segment.size());
  count_t id = 0;
  for (count_t n = 1; n <= std::min(L, C); ++n) {
    for_each_composition(L, n, [&](const std::vector<count_t>& layer_counts) {
      ClusterDivision div;
      std::size_t at = segment.first;
      for (count_t len : layer_counts) {
        div.push_back({at, at + static_cast<std::size_t>(len)});
        at += static_cast<std::size_t>(len);
      }
      for_each_composition(C, n, [&](const std::vector<count_t>& sizes) {
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << L); ++mask) {
          bool allowed = true;
          for (count_t k = 0; k < L; ++k) {
            const bool wsp = (mask >> k) & 1U;
            parts[static_cast<std::size_t>(k)] = wsp ? Partition::WSP : Partition::ISP;
            if (wsp && !net[segment.first + static_cast<std::size_t>(k)].is_conv()) allowed = false;
          }
          Candidate cand{id++, std::numeric_limits<double>::infinity(), false};
          if (allowed) {
            auto seg = make_segment(div, parts, sizes, hw);
            auto ev = evaluate_segment(seg, net, hw, m, Detail::ClustersOnly);
            if (ev.feasible) {
              cand.feasible = true;
              cand.latency = ev.latency();
              ++out.feasible_count;
              if (cand.latency < out.best_latency) {
                out.best_latency = cand.latency;
                out.best = std::move(seg);
              }
            }
          }
          out.candidates.push_back(cand);
        }
      });
    });
  }
  return out;
}

/// Percentage of feasible candidates strictly faster than `latency`.
inline double percentile_rank(std::span<const double> sorted_latencies, double latency) {
  if (sorted_latencies.empty()) return 0.0;
  const auto better = std::lower_bound(sorted_latencies.begin(), sorted_latencies.end(), latency) -
                      sorted_latencies.begin();
  return 100.0 * static_cast<double>(better) / static_cast<double>(sorted_latencies.size());
}

}  // namespace mcmpipe
