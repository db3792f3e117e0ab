#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "mcmpipe/io.hpp"
#include "mcmpipe/model_zoo.hpp"
#include "mcmpipe/parallel.hpp"
#include "mcmpipe/search.hpp"

namespace mcmpipe {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int parse = 1;
inline constexpr int infeasible = 2;
inline constexpr int too_large = 3;
}  // namespace exit_code

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::InfeasibleSchedule:
    case ErrorKind::NoFeasibleSchedule:
    case ErrorKind::LayerTooLarge:
    case ErrorKind::TooManyClusters:
      return exit_code::infeasible;
    case ErrorKind::SpaceTooLarge:
      return exit_code::too_large;
    default:
      return exit_code::parse;
  }
}

/// A built-in name or a path to a network JSON file.
inline Network resolve_network(const std::string& spec) {
  if (is_builtin_network(spec)) return builtin_network(spec);
  if (std::filesystem::exists(spec)) return load_network(spec);
  throw Error(ErrorKind::UnknownNetwork, "'" + spec + "' is neither a built-in network nor a file");
}

inline HardwareConfig resolve_hardware(const std::string& hw_path, std::optional<count_t> chiplets) {
  HardwareConfig hw = hw_path.empty() ? HardwareConfig{} : load_hardware(hw_path);
  if (chiplets) {
    if (*chiplets < 1) throw Error(ErrorKind::ParseError, "--chiplets must be >= 1");
    hw = with_chiplets(hw, *chiplets);
  }
  validate_hardware(hw);
  return hw;
}

inline std::vector<double> cluster_macs(const CostReport& r) {
  std::vector<double> v;
  for (const auto& s : r.segments)
    for (const auto& c : s.clusters) v.push_back(static_cast<double>(c.macs));
  return v;
}

/// Population coefficient of variation.
inline double coefficient_of_variation(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (mean == 0) return 0.0;
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  return std::sqrt(var) / mean;
}

inline std::string cluster_counts(const CostReport& r) {
  std::string s;
  for (std::size_t i = 0; i < r.segments.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(r.segments[i].clusters.size());
  }
  return s;
}

// ---------------------------------------------------------------------------
// schedule
// ---------------------------------------------------------------------------

struct ScheduleArgs {
  std::string net;
  std::string hw;
  std::optional<count_t> chiplets;
  Method method = Method::Merged;
  count_t samples = 64;
  std::filesystem::path out = ".";
  unsigned threads = 0;
};

inline int cmd_schedule(const ScheduleArgs& a, std::ostream& out, std::ostream& err) {
  try {
    const Network net = resolve_network(a.net);
    const HardwareConfig hw = resolve_hardware(a.hw, a.chiplets);
    if (a.samples < 1) throw Error(ErrorKind::ParseError, "--samples must be >= 1");
    const auto res = schedule(a.method, net, hw, a.samples, {std::nullopt, a.threads});
    if (auto bad = check_report_identities(res.report))
      throw Error(ErrorKind::InvariantViolation, *bad);
    write_text_atomic(a.out / "schedule.json", schedule_to_json(res.schedule, net, hw).dump(2) + "\n");
    write_text_atomic(a.out / "report.json", search_result_to_json(res, net, hw).dump(2) + "\n");
    write_text_atomic(a.out / "layers.csv", layer_csv(res.report));
    const auto& e = res.report.energy;
    out << "network     " << net.name << " (" << net.size() << " layers)\n"
        << "method      " << to_string(a.method) << "\n"
        << "chiplets    " << hw.num_chiplets << " (" << hw.mesh_rows << "x" << hw.mesh_cols << ")\n"
        << "segments    " << res.schedule.segments.size() << " [clusters " << cluster_counts(res.report) << "]\n"
        << "t_system    " << fmt_double(res.report.t_system) << " s\n"
        << "throughput  " << fmt_double(static_cast<double>(a.samples) / res.report.t_system) << " samples/s\n"
        << "energy      " << fmt_double(e.total()) << " J (mac " << fmt_double(e.e_mac) << ", nop "
        << fmt_double(e.e_nop) << ", dram " << fmt_double(e.e_dram) << ")\n";
    return exit_code::ok;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code_for(ex.kind());
  }
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareArgs {
  std::vector<std::string> nets;
  std::string hw;
  std::vector<count_t> chiplets{16, 64, 256};
  std::vector<Method> methods{Method::Merged, Method::Sequential, Method::FullPipeline, Method::Segmented};
  count_t samples = 64;
  std::filesystem::path out = ".";
  unsigned threads = 0;
};

struct CompareCell {
  std::string network;
  count_t chiplets = 0;
  Method method = Method::Merged;
  bool ok = false;
  std::string diagnostic;
  CostReport report;
  std::size_t segments = 0;
};

inline std::vector<CompareCell> run_compare(const CompareArgs& a) {
  std::vector<Network> nets;
  for (const auto& n : a.nets) nets.push_back(resolve_network(n));
  std::vector<HardwareConfig> hws;
  for (count_t c : a.chiplets) hws.push_back(resolve_hardware(a.hw, c));

  std::vector<CompareCell> cells;
  for (const auto& net : nets)
    for (const auto& hw : hws)
      for (auto m : a.methods) cells.push_back({net.name, hw.num_chiplets, m, false, "", {}, 0});

  const std::size_t per_net = hws.size() * a.methods.size();
  // Cells run in parallel; each search stays single-threaded so the pool is not oversubscribed.
  parallel_for(cells.size(), a.threads, [&](std::size_t i) {
    auto& cell = cells[i];
    const auto& net = nets[i / per_net];
    const auto& hw = hws[(i % per_net) / a.methods.size()];
    try {
      auto res = schedule(cell.method, net, hw, a.samples, {std::nullopt, 1});
      cell.report = std::move(res.report);
      cell.segments = res.schedule.segments.size();
      cell.ok = true;
    } catch (const Error& ex) {
      cell.diagnostic = ex.what();
    }
  });
  return cells;
}

inline std::string csv_quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline std::string compare_csv(const std::vector<CompareCell>& cells, count_t samples) {
  std::string s = "network,chiplets,method,status,latency,throughput,e_mac,e_nop,e_dram,e_total,segments,clusters,diagnostic\n";
  for (const auto& c : cells) {
    s += c.network + "," + std::to_string(c.chiplets) + "," + to_string(c.method) + ",";
    if (c.ok) {
      const auto& r = c.report;
      s += "ok," + fmt_double(r.t_system) + "," + fmt_double(static_cast<double>(samples) / r.t_system) + "," +
           fmt_double(r.energy.e_mac) + "," + fmt_double(r.energy.e_nop) + "," + fmt_double(r.energy.e_dram) + "," +
           fmt_double(r.energy.total()) + "," + std::to_string(c.segments) + "," + cluster_counts(r) + ",\n";
    } else {
      s += "infeasible,,,,,,,,," + csv_quote(c.diagnostic) + "\n";
    }
  }
  return s;
}

/// Throughput per (network, method) divided by the throughput at the smallest
/// chiplet count of the sweep. Empty when either cell is infeasible.
inline std::string normalized_csv(const std::vector<CompareCell>& cells, count_t samples) {
  std::string s = "network,method,chiplets,throughput,normalized\n";
  auto thr = [&](const CompareCell& c) { return static_cast<double>(samples) / c.report.t_system; };
  for (const auto& c : cells) {
    const CompareCell* base = nullptr;
    for (const auto& b : cells)
      if (b.network == c.network && b.method == c.method && (!base || b.chiplets < base->chiplets)) base = &b;
    s += c.network + "," + to_string(c.method) + "," + std::to_string(c.chiplets) + ",";
    if (c.ok) {
      s += fmt_double(thr(c)) + ",";
      if (base && base->ok) s += fmt_double(thr(c) / thr(*base));
    } else {
      s += ",";
    }
    s += "\n";
  }
  return s;
}

inline int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  try {
    if (a.nets.empty() || a.chiplets.empty() || a.methods.empty())
      throw Error(ErrorKind::ParseError, "compare needs at least one network, chiplet count and method");
    const auto cells = run_compare(a);
    write_text_atomic(a.out / "compare.csv", compare_csv(cells, a.samples));
    write_text_atomic(a.out / "normalized.csv", normalized_csv(cells, a.samples));
    std::size_t ok = 0;
    for (const auto& c : cells) {
      ok += c.ok;
      out << std::left << std::setw(10) << c.network << std::setw(6) << c.chiplets << std::setw(15)
          << to_string(c.method);
      if (c.ok)
        out << fmt_double(static_cast<double>(a.samples) / c.report.t_system) << " samples/s\n";
      else
        out << "infeasible: " << c.diagnostic << "\n";
    }
    return ok > 0 ? exit_code::ok : exit_code::infeasible;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code_for(ex.kind());
  }
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::string net;
  std::string hw;
  std::optional<count_t> chiplets;
  std::optional<std::pair<std::size_t, std::size_t>> layers;  // [first, last)
  count_t samples = 64;
  std::filesystem::path out = ".";
  unsigned threads = 0;
};

/// SCOPE_MAX_ENUM, or the default when unset.
inline count_t enumeration_limit_from_env() {
  const char* v = std::getenv("SCOPE_MAX_ENUM");
  if (!v || !*v) return default_enumeration_limit();
  char* end = nullptr;
  const long long n = std::strtoll(v, &end, 10);
  if (*end != '\0' || n < 1) throw Error(ErrorKind::ParseError, std::string("SCOPE_MAX_ENUM: bad value '") + v + "'");
  return n;
}

inline int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  try {
    Network net = resolve_network(a.net);
    if (a.layers) {
      if (a.layers->first >= a.layers->second || a.layers->second > net.size())
        throw Error(ErrorKind::ParseError, "--layers out of range for " + net.name);
      net = slice_network(net, a.layers->first, a.layers->second);
    }
    const HardwareConfig hw = resolve_hardware(a.hw, a.chiplets);
    const auto L = static_cast<count_t>(net.size());
    const BigInt q_total = design_space_size(L, hw.num_chiplets);
    const count_t limit = enumeration_limit_from_env();
    out << "network     " << net.name << " (" << L << " layers), " << hw.num_chiplets << " chiplets\n"
        << "Q_total     " << q_total.str() << "\n";
    if (q_total > limit) {
      err << "error: space-too-large: Q_total = " << q_total.str() << " exceeds the enumeration limit " << limit
          << "\n";
      return exit_code::too_large;
    }
    const LayerRange all{0, net.size()};
    const auto heur = search_segment(all, net, hw, a.samples, {std::nullopt, a.threads});
    const auto ex = exhaustive_search(all, net, hw, a.samples, limit);
    if (ex.feasible_count == 0) throw Error(ErrorKind::NoFeasibleSchedule, "no feasible configuration exists");
    if (!heur.feasible()) throw Error(ErrorKind::NoFeasibleSchedule, "heuristic found no feasible configuration");
    const auto sorted = ex.sorted_feasible_latencies();
    const double lat = heur.eval.latency();
    const double rank = percentile_rank(sorted, lat);
    write_text_atomic(a.out / "distribution.csv", distribution_csv(ex));
    write_text_atomic(a.out / "validate_summary.csv",
                      "network,chiplets,layers,candidates,feasible,heuristic_latency,optimal_latency,ratio,"
                      "percentile_rank\n" +
                          net.name + "," + std::to_string(hw.num_chiplets) + "," + std::to_string(L) + "," +
                          std::to_string(ex.candidates.size()) + "," + std::to_string(ex.feasible_count) + "," +
                          fmt_double(lat) + "," + fmt_double(ex.best_latency) + "," +
                          fmt_double(lat / ex.best_latency) + "," + fmt_double(rank) + "\n");
    out << "feasible    " << ex.feasible_count << " of " << ex.candidates.size() << "\n"
        << "heuristic   " << fmt_double(lat) << " s (" << heur.candidates_evaluated << " candidates)\n"
        << "optimum     " << fmt_double(ex.best_latency) << " s\n"
        << "ratio       " << fmt_double(lat / ex.best_latency) << "\n"
        << "rank        " << fmt_double(rank) << " % of feasible schedules are faster\n";
    return exit_code::ok;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code_for(ex.kind());
  }
}

// ---------------------------------------------------------------------------
// breakdown
// ---------------------------------------------------------------------------

struct BreakdownArgs {
  std::string net;
  std::string hw;
  std::optional<count_t> chiplets;
  std::vector<Method> methods{Method::Merged, Method::Segmented};
  count_t samples = 64;
  std::filesystem::path out = ".";
  unsigned threads = 0;
};

inline int cmd_breakdown(const BreakdownArgs& a, std::ostream& out, std::ostream& err) {
  try {
    if (a.methods.empty()) throw Error(ErrorKind::ParseError, "breakdown needs at least one method");
    const Network net = resolve_network(a.net);
    const HardwareConfig hw = resolve_hardware(a.hw, a.chiplets);
    std::vector<SearchResult> runs;
    for (auto m : a.methods) runs.push_back(schedule(m, net, hw, a.samples, {std::nullopt, a.threads}));

    // Energy is normalized to Scope's total when Scope is in the list, else to the first method.
    double ref = runs.front().report.energy.total();
    for (const auto& r : runs)
      if (r.method == Method::Merged) ref = r.report.energy.total();

    std::string loads = "method,segment,cluster,first,last,region_size,macs,normalized\n";
    std::string energy = "method,e_mac,e_nop,e_dram,e_total\n";
    for (const auto& r : runs) {
      const auto macs = cluster_macs(r.report);
      double mean = 0;
      for (double x : macs) mean += x;
      mean /= static_cast<double>(macs.size());
      for (std::size_t si = 0; si < r.schedule.segments.size(); ++si) {
        const auto& seg = r.schedule.segments[si];
        for (std::size_t ci = 0; ci < seg.clusters.size(); ++ci) {
          const auto& c = r.report.segments[si].clusters[ci];
          loads += std::string(to_string(r.method)) + "," + std::to_string(si) + "," + std::to_string(ci) + "," +
                   std::to_string(seg.clusters[ci].layers.first) + "," +
                   std::to_string(seg.clusters[ci].layers.last) + "," + std::to_string(c.region_size) + "," +
                   std::to_string(c.macs) + "," + fmt_double(static_cast<double>(c.macs) / mean) + "\n";
        }
      }
      const auto& e = r.report.energy;
      energy += std::string(to_string(r.method)) + "," + fmt_double(e.e_mac / ref) + "," + fmt_double(e.e_nop / ref) +
                "," + fmt_double(e.e_dram / ref) + "," + fmt_double(e.total() / ref) + "\n";
      out << std::left << std::setw(15) << to_string(r.method) << "clusters " << std::setw(5) << macs.size()
          << "load cv " << fmt_double(coefficient_of_variation(macs)) << "  energy "
          << fmt_double(e.total() / ref) << "\n";
    }
    write_text_atomic(a.out / "loads.csv", loads);
    write_text_atomic(a.out / "energy.csv", energy);
    return exit_code::ok;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code_for(ex.kind());
  }
}

// ---------------------------------------------------------------------------
// count
// ---------------------------------------------------------------------------

inline int cmd_count(count_t layers, count_t chiplets, std::ostream& out, std::ostream& err) {
  try {
    const BigInt q = design_space_size(layers, chiplets);
    const std::string digits = q.str();
    out << digits << "\n";
    if (digits.size() > 6)
      out << "~ " << digits[0] << "." << digits.substr(1, 2) << "e" << digits.size() - 1 << "\n";
    return exit_code::ok;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code_for(ex.kind());
  }
}

}  // namespace mcmpipe
