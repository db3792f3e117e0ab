#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mcmpipe/core_model.hpp"
#include "mcmpipe/cost_engine.hpp"
#include "mcmpipe/search.hpp"

namespace mcmpipe {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Low-level helpers
// ---------------------------------------------------------------------------

/// Shortest text that parses back to the same double.
inline std::string fmt_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary file and renames, so readers never observe a
/// partial file.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::ParseError, tmp.string() + ": cannot write file");
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::ParseError,
                source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

namespace io_detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw Error(ErrorKind::ParseError, where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorKind::ParseError, where + "." + key + ": unknown field");
  }
}

inline count_t get_count(const json& obj, const std::string& where, const char* key,
                         std::optional<count_t> fallback, count_t min_value = 1) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw Error(ErrorKind::ParseError, where + "." + key + ": missing required field");
  }
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<count_t>() < min_value)
    throw Error(ErrorKind::ParseError, where + "." + key + ": expected an integer >= " + std::to_string(min_value));
  return v.get<count_t>();
}

inline double get_real(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number() || !(v.get<double>() > 0))
    throw Error(ErrorKind::ParseError, where + "." + key + ": expected a positive number");
  return v.get<double>();
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// Network and hardware files
// ---------------------------------------------------------------------------

inline Network network_from_json(const json& doc, const std::string& source = "network") {
  using namespace io_detail;
  check_keys(doc, source, {"name", "layers"});
  Network net;
  net.name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : "network";
  if (!doc.contains("layers") || !doc["layers"].is_array())
    throw Error(ErrorKind::ParseError, source + ".layers: expected an array");
  std::size_t i = 0;
  for (const auto& l : doc["layers"]) {
    const std::string at = source + ".layers[" + std::to_string(i++) + "]";
    check_keys(l, at, {"kind", "name", "c_in", "c_out", "h_in", "w_in", "k", "stride", "pad", "pool"});
    if (!l.contains("kind") || !l["kind"].is_string())
      throw Error(ErrorKind::ParseError, at + ".kind: expected \"conv\" or \"fc\"");
    const auto kind = l["kind"].get<std::string>();
    LayerDesc d;
    d.name = l.contains("name") && l["name"].is_string() ? l["name"].get<std::string>()
                                                          : "layer" + std::to_string(i);
    d.c_in = get_count(l, at, "c_in", std::nullopt);
    d.c_out = get_count(l, at, "c_out", std::nullopt);
    if (kind == "conv") {
      d.kind = LayerKind::Conv;
      d.h_in = get_count(l, at, "h_in", std::nullopt);
      d.w_in = get_count(l, at, "w_in", d.h_in);
      d.k_h = d.k_w = get_count(l, at, "k", 1);
      d.stride = get_count(l, at, "stride", 1);
      d.padding = get_count(l, at, "pad", 0, 0);
      d.pool = get_count(l, at, "pool", 1);
    } else if (kind == "fc") {
      d.kind = LayerKind::FC;
      for (const char* key : {"h_in", "w_in", "k", "stride", "pad", "pool"})
        if (l.contains(key)) throw Error(ErrorKind::ParseError, at + "." + key + ": not allowed on fc layers");
    } else {
      throw Error(ErrorKind::ParseError, at + ".kind: expected \"conv\" or \"fc\", got \"" + kind + "\"");
    }
    try {
      validate_layer(d);
    } catch (const Error& e) {
      throw Error(ErrorKind::InvariantViolation, at + ": " + e.what());
    }
    net.layers.push_back(std::move(d));
  }
  validate_network(net);
  return net;
}

inline json network_to_json(const Network& net) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    json j;
    j["kind"] = l.is_conv() ? "conv" : "fc";
    j["name"] = l.name;
    j["c_in"] = l.c_in;
    j["c_out"] = l.c_out;
    if (l.is_conv()) {
      j["h_in"] = l.h_in;
      j["w_in"] = l.w_in;
      j["k"] = l.k_h;
      j["stride"] = l.stride;
      j["pad"] = l.padding;
      if (l.pool != 1) j["pool"] = l.pool;
    }
    layers.push_back(std::move(j));
  }
  return json{{"name", net.name}, {"layers", std::move(layers)}};
}

inline Network load_network(const std::filesystem::path& path) {
  return network_from_json(parse_json_text(read_text(path), path.string()), path.string());
}

inline HardwareConfig hardware_from_json(const json& doc, const std::string& source = "hardware") {
  using namespace io_detail;
  check_keys(doc, source,
             {"num_chiplets", "mesh_rows", "mesh_cols", "pes_per_chiplet", "lanes_per_pe", "macs_per_lane",
              "clock_hz", "weight_buf_per_pe", "global_buf", "nop_bw_per_chiplet", "dram_bw_total", "e_mac",
              "e_nop_bit", "e_dram_bit", "act_bytes", "wgt_bytes"});
  HardwareConfig hw;
  const bool has_c = doc.contains("num_chiplets");
  const bool has_mesh = doc.contains("mesh_rows") || doc.contains("mesh_cols");
  if (has_c) hw = with_chiplets(hw, get_count(doc, source, "num_chiplets", std::nullopt));
  if (has_mesh) {
    hw.mesh_rows = get_count(doc, source, "mesh_rows", hw.mesh_rows);
    hw.mesh_cols = get_count(doc, source, "mesh_cols", hw.mesh_cols);
    if (!has_c) hw.num_chiplets = hw.mesh_rows * hw.mesh_cols;
  }
  hw.pes_per_chiplet = get_count(doc, source, "pes_per_chiplet", hw.pes_per_chiplet);
  hw.lanes_per_pe = get_count(doc, source, "lanes_per_pe", hw.lanes_per_pe);
  hw.macs_per_lane = get_count(doc, source, "macs_per_lane", hw.macs_per_lane);
  hw.clock_hz = get_real(doc, source, "clock_hz", hw.clock_hz);
  hw.weight_buf_per_pe = get_count(doc, source, "weight_buf_per_pe", hw.weight_buf_per_pe);
  hw.global_buf = get_count(doc, source, "global_buf", hw.global_buf);
  hw.nop_bw_per_chiplet = get_real(doc, source, "nop_bw_per_chiplet", hw.nop_bw_per_chiplet);
  hw.dram_bw_total = get_real(doc, source, "dram_bw_total", hw.dram_bw_total);
  hw.e_mac = get_real(doc, source, "e_mac", hw.e_mac);
  hw.e_nop_bit = get_real(doc, source, "e_nop_bit", hw.e_nop_bit);
  hw.e_dram_bit = get_real(doc, source, "e_dram_bit", hw.e_dram_bit);
  hw.act_bytes = get_count(doc, source, "act_bytes", hw.act_bytes);
  hw.wgt_bytes = get_count(doc, source, "wgt_bytes", hw.wgt_bytes);
  validate_hardware(hw);
  return hw;
}

inline json hardware_to_json(const HardwareConfig& hw) {
  return json{{"num_chiplets", hw.num_chiplets},
              {"mesh_rows", hw.mesh_rows},
              {"mesh_cols", hw.mesh_cols},
              {"pes_per_chiplet", hw.pes_per_chiplet},
              {"lanes_per_pe", hw.lanes_per_pe},
              {"macs_per_lane", hw.macs_per_lane},
              {"clock_hz", hw.clock_hz},
              {"weight_buf_per_pe", hw.weight_buf_per_pe},
              {"global_buf", hw.global_buf},
              {"nop_bw_per_chiplet", hw.nop_bw_per_chiplet},
              {"dram_bw_total", hw.dram_bw_total},
              {"e_mac", hw.e_mac},
              {"e_nop_bit", hw.e_nop_bit},
              {"e_dram_bit", hw.e_dram_bit},
              {"act_bytes", hw.act_bytes},
              {"wgt_bytes", hw.wgt_bytes}};
}

inline HardwareConfig load_hardware(const std::filesystem::path& path) {
  return hardware_from_json(parse_json_text(read_text(path), path.string()), path.string());
}

// ---------------------------------------------------------------------------
// Schedules and reports
// ---------------------------------------------------------------------------

inline json schedule_to_json(const Schedule& s, const Network& net, const HardwareConfig& hw) {
  json segs = json::array();
  for (const auto& seg : s.segments) {
    json clusters = json::array();
    for (const auto& c : seg.clusters) {
      json placement = json::array();
      for (const auto& p : c.placement) placement.push_back({p.row, p.col});
      json parts = json::array();
      for (auto p : c.partitions) parts.push_back(to_string(p));
      clusters.push_back({{"first", c.layers.first},
                          {"last", c.layers.last},
                          {"region_size", c.region_size},
                          {"placement", std::move(placement)},
                          {"partitions", std::move(parts)}});
    }
    segs.push_back({{"clusters", std::move(clusters)}});
  }
  return json{{"network", net.name},
              {"num_chiplets", hw.num_chiplets},
              {"mesh_rows", hw.mesh_rows},
              {"mesh_cols", hw.mesh_cols},
              {"segments", std::move(segs)}};
}

inline Schedule schedule_from_json(const json& doc, const std::string& source = "schedule") {
  Schedule s;
  try {
    for (const auto& seg : doc.at("segments")) {
      Segment out;
      for (const auto& c : seg.at("clusters")) {
        Cluster cl;
        cl.layers = {c.at("first").get<std::size_t>(), c.at("last").get<std::size_t>()};
        cl.region_size = c.at("region_size").get<count_t>();
        for (const auto& p : c.at("placement")) cl.placement.push_back({p.at(0).get<count_t>(), p.at(1).get<count_t>()});
        for (const auto& p : c.at("partitions")) {
          const auto name = p.get<std::string>();
          if (name != "ISP" && name != "WSP") throw Error(ErrorKind::ParseError, source + ": bad partition " + name);
          cl.partitions.push_back(name == "ISP" ? Partition::ISP : Partition::WSP);
        }
        out.clusters.push_back(std::move(cl));
      }
      s.segments.push_back(std::move(out));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, source + ": " + e.what());
  }
  return s;
}

inline json report_to_json(const CostReport& r, const Network& net) {
  json segs = json::array();
  for (const auto& seg : r.segments) {
    json clusters = json::array();
    for (const auto& c : seg.clusters) {
      json layers = json::array();
      for (const auto& l : c.layers)
        layers.push_back({{"layer", l.layer},
                          {"name", net[l.layer].name},
                          {"partition", to_string(l.partition)},
                          {"t_pre", l.times.t_pre},
                          {"t_comp", l.times.t_comp},
                          {"t_comm", l.times.t_comm},
                          {"t_layer", l.times.t_layer}});
      clusters.push_back({{"t_cluster", c.t_cluster},
                          {"region_size", c.region_size},
                          {"macs", c.macs},
                          {"layers", std::move(layers)}});
    }
    segs.push_back({{"t_segment", seg.t_segment},
                    {"t_pipeline", seg.t_pipeline},
                    {"t_weight_load", seg.t_weight_load},
                    {"clusters", std::move(clusters)}});
  }
  return json{{"t_system", r.t_system},
              {"m_samples", r.m_samples},
              {"energy", {{"e_mac", r.energy.e_mac}, {"e_nop", r.energy.e_nop}, {"e_dram", r.energy.e_dram}}},
              {"chiplet_peak_weight_bytes", r.chiplet_peak_weight_bytes},
              {"segments", std::move(segs)}};
}

inline json search_result_to_json(const SearchResult& res, const Network& net, const HardwareConfig& hw) {
  json trace = json::array();
  for (const auto& t : res.trace)
    trace.push_back({{"segment", t.segment},
                     {"n_clusters", t.n_clusters},
                     {"idx", t.idx},
                     {"latency", t.latency ? json(*t.latency) : json(nullptr)}});
  return json{{"method", to_string(res.method)},
              {"candidates_evaluated", res.candidates_evaluated},
              {"evaluations", res.evaluations},
              {"schedule", schedule_to_json(res.schedule, net, hw)},
              {"report", report_to_json(res.report, net)},
              {"trace", std::move(trace)}};
}

inline std::string layer_csv(const CostReport& r) {
  std::string out = "segment,cluster,layer,t_pre,t_comp,t_comm,t_layer\n";
  for (std::size_t si = 0; si < r.segments.size(); ++si)
    for (std::size_t ci = 0; ci < r.segments[si].clusters.size(); ++ci)
      for (const auto& l : r.segments[si].clusters[ci].layers)
        out += std::to_string(si) + "," + std::to_string(ci) + "," + std::to_string(l.layer) + "," +
               fmt_double(l.times.t_pre) + "," + fmt_double(l.times.t_comp) + "," + fmt_double(l.times.t_comm) +
               "," + fmt_double(l.times.t_layer) + "\n";
  return out;
}

/// candidate_id,latency,feasible; infeasible rows carry an empty latency.
inline std::string distribution_csv(const ExhaustiveResult& ex, std::optional<std::size_t> segment = std::nullopt) {
  std::string out = segment ? "segment,candidate_id,latency,feasible\n" : "candidate_id,latency,feasible\n";
  const std::string prefix = segment ? std::to_string(*segment) + "," : "";
  for (const auto& c : ex.candidates)
    out += prefix + std::to_string(c.id) + "," + (c.feasible ? fmt_double(c.latency) : "") + "," +
           (c.feasible ? "1" : "0") + "\n";
  return out;
}

}  // namespace mcmpipe
