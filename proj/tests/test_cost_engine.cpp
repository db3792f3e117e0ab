#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace mcmpipe;
using testsupport::random_conv;
using testsupport::random_conv_net;

TEST(ComputeTime, IspExample) {
  HardwareConfig hw;
  auto l = conv_layer("c", 128, 256, 14, 3, 1);
  ASSERT_EQ(l.h_out(), 14);
  EXPECT_DOUBLE_EQ(compute_time(l, Partition::ISP, 4, hw), 28'224 / 8.0e8);
  EXPECT_DOUBLE_EQ(compute_time(l, Partition::ISP, 1, hw), 56'448 / 8.0e8);
  EXPECT_DOUBLE_EQ(compute_time(l, Partition::ISP, 1, hw) / compute_time(l, Partition::ISP, 4, hw), 2.0);
}

TEST(ComputeTime, MinimalLayer) {
  HardwareConfig hw;
  EXPECT_DOUBLE_EQ(compute_time(conv_layer("u", 1, 1, 1, 1, 1, 0), Partition::ISP, 1, hw), 1 / 8.0e8);
}

TEST(ComputeTime, WspRowsBeyondHeightInvalid) {
  auto l = conv_layer("c", 8, 8, 4, 3, 1);
  EXPECT_TRUE(partition_valid(l, Partition::WSP, 4));
  EXPECT_FALSE(partition_valid(l, Partition::WSP, 5));
  EXPECT_FALSE(partition_valid(fc_layer("f", 4, 4), Partition::WSP, 1));
}

TEST(ComputeTime, NonIncreasingInRegionSize) {
  std::mt19937_64 rng(11);
  HardwareConfig hw;
  for (int t = 0; t < 300; ++t) {
    auto l = random_conv(rng);
    for (auto p : {Partition::ISP, Partition::WSP}) {
      double prev = compute_time(l, p, 1, hw);
      for (count_t n = 2; n <= 64; ++n) {
        if (!partition_valid(l, p, n)) break;
        const double cur = compute_time(l, p, n, hw);
        EXPECT_LE(cur, prev);
        prev = cur;
      }
    }
  }
}

TEST(CommVolume, Examples) {
  HardwareConfig hw;
  // 100 output bytes from a layer with c_out=4, 5x5 output.
  auto a = conv_layer("a", 4, 4, 5, 1, 1, 0);
  ASSERT_EQ(layer_stats(a).act_out_elems, 100);
  auto b3 = conv_layer("b", 4, 4, 5, 3, 1);
  auto b1 = conv_layer("b", 4, 4, 5, 1, 1, 0);
  EXPECT_EQ(comm_volume({&a, Partition::ISP, 4}, {&b3, Partition::ISP, 4}, true, hw), 300);
  EXPECT_EQ(comm_volume({&a, Partition::WSP, 2}, {&b3, Partition::ISP, 8}, false, hw), 800);
  EXPECT_EQ(comm_volume({&a, Partition::ISP, 2}, {&b3, Partition::ISP, 8}, false, hw), 800);
  EXPECT_EQ(comm_volume({&a, Partition::WSP, 4}, {&b1, Partition::WSP, 4}, true, hw), 0);
}

// Closed forms written out independently of comm_volume.
TEST(CommVolume, RandomPairsMatchClosedForms) {
  std::mt19937_64 rng(2024);
  HardwareConfig hw;
  for (int t = 0; t < 200; ++t) {
    auto cur = random_conv(rng, "cur");
    auto next = random_conv(rng, "next");
    const count_t r = std::uniform_int_distribution<count_t>(1, 64)(rng);
    const count_t r2 = std::uniform_int_distribution<count_t>(1, 64)(rng);
    const count_t out = cur.c_out * cur.next_h() * cur.next_w();
    const count_t halo_same = (r - 1) * std::max<count_t>(next.k_h - next.stride, 0) * next.w_in * next.c_in;
    using P = Partition;
    EXPECT_EQ(comm_volume({&cur, P::WSP, r}, {&next, P::WSP, r}, true, hw), halo_same);
    EXPECT_EQ(comm_volume({&cur, P::WSP, r}, {&next, P::ISP, r}, true, hw), (r - 1) * out);
    EXPECT_EQ(comm_volume({&cur, P::ISP, r}, {&next, P::WSP, r}, true, hw), (r - 1) * out + halo_same);
    EXPECT_EQ(comm_volume({&cur, P::ISP, r}, {&next, P::ISP, r}, true, hw), (r - 1) * out);
    for (auto pc : {P::ISP, P::WSP}) {
      EXPECT_EQ(comm_volume({&cur, pc, r}, {&next, P::WSP, r2}, false, hw), out);
      EXPECT_EQ(comm_volume({&cur, pc, r}, {&next, P::ISP, r2}, false, hw), r2 * out);
    }
  }
}

TEST(CommTime, Examples) {
  HardwareConfig hw;
  EXPECT_EQ(comm_time(0, 2, 4, 2, false, hw), 0.0);
  EXPECT_DOUBLE_EQ(comm_time(1'000'000, 2, 4, 2, false, hw), 5e-6);
  EXPECT_DOUBLE_EQ(comm_time(1'000'000, 4, 4, 0, true, hw), 2.5e-6);
  // Regions with no shared edge still get one link.
  EXPECT_DOUBLE_EQ(comm_time(1'000'000, 4, 4, 0, false, hw), 1e-5);
}

TEST(PrepTime, Examples) {
  HardwareConfig hw;
  auto l = conv_layer("w", 1000, 1000, 4, 1, 1, 0);
  ASSERT_EQ(layer_stats(l).weight_elems, 1'000'000);
  EXPECT_EQ(prep_time(l, Partition::WSP, 1, hw, false), 0.0);
  EXPECT_DOUBLE_EQ(prep_time(l, Partition::WSP, 4, hw, false), 7.5e-6);
  EXPECT_EQ(prep_time(l, Partition::WSP, 4, hw, false, WeightMode::Replicated), 0.0);
  for (count_t n : {1, 2, 7, 64}) EXPECT_EQ(prep_time(l, Partition::ISP, n, hw, false), 0.0);
  EXPECT_DOUBLE_EQ(prep_time(l, Partition::ISP, 4, hw, true), 1e-5);
  EXPECT_THROW(prep_time(l, Partition::ISP, 0, hw, false), Error);
}

TEST(Footprint, OneLayerAtCapacity) {
  HardwareConfig hw;
  Network net{"f", {conv_layer("w", 1024, 1024, 4, 1, 1, 0)}};
  ASSERT_EQ(total_weight_bytes(net, {0, 1}, hw), hw.weight_capacity());
  std::vector<Partition> isp{Partition::ISP}, wsp{Partition::WSP};
  auto a = region_footprint(net, {0, 1}, isp, 4, hw);
  EXPECT_EQ(a.resident, 262'144.0);
  EXPECT_EQ(a.transient_peak, 262'144.0);
  EXPECT_TRUE(a.feasible);
  auto b = region_footprint(net, {0, 1}, wsp, 4, hw);
  EXPECT_EQ(b.resident, 262'144.0);
  EXPECT_EQ(b.transient_peak, static_cast<double>(hw.weight_capacity()));
  EXPECT_TRUE(b.feasible);
}

TEST(Footprint, EmptySegment) {
  HardwareConfig hw;
  Network net{"e", {conv_layer("a", 1, 1, 1, 1, 1, 0)}};
  auto f = weight_footprint(Segment{}, net, hw);
  EXPECT_TRUE(f.feasible);
  for (double b : f.per_chiplet) EXPECT_EQ(b, 0.0);
}

TEST(Pipeline, Examples) {
  std::vector<double> t{10e-6, 10e-6};
  EXPECT_DOUBLE_EQ(pipeline_time(t, 4), 50e-6);
  auto p = compose_phases(1e-6, 3e-6, 2e-6);
  EXPECT_DOUBLE_EQ(p.t_layer, 4e-6);
  std::vector<double> one{7e-6};
  EXPECT_EQ(pipeline_time(one, 1), 7e-6);
}

TEST(Evaluate, SingleLayerSingleSample) {
  auto hw = with_chiplets(HardwareConfig{}, 1);
  Network net{"one", {conv_layer("a", 8, 8, 8, 3, 1)}};
  Schedule s{{Segment{{Cluster{{0, 1}, 1, {{0, 0}}, {Partition::ISP}}}}}};
  auto r = evaluate(s, net, hw, 1);
  const auto& seg = r.segments[0];
  EXPECT_EQ(seg.t_pipeline, seg.clusters[0].t_cluster);
  EXPECT_EQ(r.t_system, seg.t_weight_load + seg.t_pipeline);
  EXPECT_EQ(check_report_identities(r), std::nullopt);
}

TEST(Evaluate, OverflowDiagnosticNamesChiplet) {
  auto hw = with_chiplets(HardwareConfig{}, 2);
  Network net{"big", {conv_layer("a", 1024, 1024, 4, 1, 1, 0), conv_layer("b", 1024, 1024, 4, 1, 1, 0),
                      conv_layer("c", 1024, 1024, 4, 1, 1, 0)}};
  Schedule s{{Segment{{Cluster{{0, 2}, 1, {{0, 0}}, {Partition::ISP, Partition::ISP}},
                       Cluster{{2, 3}, 1, {{0, 1}}, {Partition::ISP}}}}}};
  try {
    evaluate(s, net, hw, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleSchedule);
    EXPECT_NE(std::string(e.what()).find("chiplet (0,0)"), std::string::npos);
  }
}

TEST(Evaluate, RandomPlansSatisfyIdentitiesAndEnergy) {
  std::mt19937_64 rng(99);
  int feasible = 0;
  for (int t = 0; t < 300; ++t) {
    auto net = random_conv_net(rng, std::uniform_int_distribution<std::size_t>(1, 6)(rng));
    const auto L = static_cast<count_t>(net.size());
    const count_t C = std::uniform_int_distribution<count_t>(L, 16)(rng);
    const count_t m = std::uniform_int_distribution<count_t>(1, 32)(rng);
    auto hw = with_chiplets(HardwareConfig{}, C);
    // Random division into N clusters and random sizes.
    const auto N = std::uniform_int_distribution<count_t>(1, L)(rng);
    std::vector<std::size_t> cuts;
    for (std::size_t i = 1; i < net.size(); ++i) cuts.push_back(i);
    std::shuffle(cuts.begin(), cuts.end(), rng);
    cuts.resize(static_cast<std::size_t>(N - 1));
    std::sort(cuts.begin(), cuts.end());
    ClusterDivision div;
    std::size_t at = 0;
    for (auto c : cuts) {
      div.push_back({at, c});
      at = c;
    }
    div.push_back({at, net.size()});
    std::vector<count_t> sizes(static_cast<std::size_t>(N), 1);
    for (count_t extra = C - N; extra > 0; --extra)
      ++sizes[std::uniform_int_distribution<std::size_t>(0, sizes.size() - 1)(rng)];
    std::vector<Partition> parts;
    for (std::size_t i = 0; i < net.size(); ++i)
      parts.push_back(std::uniform_int_distribution<int>(0, 1)(rng) ? Partition::WSP : Partition::ISP);
    auto seg = make_segment(div, parts, sizes, hw);
    auto ev = evaluate_segment(seg, net, hw, m);
    if (!ev.feasible) continue;
    ++feasible;
    auto r = evaluate(Schedule{{seg}}, net, hw, m);
    EXPECT_EQ(check_report_identities(r), std::nullopt);
    EXPECT_EQ(r.t_system, ev.latency());
    count_t macs = 0;
    for (const auto& l : net.layers) macs += layer_stats(l).macs;
    EXPECT_DOUBLE_EQ(r.energy.e_mac, hw.e_mac * static_cast<double>(macs) * static_cast<double>(m));
    EXPECT_GT(r.energy.e_dram, 0.0);
  }
  EXPECT_GT(feasible, 100);
}

TEST(Identities, DetectTampering) {
  auto hw = with_chiplets(HardwareConfig{}, 4);
  auto net = builtin_network("toy5");
  auto res = schedule(Method::Merged, net, hw, 8);
  ASSERT_EQ(check_report_identities(res.report), std::nullopt);
  auto bad = res.report;
  bad.segments[0].clusters[0].layers[0].times.t_layer *= 1.5;
  EXPECT_NE(check_report_identities(bad), std::nullopt);
  bad = res.report;
  bad.t_system += 1e-12;
  EXPECT_NE(check_report_identities(bad), std::nullopt);
}
