#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "support.hpp"

using namespace mcmpipe;
using testsupport::TempDir;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvariantViolation;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(NetworkFile, MinimalOneByOne) {
  TempDir dir("net");
  write_text_atomic(dir.path / "n.json",
                    R"({"name":"tiny","layers":[{"kind":"conv","c_in":1,"c_out":1,"h_in":1,"w_in":1}]})");
  auto net = load_network(dir.path / "n.json");
  ASSERT_EQ(net.size(), 1u);
  EXPECT_EQ(net[0].k_h, 1);
  EXPECT_EQ(layer_stats(net[0]).macs, 1);
}

TEST(NetworkFile, ChainMismatch) {
  auto doc = json::parse(R"({"name":"x","layers":[
      {"kind":"conv","c_in":3,"c_out":8,"h_in":8},
      {"kind":"conv","c_in":4,"c_out":8,"h_in":8}]})");
  EXPECT_EQ(kind_of([&] { network_from_json(doc); }), ErrorKind::InvariantViolation);
}

TEST(NetworkFile, FieldDiagnostics) {
  auto missing = json::parse(R"({"layers":[{"kind":"conv","c_in":3,"h_in":8}]})");
  EXPECT_NE(message_of([&] { network_from_json(missing); }).find("layers[0].c_out"), std::string::npos);
  auto unknown = json::parse(R"({"layers":[{"kind":"conv","c_in":3,"c_out":3,"h_in":8,"kernel":3}]})");
  EXPECT_NE(message_of([&] { network_from_json(unknown); }).find("layers[0].kernel"), std::string::npos);
  auto negative = json::parse(R"({"layers":[{"kind":"conv","c_in":-3,"c_out":3,"h_in":8}]})");
  EXPECT_EQ(kind_of([&] { network_from_json(negative); }), ErrorKind::ParseError);
  auto kind = json::parse(R"({"layers":[{"kind":"lstm","c_in":3,"c_out":3}]})");
  EXPECT_NE(message_of([&] { network_from_json(kind); }).find("lstm"), std::string::npos);
}

TEST(NetworkFile, MalformedJsonHasPosition) {
  TempDir dir("bad");
  write_text_atomic(dir.path / "b.json", "{\n  \"name\": \"x\",\n  \"layers\": [\n");
  const auto msg = message_of([&] { load_network(dir.path / "b.json"); });
  EXPECT_NE(msg.find("b.json:4:"), std::string::npos) << msg;
}

TEST(NetworkFile, RoundTripBuiltins) {
  for (auto name : builtin_network_names) {
    auto net = builtin_network(name);
    auto back = network_from_json(json::parse(network_to_json(net).dump()));
    EXPECT_EQ(back.layers, net.layers) << name;
  }
}

TEST(HardwareFile, DefaultsFilled) {
  auto hw = hardware_from_json(json::parse(R"({"mesh_rows":4,"mesh_cols":4,"num_chiplets":16})"));
  EXPECT_EQ(hw, HardwareConfig{});
  auto big = hardware_from_json(json::parse(R"({"num_chiplets":32,"e_dram_bit":2e-12})"));
  EXPECT_EQ(big.mesh_rows, 4);
  EXPECT_EQ(big.mesh_cols, 8);
  EXPECT_EQ(big.e_dram_bit, 2e-12);
  EXPECT_EQ(kind_of([] { hardware_from_json(json::parse(R"({"num_chiplets":16,"mesh_rows":3})")); }),
            ErrorKind::InvariantViolation);
  EXPECT_EQ(kind_of([] { hardware_from_json(json::parse(R"({"clock":1})")); }), ErrorKind::ParseError);
  EXPECT_EQ(hardware_from_json(hardware_to_json(big)), big);
}

TEST(Format, ShortestRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    std::uint64_t bits = rng();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    EXPECT_EQ(std::strtod(fmt_double(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(fmt_double(0.1), "0.1");
}

TEST(ScheduleFile, ReloadReproducesReportBitForBit) {
  for (auto [name, C] : {std::pair{"alexnet", 16}, std::pair{"resnet50", 64}, std::pair{"toy5", 8}}) {
    auto net = builtin_network(name);
    auto hw = with_chiplets(HardwareConfig{}, C);
    auto res = schedule(Method::Merged, net, hw, 64, {std::nullopt, 2});
    const auto text = schedule_to_json(res.schedule, net, hw).dump(2);
    auto reloaded = schedule_from_json(json::parse(text));
    validate_schedule(reloaded, net, hw);
    auto again = evaluate(reloaded, net, hw, 64);
    EXPECT_EQ(check_report_identities(again), std::nullopt);
    EXPECT_EQ(report_to_json(again, net).dump(), report_to_json(res.report, net).dump()) << name;
    EXPECT_EQ(again.t_system, res.report.t_system);
  }
}

TEST(Csv, LayerRowsCoverNetwork) {
  auto net = builtin_network("toy5");
  auto hw = with_chiplets(HardwareConfig{}, 8);
  auto res = schedule(Method::Merged, net, hw, 8);
  const auto csv = layer_csv(res.report);
  EXPECT_EQ(csv.rfind("segment,cluster,layer,t_pre,t_comp,t_comm,t_layer\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(net.size() + 1));
}

TEST(AtomicWrite, ReplacesWholeFile) {
  TempDir dir("atomic");
  write_text_atomic(dir.path / "sub" / "f.txt", "first version, longer");
  write_text_atomic(dir.path / "sub" / "f.txt", "second");
  EXPECT_EQ(testsupport::slurp(dir.path / "sub" / "f.txt"), "second");
  EXPECT_FALSE(std::filesystem::exists(dir.path / "sub" / "f.txt.tmp"));
}
