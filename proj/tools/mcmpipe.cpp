#include <iostream>

#include <CLI11.hpp>

#include "mcmpipe/commands.hpp"

namespace {

using namespace mcmpipe;

Method to_method(const std::string& s) {
  if (auto m = parse_method(s)) return *m;
  throw CLI::ValidationError("--method", "unknown method '" + s + "'");
}

std::vector<Method> to_methods(const std::vector<std::string>& v) {
  std::vector<Method> out;
  for (const auto& s : v) out.push_back(to_method(s));
  return out;
}

const std::vector<std::string> method_names{"scope", "sequential", "full_pipeline", "segmented"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-chiplet pipeline scheduler and cost model"};
  app.require_subcommand(1);
  int rc = 0;

  // schedule
  ScheduleArgs sa;
  std::string sa_method = "scope";
  std::string sa_out = ".";
  count_t sa_chiplets = 0;
  auto* sched = app.add_subcommand("schedule", "Schedule one network and write schedule/report/layer files");
  sched->add_option("--net", sa.net, "Built-in network name or network JSON file")->required();
  sched->add_option("--hw", sa.hw, "Hardware JSON file");
  sched->add_option("--chiplets", sa_chiplets, "Chiplet count (most-square mesh)");
  sched->add_option("--method", sa_method)->check(CLI::IsMember(method_names));
  sched->add_option("--samples", sa.samples, "Samples per batch")->capture_default_str();
  sched->add_option("--out", sa_out, "Output directory");
  sched->add_option("--threads", sa.threads, "Worker threads, 0 for all cores");
  sched->callback([&] {
    sa.method = to_method(sa_method);
    sa.out = sa_out;
    if (sa_chiplets > 0) sa.chiplets = sa_chiplets;
    rc = cmd_schedule(sa, std::cout, std::cerr);
  });

  // compare
  CompareArgs ca;
  std::vector<std::string> ca_methods = method_names;
  std::string ca_out = ".";
  auto* cmp = app.add_subcommand("compare", "Sweep networks x chiplet counts x methods");
  cmp->add_option("--net", ca.nets, "Networks (comma separated)")->required()->delimiter(',');
  cmp->add_option("--hw", ca.hw, "Hardware JSON file");
  cmp->add_option("--chiplets", ca.chiplets, "Chiplet counts (comma separated)")->delimiter(',');
  cmp->add_option("--method", ca_methods, "Methods (comma separated)")
      ->delimiter(',')
      ->check(CLI::IsMember(method_names));
  cmp->add_option("--samples", ca.samples)->capture_default_str();
  cmp->add_option("--out", ca_out);
  cmp->add_option("--threads", ca.threads);
  cmp->callback([&] {
    ca.methods = to_methods(ca_methods);
    ca.out = ca_out;
    rc = cmd_compare(ca, std::cout, std::cerr);
  });

  // validate
  ValidateArgs va;
  std::string va_out = ".", va_layers;
  count_t va_chiplets = 0;
  auto* val = app.add_subcommand("validate", "Compare the heuristic against exhaustive enumeration");
  val->add_option("--net", va.net)->required();
  val->add_option("--hw", va.hw);
  val->add_option("--chiplets", va_chiplets);
  val->add_option("--layers", va_layers, "Layer slice first:last (half open)");
  val->add_option("--samples", va.samples)->capture_default_str();
  val->add_option("--out", va_out);
  val->add_option("--threads", va.threads);
  val->callback([&] {
    va.out = va_out;
    if (va_chiplets > 0) va.chiplets = va_chiplets;
    if (!va_layers.empty()) {
      const auto colon = va_layers.find(':');
      if (colon == std::string::npos) throw CLI::ValidationError("--layers", "expected first:last");
      va.layers = std::pair{std::stoul(va_layers.substr(0, colon)), std::stoul(va_layers.substr(colon + 1))};
    }
    rc = cmd_validate(va, std::cout, std::cerr);
  });

  // breakdown
  BreakdownArgs ba;
  std::vector<std::string> ba_methods{"scope", "segmented"};
  std::string ba_out = ".";
  count_t ba_chiplets = 0;
  auto* brk = app.add_subcommand("breakdown", "Per-cluster load and energy breakdown");
  brk->add_option("--net", ba.net)->required();
  brk->add_option("--hw", ba.hw);
  brk->add_option("--chiplets", ba_chiplets);
  brk->add_option("--method", ba_methods)->delimiter(',')->check(CLI::IsMember(method_names));
  brk->add_option("--samples", ba.samples)->capture_default_str();
  brk->add_option("--out", ba_out);
  brk->add_option("--threads", ba.threads);
  brk->callback([&] {
    ba.methods = to_methods(ba_methods);
    ba.out = ba_out;
    if (ba_chiplets > 0) ba.chiplets = ba_chiplets;
    rc = cmd_breakdown(ba, std::cout, std::cerr);
  });

  // count
  count_t n_layers = 0, n_chiplets = 16;
  std::string count_net;
  auto* cnt = app.add_subcommand("count", "Size of the full scheduling design space");
  cnt->add_option("--layers", n_layers, "Layer count");
  cnt->add_option("--net", count_net, "Take the layer count from a network");
  cnt->add_option("--chiplets", n_chiplets)->capture_default_str();
  cnt->callback([&] {
    if (!count_net.empty()) {
      try {
        n_layers = static_cast<count_t>(resolve_network(count_net).size());
      } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        rc = exit_code_for(e.kind());
        return;
      }
    }
    if (n_layers < 1) throw CLI::ValidationError("count", "give --layers or --net");
    rc = cmd_count(n_layers, n_chiplets, std::cout, std::cerr);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::parse;
  }
  return rc;
}
