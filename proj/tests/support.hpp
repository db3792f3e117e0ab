#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "mcmpipe/commands.hpp"

namespace testsupport {

using namespace mcmpipe;

/// Random conv layer whose output is at least 1x1.
inline LayerDesc random_conv(std::mt19937_64& rng, const std::string& name = "l") {
  auto pick = [&](count_t lo, count_t hi) { return std::uniform_int_distribution<count_t>(lo, hi)(rng); };
  const count_t k = std::array<count_t, 3>{1, 3, 5}[static_cast<std::size_t>(pick(0, 2))];
  const count_t stride = pick(1, 2);
  const count_t hw = pick(k, 64);
  return conv_layer(name, pick(1, 256), pick(1, 512), hw, k, stride, k / 2, 1);
}

/// Random chain of `n` convs that passes validate_network.
inline Network random_conv_net(std::mt19937_64& rng, std::size_t n) {
  auto pick = [&](count_t lo, count_t hi) { return std::uniform_int_distribution<count_t>(lo, hi)(rng); };
  Network net{"random", {}};
  count_t c = pick(3, 64), hw = pick(16, 64);
  for (std::size_t i = 0; i < n; ++i) {
    const count_t k = pick(0, 1) ? 3 : 1;
    const count_t stride = (hw >= 8 && pick(0, 3) == 0) ? 2 : 1;
    auto l = conv_layer("c" + std::to_string(i), c, pick(8, 256), hw, k, stride, k / 2, 1);
    c = l.c_out;
    hw = l.next_h();
    net.layers.push_back(std::move(l));
  }
  return net;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("mcmpipe_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr
};

/// Runs the CLI with `args`, capturing combined output.
inline RunResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(MCMPIPE_CLI) + " " + args + " 2>&1";
  RunResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace testsupport
