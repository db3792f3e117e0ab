#pragma once

#include <array>
#include <string>
#include <string_view>

#include "mcmpipe/core_model.hpp"

namespace mcmpipe {

namespace zoo_detail {

// Builds a chained list; each helper reads the running shape.
class Builder {
 public:
  Builder(std::string name, count_t channels, count_t hw) : c_(channels), hw_(hw) {
    net_.name = std::move(name);
  }

  Builder& conv(count_t c_out, count_t k, count_t stride = 1, count_t pool = 1) {
    auto l = conv_layer("conv" + std::to_string(net_.size() + 1), c_, c_out, hw_, k, stride, -1, pool);
    c_ = c_out;
    hw_ = l.next_h();
    net_.layers.push_back(std::move(l));
    return *this;
  }

  Builder& conv_pad(count_t c_out, count_t k, count_t stride, count_t pad, count_t pool) {
    auto l = conv_layer("conv" + std::to_string(net_.size() + 1), c_, c_out, hw_, k, stride, pad, pool);
    c_ = c_out;
    hw_ = l.next_h();
    net_.layers.push_back(std::move(l));
    return *this;
  }

  // Pool after the most recent conv.
  Builder& pool(count_t factor) {
    auto& l = net_.layers.back();
    l.pool *= factor;
    hw_ = l.next_h();
    return *this;
  }

  Builder& fc(count_t c_out) {
    const count_t features = c_ * hw_ * hw_;
    net_.layers.push_back(fc_layer("fc" + std::to_string(net_.size() + 1), features, c_out));
    c_ = c_out;
    hw_ = 1;
    return *this;
  }

  count_t channels() const { return c_; }
  count_t spatial() const { return hw_; }

  Network build() {
    validate_network(net_);
    return std::move(net_);
  }

 private:
  Network net_;
  count_t c_;
  count_t hw_;
};

inline Network alexnet() {
  Builder b("alexnet", 3, 227);
  b.conv_pad(96, 11, 4, 0, 2);
  b.conv_pad(256, 5, 1, 2, 2);
  b.conv(384, 3).conv(384, 3).conv(256, 3, 1, 2);
  b.fc(4096).fc(4096).fc(1000);
  return b.build();
}

inline Network vgg16() {
  Builder b("vgg16", 3, 224);
  constexpr std::array<std::pair<count_t, int>, 5> stages{{{64, 2}, {128, 2}, {256, 3}, {512, 3}, {512, 3}}};
  for (auto [c, reps] : stages) {
    for (int i = 0; i < reps; ++i) b.conv(c, 3);
    b.pool(2);
  }
  b.fc(4096).fc(4096).fc(1000);
  return b.build();
}

inline Network darknet19() {
  Builder b("darknet19", 3, 224);
  b.conv(32, 3).pool(2);
  b.conv(64, 3).pool(2);
  b.conv(128, 3).conv(64, 1).conv(128, 3).pool(2);
  b.conv(256, 3).conv(128, 1).conv(256, 3).pool(2);
  b.conv(512, 3).conv(256, 1).conv(512, 3).conv(256, 1).conv(512, 3).pool(2);
  b.conv(1024, 3).conv(512, 1).conv(1024, 3).conv(512, 1).conv(1024, 3);
  b.conv(1000, 1).pool(7);
  return b.build();
}

// Main-path weight layers only; the stride-2 conv of each downsampling block
// is the 3x3 one.
inline Network resnet(std::string name, std::array<int, 4> blocks, bool bottleneck) {
  Builder b(std::move(name), 3, 224);
  b.conv_pad(64, 7, 2, 3, 2);
  constexpr std::array<count_t, 4> widths{64, 128, 256, 512};
  for (std::size_t s = 0; s < 4; ++s) {
    for (int i = 0; i < blocks[s]; ++i) {
      const count_t stride = (s > 0 && i == 0) ? 2 : 1;
      const count_t w = widths[s];
      if (bottleneck) {
        b.conv(w, 1).conv(w, 3, stride).conv(4 * w, 1);
      } else {
        b.conv(w, 3, stride).conv(w, 3);
      }
    }
  }
  b.pool(b.spatial());
  b.fc(1000);
  return b.build();
}

// Five same-padding convs with varied resolution; small enough to enumerate.
inline Network toy5() {
  Builder b("toy5", 16, 32);
  b.conv(32, 3).conv(32, 3).pool(2);
  b.conv(64, 3).conv(64, 1).pool(2);
  b.conv(128, 3);
  return b.build();
}

}  // namespace zoo_detail

inline constexpr std::array<std::string_view, 9> builtin_network_names{
    "alexnet", "vgg16", "darknet19", "resnet18", "resnet34",
    "resnet50", "resnet101", "resnet152", "toy5"};

inline Network builtin_network(std::string_view name) {
  using namespace zoo_detail;
  if (name == "alexnet") return alexnet();
  if (name == "vgg16") return vgg16();
  if (name == "darknet19") return darknet19();
  if (name == "resnet18") return resnet("resnet18", {2, 2, 2, 2}, false);
  if (name == "resnet34") return resnet("resnet34", {3, 4, 6, 3}, false);
  if (name == "resnet50") return resnet("resnet50", {3, 4, 6, 3}, true);
  if (name == "resnet101") return resnet("resnet101", {3, 4, 23, 3}, true);
  if (name == "resnet152") return resnet("resnet152", {3, 8, 36, 3}, true);
  if (name == "toy5") return toy5();
  throw Error(ErrorKind::UnknownNetwork, std::string(name));
}

inline bool is_builtin_network(std::string_view name) {
  for (auto n : builtin_network_names)
    if (n == name) return true;
  return false;
}

}  // namespace mcmpipe
