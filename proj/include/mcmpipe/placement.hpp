#pragma once

#include <cstdlib>
#include <numeric>
#include <span>
#include <vector>

#include "mcmpipe/core_model.hpp"

namespace mcmpipe {

struct Mesh {
  count_t rows = 1;
  count_t cols = 1;
  count_t size() const { return rows * cols; }
  static Mesh of(const HardwareConfig& hw) { return {hw.mesh_rows, hw.mesh_cols}; }
};

using RegionPlacement = std::vector<Coord>;

/// Boustrophedon walk: even rows left to right, odd rows right to left.
inline Coord zigzag_coord(const Mesh& mesh, count_t step) {
  const count_t row = step / mesh.cols;
  const count_t off = step % mesh.cols;
  return {row, (row % 2 == 0) ? off : mesh.cols - 1 - off};
}

/// Consecutive regions take consecutive runs of the zigzag walk.
inline std::vector<RegionPlacement> zigzag_place(std::span<const count_t> region_sizes, const Mesh& mesh) {
  count_t total = 0;
  for (count_t s : region_sizes) {
    if (s < 1) throw Error(ErrorKind::SizeMismatch, "region size < 1");
    total += s;
  }
  if (total != mesh.size())
    throw Error(ErrorKind::SizeMismatch, "region sizes sum to " + std::to_string(total) +
                                             ", mesh has " + std::to_string(mesh.size()));
  std::vector<RegionPlacement> out;
  out.reserve(region_sizes.size());
  count_t step = 0;
  for (count_t s : region_sizes) {
    RegionPlacement r;
    r.reserve(static_cast<std::size_t>(s));
    for (count_t i = 0; i < s; ++i) r.push_back(zigzag_coord(mesh, step++));
    out.push_back(std::move(r));
  }
  return out;
}

inline bool disjoint(const RegionPlacement& a, const RegionPlacement& b) {
  for (const auto& p : a)
    for (const auto& q : b)
      if (p == q) return false;
  return true;
}

/// Number of mesh-adjacent (a, b) chiplet pairs.
inline count_t boundary_width(const RegionPlacement& a, const RegionPlacement& b) {
  if (!disjoint(a, b)) throw Error(ErrorKind::InvariantViolation, "boundary_width of overlapping regions");
  count_t n = 0;
  for (const auto& p : a)
    for (const auto& q : b)
      if (std::abs(p.row - q.row) + std::abs(p.col - q.col) == 1) ++n;
  return n;
}

/// boundary_width(regions[j], regions[j+1]) for every consecutive pair, in O(mesh).
inline std::vector<count_t> consecutive_boundary_widths(std::span<const RegionPlacement> regions,
                                                        const Mesh& mesh) {
  std::vector<std::ptrdiff_t> owner(static_cast<std::size_t>(mesh.size()), -1);
  auto at = [&](count_t r, count_t c) -> std::ptrdiff_t& {
    return owner[static_cast<std::size_t>(r * mesh.cols + c)];
  };
  for (std::size_t j = 0; j < regions.size(); ++j)
    for (const auto& p : regions[j]) at(p.row, p.col) = static_cast<std::ptrdiff_t>(j);
  std::vector<count_t> widths(regions.empty() ? 0 : regions.size() - 1, 0);
  for (std::size_t j = 0; j + 1 < regions.size(); ++j) {
    const auto next = static_cast<std::ptrdiff_t>(j + 1);
    for (const auto& p : regions[j]) {
      if (p.row > 0 && at(p.row - 1, p.col) == next) ++widths[j];
      if (p.row + 1 < mesh.rows && at(p.row + 1, p.col) == next) ++widths[j];
      if (p.col > 0 && at(p.row, p.col - 1) == next) ++widths[j];
      if (p.col + 1 < mesh.cols && at(p.row, p.col + 1) == next) ++widths[j];
    }
  }
  return widths;
}

}  // namespace mcmpipe
