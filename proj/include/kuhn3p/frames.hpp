#pragma once
// Range-frame emission: one CSV per selected branch point with rows
// (node, card, reach_fraction, aggressive_frequency). Frames either take
// every stride-th point or resample the branch at equal arc-length steps
// with linear interpolation.
//
// Frame format (version 1):
//   # kuhn3p-frame format=1 cards=<N> index=<i> P=<g17> arclen=<g17>
//   node,card,reach_fraction,aggressive_frequency
//   <12N rows>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "kuhn3p/branch_csv.hpp"
#include "kuhn3p/continuation.hpp"
#include "kuhn3p/reach.hpp"

namespace kuhn3p {

namespace detail {

inline void write_frame(const TreeTopology& topo, const Branch& br,
                        const std::vector<double>& x_free, double pot, double arclen,
                        int index, const std::filesystem::path& dir) {
  const int n = br.spec.n_cards;
  std::vector<double> full(static_cast<std::size_t>(12) * n, 0.0);
  const FixedMask mask = fixed_mask(br.spec);
  for (int s = 0; s < 12 * n; ++s)
    if (mask.is_fixed[s]) full[s] = mask.value[s];
  for (std::size_t r = 0; r < br.free_slots.size(); ++r)
    full[br.free_slots[r]] = x_free[r];

  char name[48];
  std::snprintf(name, sizeof name, "frame_%06d.csv", index);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open frame file for writing");
  out << "# kuhn3p-frame format=1 cards=" << n << " index=" << index
      << " P=" << format_g17(pot) << " arclen=" << format_g17(arclen) << "\n";
  out << "node,card,reach_fraction,aggressive_frequency\n";
  for (int node = 1; node <= kDecisionNodes; ++node) {
    const int player = kPlayerOfNode[node];
    for (int card = 1; card <= n; ++card) {
      const double reach = reach_fraction(topo, n, full, node, card);
      const double freq = full[freq_index(player, node, card, n) - 1];
      out << node << ',' << card << ',' << format_g17(reach) << ','
          << format_g17(freq) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failure on frame file");
}

}  // namespace detail

inline void emit_range_frames(const Branch& br, const std::filesystem::path& dir,
                              int stride, bool interpolate_equal_arc = false) {
  if (br.points.empty()) throw std::invalid_argument("cannot emit frames for an empty branch");
  if (stride < 1) throw std::invalid_argument("stride must be at least 1");
  std::filesystem::create_directories(dir);
  const TreeTopology topo = build_topology();

  if (!interpolate_equal_arc) {
    int index = 0;
    for (std::size_t i = 0; i < br.points.size(); i += stride) {
      const BranchPoint& pt = br.points[i];
      detail::write_frame(topo, br, pt.x_free, pt.pot, pt.arc_length, index++, dir);
    }
    return;
  }

  // Equal arc-length resampling with linear interpolation between the
  // bracketing accepted points.
  const std::size_t n_frames =
      std::max<std::size_t>(2, (br.points.size() + stride - 1) / stride);
  const double total = br.points.back().arc_length;
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n_frames; ++k) {
    const double s = total * static_cast<double>(k) / (n_frames - 1);
    while (seg + 2 < br.points.size() && br.points[seg + 1].arc_length < s) ++seg;
    const BranchPoint& a = br.points[seg];
    const BranchPoint& b = br.points[seg + 1];
    const double width = b.arc_length - a.arc_length;
    const double t = width > 0.0 ? std::clamp((s - a.arc_length) / width, 0.0, 1.0) : 0.0;
    std::vector<double> x(a.x_free.size());
    for (std::size_t j = 0; j < x.size(); ++j)
      x[j] = (1.0 - t) * a.x_free[j] + t * b.x_free[j];
    const double pot = (1.0 - t) * a.pot + t * b.pot;
    detail::write_frame(topo, br, x, pot, s, static_cast<int>(k), dir);
  }
}

}  // namespace kuhn3p
