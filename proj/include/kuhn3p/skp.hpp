#pragma once
// Analytic ground truth for simplified Kuhn poker (SKP): the four-card
// game with every card-1 frequency forced to zero. Eleven frequencies
// remain, ordered (c2, d3, b1, a1, c3, d1, b2, a2, c1, d2, b3):
//
//   a_i  value bet with card 4 at player i's first node
//   b_i  bluff bet with card 2 at player i's first node
//   c, d card-3 calls: c faces the bet first, d acts after a fold
//
// Solution 1 lives on 2 <= P <= 3 with closed forms for b3 and d2, seven
// zeros, and two interior sums c2+d3 and c3+d1 that the exact game leaves
// free within bounds; the regularization selects the unique root of the
// scalar fixed point X = F(X).

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "kuhn3p/continuation.hpp"
#include "kuhn3p/regularizer.hpp"
#include "kuhn3p/residual_system.hpp"

namespace kuhn3p::skp {

inline constexpr int kDim = 11;

enum Index : int { kC2 = 0, kD3, kB1, kA1, kC3, kD1, kB2, kA2, kC1, kD2, kB3 };

inline constexpr std::array<const char*, kDim> kNames = {
    "c2", "d3", "b1", "a1", "c3", "d1", "b2", "a2", "c1", "d2", "b3"};

struct Spot {
  int player;
  int node_id;
  int card;
};

inline constexpr std::array<Spot, kDim> kSpots = {{
    {2, 10, 3},  // c2
    {3, 11, 3},  // d3
    {1, 1, 2},   // b1
    {1, 1, 4},   // a1
    {3, 7, 3},   // c3
    {1, 8, 3},   // d1
    {2, 2, 2},   // b2
    {2, 2, 4},   // a2
    {1, 4, 3},   // c1
    {2, 5, 3},   // d2
    {3, 3, 2},   // b3
}};

using State = std::array<double, kDim>;

// The eleven equilibrium condition functions.
inline State f_values(const State& x, double P) {
  const double c2 = x[kC2], d3 = x[kD3], b1 = x[kB1], a1 = x[kA1], c3 = x[kC3],
               d1 = x[kD1], b2 = x[kB2], a2 = x[kA2], c1 = x[kC1], d2 = x[kD2],
               b3 = x[kB3];
  State f{};
  f[0] = P * b1 - 2.0 * a1;
  f[1] = (P + 1.0) * b1 - 2.0 * a1;
  f[2] = 2.0 * P - 4.0 - (P + 1.0) * (c2 + d3);
  f[3] = c2 + d3 - b3 - (1.0 + 0.5 * c3) * b2;
  f[4] = (P + a1) * b2 + (b1 - 2.0) * a2;
  f[5] = (P + 1.0) * b2 - 2.0 * a2;
  f[6] = 2.0 * P - 4.0 + 2.0 * a1 - (P + 1.0) * (c3 + d1);
  f[7] = c3 + d1 - 0.5 * c3 * b1 - (1.0 + 0.5 * c1) * b3;
  f[8] = (P + a2) * b3 + b2 - 2.0;
  f[9] = (P + 1.0) * b3 + b1 - 2.0;
  f[10] = 2.0 * P - 4.0 + 2.0 * a1 + 2.0 * a2 - (P + 1.0) * (c1 + d2);
  return f;
}

struct Solution1 {
  double pot = 0.0;
  double b3 = 0.0;
  double d2 = 0.0;
  double sum_lower = 0.0;  // bounds on c2+d3 and on c3+d1
  double sum_upper = 0.0;
};

inline Solution1 solution1(double P) {
  if (!(P >= 2.0 && P <= 3.0))
    throw std::domain_error("Solution 1 exists only for 2 <= P <= 3");
  Solution1 s;
  s.pot = P;
  s.b3 = 2.0 / (P + 1.0);
  s.d2 = (2.0 * P - 4.0) / (P + 1.0);
  s.sum_lower = s.d2;
  s.sum_upper = s.b3;
  return s;
}

// Builds a Solution 1 state with the requested interior sums, split
// between the two frequencies of each sum (50/50 by default).
inline State solution1_state(double P, double sum_c2d3, double sum_c3d1,
                             double frac_c2 = 0.5, double frac_c3 = 0.5) {
  const Solution1 s = solution1(P);
  const double slack = 1e-12;
  for (double sum : {sum_c2d3, sum_c3d1})
    if (!(sum >= s.sum_lower - slack && sum <= s.sum_upper + slack))
      throw std::domain_error("interior sum outside the analytic bounds");
  State x{};
  x[kC2] = frac_c2 * sum_c2d3;
  x[kD3] = (1.0 - frac_c2) * sum_c2d3;
  x[kC3] = frac_c3 * sum_c3d1;
  x[kD1] = (1.0 - frac_c3) * sum_c3d1;
  x[kB3] = s.b3;
  x[kD2] = s.d2;
  return x;
}

// The selection map F whose fixed point is the interior sum picked by the
// regularization in the small-eps limit.
inline double selection_F(double X, double P, double k_minus = kKMinus) {
  const double lo = (2.0 * P - 4.0) / (P + 1.0);
  const double hi = 2.0 / (P + 1.0);
  const double common = -2.0 * k_minus / (hi - X);
  const double arg1 = k_minus * (P / (P + 1.0)) / (X - lo) + common;
  const double arg2 = k_minus / (X - lo) + common;
  return g_eval(arg1) + g_eval(arg2);
}

// Unique root of X = F(X) inside the open bounds, by bisection. F
// decreases and diverges to 1+1 and 0+0 at the endpoints, so the root
// exists and is simple.
inline double limit_interior_sum(double P, double k_minus = kKMinus,
                                 double tol = 0.0) {
  if (!(P > 2.0 && P < 3.0))
    throw std::domain_error("the selection equation needs 2 < P < 3");
  if (!(k_minus > 0.0)) throw std::domain_error("k_minus must be positive");
  const double margin = 1e-9;
  double lo = (2.0 * P - 4.0) / (P + 1.0) + margin;
  double hi = 2.0 / (P + 1.0) - margin;
  auto h = [&](double X) { return selection_F(X, P, k_minus) - X; };
  if (!(h(lo) > 0.0 && h(hi) < 0.0))
    throw std::runtime_error("selection bracket lost its sign change");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // double resolution reached
    (h(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// O(eps) correction coefficients around Solution 1 at the given interior
// sums, in the 11-variable normalization. The d2 line follows from the
// f11 row, whose interior condition reads 2*a1bar + 2*a2bar
// - (P+1)(c1bar + d2bar) = g^-1(b3hat) with b3hat = 2/(P+1).
struct Corrections {
  double b1 = 0.0, a1 = 0.0, b2 = 0.0, a2 = 0.0, c1 = 0.0, b3 = 0.0, d2 = 0.0;
};

inline Corrections corrections(double P, double sum_c2d3, double sum_c3d1,
                               double k_minus = kKMinus, double /*k_plus*/ = kKPlus) {
  const Solution1 s = solution1(P);
  if (!(P > 2.0 && P < 3.0))
    throw std::domain_error("corrections need 2 < P < 3");
  for (double sum : {sum_c2d3, sum_c3d1})
    if (!(sum > s.sum_lower && sum < s.sum_upper))
      throw std::domain_error("interior sum must lie strictly inside the bounds");
  Corrections c;
  c.b1 = k_minus / ((P + 1.0) * sum_c2d3 - (2.0 * P - 4.0));
  c.a1 = k_minus / (2.0 / (P + 1.0) - sum_c2d3);
  c.b2 = k_minus / ((P + 1.0) * sum_c3d1 - (2.0 * P - 4.0));
  c.a2 = k_minus / (2.0 / (P + 1.0) - sum_c3d1);
  c.c1 = 0.5 * k_minus * (P + 1.0);
  c.b3 = (g_inverse(s.d2) - c.b1) / (P + 1.0);
  c.d2 = (2.0 * c.a1 + 2.0 * c.a2 - (P + 1.0) * c.c1 - g_inverse(s.b3)) / (P + 1.0);
  return c;
}

inline void require_skp_system(const EquilibriumSystem& sys) {
  if (!sys.spec().skp_variant || sys.spec().n_cards != 4)
    throw std::invalid_argument("requires the four-card simplified variant");
}

// Positive row scale between the 11-variable condition functions and the
// deal-averaged tree gradients: the tree values are smaller by exactly
// the deal count (24), confirmed empirically by the cross-check tests.
inline double embedding_scale(const EquilibriumSystem& sys) {
  require_skp_system(sys);
  return static_cast<double>(sys.terms().deal_count);
}

// Full-profile embedding of an 11-variable state (all other free
// frequencies zero, pins at their values).
inline std::vector<double> embed_state(const EquilibriumSystem& sys, const State& s) {
  require_skp_system(sys);
  std::vector<double> zeros(static_cast<std::size_t>(sys.size()), 0.0);
  std::vector<double> full = sys.embed(zeros);
  for (int i = 0; i < kDim; ++i) {
    const Spot& sp = kSpots[i];
    full[freq_index(sp.player, sp.node_id, sp.card, 4) - 1] = s[i];
  }
  return full;
}

// Initial guess for the regularized system near Solution 1: interior sums
// at the selected fixed point, boundary components at their O(eps)
// corrections (tree normalization), then fixed-point sweeps
// x := g(f(x)/eps) restricted to the twelve non-SKP frequencies. The
// eleven analytic components stay frozen during the sweeps; the full map
// oscillates through them, while the restricted map contracts.
inline std::vector<double> embedding_guess(const EquilibriumSystem& sys,
                                           EquilibriumSystem::Workspace& ws, double P,
                                           double eps) {
  require_skp_system(sys);
  const double X = limit_interior_sum(P);
  const Corrections c = corrections(P, X, X);
  const double scale = eps * embedding_scale(sys);
  const Solution1 sol = solution1(P);

  State s{};
  s[kC2] = g_eval(P * c.b1 - 2.0 * c.a1);
  s[kD3] = g_eval((P + 1.0) * c.b1 - 2.0 * c.a1);
  s[kC3] = s[kC2];
  s[kD1] = s[kD3];
  s[kB1] = scale * c.b1;
  s[kA1] = scale * c.a1;
  s[kB2] = scale * c.b2;
  s[kA2] = scale * c.a2;
  s[kC1] = scale * c.c1;
  s[kB3] = sol.b3 + scale * c.b3;
  s[kD2] = sol.d2 + scale * c.d2;

  std::vector<std::uint8_t> is_analytic(static_cast<std::size_t>(sys.size()), 0);
  for (const Spot& sp : kSpots) {
    const int row = sys.row_of_slot(freq_index(sp.player, sp.node_id, sp.card, 4) - 1);
    if (row >= 0) is_analytic[row] = 1;
  }

  std::vector<double> full = embed_state(sys, s);
  std::vector<double> x_free = sys.extract(full);
  for (int sweep = 0; sweep < 80; ++sweep) {
    sys.embed(x_free, ws.x_full);
    sys.assemble_f(ws, ws.x_full, P, false);
    double moved = 0.0;
    for (int r = 0; r < sys.size(); ++r) {
      if (is_analytic[r]) continue;
      const double next = g_eval(ws.f[r] / eps);
      moved = std::max(moved, std::abs(next - x_free[r]));
      x_free[r] = next;
    }
    if (moved < 1e-12) break;
  }
  return x_free;
}

struct EmbeddingPointCheck {
  std::size_t point_index = 0;
  double pot = 0.0;
  double b3_dev = 0.0;
  double d2_dev = 0.0;
  double sum_c2d3 = 0.0;
  double sum_c3d1 = 0.0;
  double sum_dev = 0.0;  // worst distance to the selected fixed point
  bool sums_in_bounds = true;
  double max_zero_component = 0.0;
  bool pass = true;
};

struct EmbeddingReport {
  std::vector<EmbeddingPointCheck> points;
  double max_b3_dev = 0.0;
  double max_d2_dev = 0.0;
  double max_sum_dev = 0.0;
  double max_zero_component = 0.0;
  bool pass = true;
};

// Checks every first-pass branch point inside the Solution 1 window
// against the closed forms, the interior-sum bounds and the selected
// fixed point. The first pass ends when the trace first exceeds P = 3.
// Points within edge_margin of P = 2 or P = 3 are skipped: there the
// finite-eps path crosses between solution sheets and no closed form
// applies.
inline EmbeddingReport compare_embedding(const EquilibriumSystem& sys,
                                         const Branch& branch, double tol,
                                         double edge_margin = 0.02) {
  require_skp_system(sys);
  EmbeddingReport rep;
  auto slot = [&](Index v) {
    const Spot& sp = kSpots[v];
    return freq_index(sp.player, sp.node_id, sp.card, 4) - 1;
  };
  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    const BranchPoint& pt = branch.points[i];
    if (pt.pot > 3.0) break;
    if (pt.pot < 2.0 + edge_margin || pt.pot > 3.0 - edge_margin) continue;
    const std::vector<double> full = sys.embed(pt.x_free);
    const Solution1 sol = solution1(pt.pot);
    EmbeddingPointCheck ck;
    ck.point_index = i;
    ck.pot = pt.pot;
    ck.b3_dev = std::abs(full[slot(kB3)] - sol.b3);
    ck.d2_dev = std::abs(full[slot(kD2)] - sol.d2);
    ck.sum_c2d3 = full[slot(kC2)] + full[slot(kD3)];
    ck.sum_c3d1 = full[slot(kC3)] + full[slot(kD1)];
    ck.sums_in_bounds = ck.sum_c2d3 >= sol.sum_lower - tol &&
                        ck.sum_c2d3 <= sol.sum_upper + tol &&
                        ck.sum_c3d1 >= sol.sum_lower - tol &&
                        ck.sum_c3d1 <= sol.sum_upper + tol;
    if (pt.pot > 2.0 + 1e-6 && pt.pot < 3.0 - 1e-6) {
      const double x_star = limit_interior_sum(pt.pot);
      ck.sum_dev = std::max(std::abs(ck.sum_c2d3 - x_star),
                            std::abs(ck.sum_c3d1 - x_star));
    }
    for (Index v : {kA1, kB1, kA2, kB2, kC1})
      ck.max_zero_component = std::max(ck.max_zero_component, full[slot(v)]);
    ck.pass = ck.b3_dev <= tol && ck.d2_dev <= tol && ck.sums_in_bounds &&
              ck.sum_dev <= tol && ck.max_zero_component <= tol;
    rep.max_b3_dev = std::max(rep.max_b3_dev, ck.b3_dev);
    rep.max_d2_dev = std::max(rep.max_d2_dev, ck.d2_dev);
    rep.max_sum_dev = std::max(rep.max_sum_dev, ck.sum_dev);
    rep.max_zero_component = std::max(rep.max_zero_component, ck.max_zero_component);
    rep.pass = rep.pass && ck.pass;
    rep.points.push_back(ck);
  }
  return rep;
}

}  // namespace kuhn3p::skp
