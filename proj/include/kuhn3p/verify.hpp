#pragma once
// Independent verification of candidate equilibria: a tree-walk evaluator
// that does not touch the term list, a best-response oracle enumerating
// all 16 pure plans per card, first-order condition checks, and the
// small-eps boundary law x ~ -eps*k/f for components pinned to 0 or 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "kuhn3p/game_tree.hpp"
#include "kuhn3p/regularizer.hpp"
#include "kuhn3p/residual_system.hpp"

namespace kuhn3p {

// Expectations by walking every terminal path, independent of the term list.
inline std::array<double, 3> tree_walk_expectations(const TreeTopology& topo, int n_cards,
                                                    std::span<const double> x_full,
                                                    double pot) {
  std::array<double, 3> acc{};
  for (const Deal& deal : enumerate_deals(n_cards)) {
    for (int tid = 1; tid <= kTerminals; ++tid) {
      double prob = 1.0;
      for (const PathStep& st : topo.terminal_path[tid - 1]) {
        const int player = kPlayerOfNode[st.node_id];
        const double xa =
            x_full[freq_index(player, st.node_id, deal[player - 1], n_cards) - 1];
        prob *= st.aggressive ? xa : 1.0 - xa;
      }
      const auto v = terminal_payoff(topo.terminal(tid), deal, pot);
      for (int k = 0; k < 3; ++k) acc[k] += prob * v[k];
    }
  }
  const double d = static_cast<double>(n_cards) * (n_cards - 1) * (n_cards - 2);
  for (auto& e : acc) e /= d;
  return acc;
}

// Best-response value per player: for each card, the best of the 16 pure
// action plans at the player's four nodes, with opponents held at x.
inline std::array<double, 3> best_response_values(const TreeTopology& topo, int n_cards,
                                                  std::span<const double> x_full,
                                                  double pot) {
  const std::vector<Deal> deals = enumerate_deals(n_cards);
  std::array<double, 3> br{};
  for (int player = 1; player <= 3; ++player) {
    double total = 0.0;
    for (int card = 1; card <= n_cards; ++card) {
      double best = -std::numeric_limits<double>::infinity();
      for (int plan = 0; plan < 16; ++plan) {
        double value = 0.0;
        for (const Deal& deal : deals) {
          if (deal[player - 1] != card) continue;
          for (int tid = 1; tid <= kTerminals; ++tid) {
            double prob = 1.0;
            for (const PathStep& st : topo.terminal_path[tid - 1]) {
              const int actor = kPlayerOfNode[st.node_id];
              if (actor == player) {
                const bool plan_aggressive = (plan >> kSlotOfNode[st.node_id]) & 1;
                if (plan_aggressive != st.aggressive) {
                  prob = 0.0;
                  break;
                }
              } else {
                const double xa =
                    x_full[freq_index(actor, st.node_id, deal[actor - 1], n_cards) - 1];
                prob *= st.aggressive ? xa : 1.0 - xa;
              }
            }
            if (prob == 0.0) continue;
            value += prob * terminal_payoff(topo.terminal(tid), deal, pot)[player - 1];
          }
        }
        if (value > best) best = value;
      }
      total += best;
    }
    br[player - 1] =
        total / (static_cast<double>(n_cards) * (n_cards - 1) * (n_cards - 2));
  }
  return br;
}

// Best response minus current value; nonnegative up to rounding, zero at
// an exact equilibrium.
inline std::array<double, 3> exploitability(const TreeTopology& topo, int n_cards,
                                            std::span<const double> x_full, double pot) {
  const auto br = best_response_values(topo, n_cards, x_full, pot);
  const auto e = tree_walk_expectations(topo, n_cards, x_full, pot);
  return {br[0] - e[0], br[1] - e[1], br[2] - e[2]};
}

enum class Classification { kAtZero, kAtOne, kInterior };

struct ConditionCheck {
  int row = 0;
  int flat_index = 0;
  Classification cls = Classification::kInterior;
  double x = 0.0;
  double f = 0.0;
  bool ok = true;
};

struct EquilibriumReport {
  int n_at_zero = 0;
  int n_at_one = 0;
  int n_interior = 0;
  double max_grad_violation = 0.0;
  std::array<double, 3> exploit{};
  std::vector<ConditionCheck> violations;
  bool conditions_pass = true;
  bool pass = true;
};

// Gradient tolerance appropriate for a converged regularized solution:
// interior rows carry |f| = eps * |g^-1(x)| <= eps * cot(pi * tol_zero).
inline double branch_grad_tolerance(double eps, double tol_zero) {
  return 1.25 * eps * std::tan(std::numbers::pi * (0.5 - tol_zero));
}

// Tolerance for exact (eps -> 0) oracle states, relative to the f scale.
inline double oracle_grad_tolerance(std::span<const double> f) {
  double sup = 0.0;
  for (double v : f) sup = std::max(sup, std::abs(v));
  return 1e-6 * std::max(1.0, sup);
}

// Classifies every free component and checks the first-order equilibrium
// conditions: f < tol at 0, f > -tol at 1, |f| < tol in the interior.
inline EquilibriumReport verify_equilibrium(const EquilibriumSystem& sys,
                                            std::span<const double> x_full, double pot,
                                            double tol_zero, double tol_grad,
                                            double exploit_tol = 1e-3) {
  if (!(tol_zero > 0.0) || !(tol_grad > 0.0))
    throw std::invalid_argument("tolerances must be positive");
  EquilibriumReport rep;
  const std::vector<double> f = sys.assemble_f(x_full, pot);
  for (std::size_t r = 0; r < f.size(); ++r) {
    ConditionCheck c;
    c.row = static_cast<int>(r);
    c.flat_index = sys.rows()[r].slot + 1;
    c.x = x_full[sys.rows()[r].slot];
    c.f = f[r];
    double violation = 0.0;
    if (c.x < tol_zero) {
      c.cls = Classification::kAtZero;
      ++rep.n_at_zero;
      violation = std::max(0.0, c.f - tol_grad);
    } else if (c.x > 1.0 - tol_zero) {
      c.cls = Classification::kAtOne;
      ++rep.n_at_one;
      violation = std::max(0.0, -c.f - tol_grad);
    } else {
      c.cls = Classification::kInterior;
      ++rep.n_interior;
      violation = std::max(0.0, std::abs(c.f) - tol_grad);
    }
    c.ok = violation == 0.0;
    rep.max_grad_violation = std::max(rep.max_grad_violation, violation);
    if (!c.ok) rep.violations.push_back(c);
  }
  rep.conditions_pass = rep.violations.empty();
  rep.exploit = exploitability(sys.topology(), sys.spec().n_cards, x_full, pot);
  const double worst =
      std::max({rep.exploit[0], rep.exploit[1], rep.exploit[2]});
  rep.pass = rep.conditions_pass && worst <= exploit_tol;
  return rep;
}

struct BoundaryLawEntry {
  int row = 0;
  bool at_one = false;
  double x = 0.0;
  double f = 0.0;
  double predicted = 0.0;  // predicted x (at 0) or 1 - x (at 1)
  double rel_dev = 0.0;
};

struct BoundaryLawReport {
  int checked = 0;
  int within = 0;
  double max_rel_dev = 0.0;
  double rel_tol = 0.0;
  std::vector<BoundaryLawEntry> entries;

  double fraction_within() const {
    return checked == 0 ? 1.0 : static_cast<double>(within) / checked;
  }
};

// Checks the leading-order boundary corrections of a converged solution:
// x ~ -eps*k-/f for components at 0 and 1-x ~ eps*k+/f for components at 1.
inline BoundaryLawReport asymptotic_boundary_check(std::span<const double> x_free,
                                                   double eps, std::span<const double> f,
                                                   double tol_zero = 1e-3,
                                                   double rel_tol = 0.05) {
  BoundaryLawReport rep;
  rep.rel_tol = rel_tol;
  for (std::size_t r = 0; r < x_free.size(); ++r) {
    const double x = x_free[r];
    BoundaryLawEntry e;
    e.row = static_cast<int>(r);
    e.f = f[r];
    e.x = x;
    double actual;
    if (x < tol_zero) {
      e.at_one = false;
      e.predicted = f[r] < 0.0 ? -eps * kKMinus / f[r]
                               : std::numeric_limits<double>::infinity();
      actual = x;
    } else if (x > 1.0 - tol_zero) {
      e.at_one = true;
      e.predicted = f[r] > 0.0 ? eps * kKPlus / f[r]
                               : std::numeric_limits<double>::infinity();
      actual = 1.0 - x;
    } else {
      continue;
    }
    e.rel_dev = std::isfinite(e.predicted)
                    ? std::abs(actual - e.predicted) / e.predicted
                    : std::numeric_limits<double>::infinity();
    ++rep.checked;
    if (e.rel_dev <= rel_tol) ++rep.within;
    if (std::isfinite(e.rel_dev)) rep.max_rel_dev = std::max(rep.max_rel_dev, e.rel_dev);
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace kuhn3p
