#pragma once
// Sparse multilinear representation of the three expectation polynomials:
// one monomial per (deal, terminal) pair, each touching at most five
// frequencies. Values and mixed partial derivatives are exact up to
// rounding because every expectation is linear in every frequency.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "kuhn3p/game_tree.hpp"

namespace kuhn3p {

struct Factor {
  std::int16_t slot = 0;    // 0-based position in the full frequency vector
  bool complement = false;  // true: contributes 1 - x, the passive branch
};

struct Term {
  std::array<std::uint8_t, 3> deal{};
  std::uint8_t terminal = 0;  // terminal id 1..13
  std::uint8_t n_factors = 0;
  std::array<Factor, 5> factors{};
  std::array<std::int8_t, 3> pay_a3{};  // 3x constant payoff part
  std::array<std::int8_t, 3> pay_b3{};  // 3x pot coefficient
};

struct GameTerms {
  int n_cards = 0;
  long deal_count = 0;
  std::vector<Term> terms;
};

inline GameTerms build_terms(const GameSpec& spec, const TreeTopology& topo) {
  spec.validate();
  const int n = spec.n_cards;
  GameTerms out;
  out.n_cards = n;
  const std::vector<Deal> deals = enumerate_deals(n);
  out.deal_count = static_cast<long>(deals.size());
  out.terms.reserve(deals.size() * kTerminals);
  for (const Deal& deal : deals) {
    for (int tid = 1; tid <= kTerminals; ++tid) {
      Term t{};
      t.deal = {static_cast<std::uint8_t>(deal[0]), static_cast<std::uint8_t>(deal[1]),
                static_cast<std::uint8_t>(deal[2])};
      t.terminal = static_cast<std::uint8_t>(tid);
      const auto& path = topo.terminal_path[tid - 1];
      t.n_factors = static_cast<std::uint8_t>(path.size());
      for (std::size_t j = 0; j < path.size(); ++j) {
        const int player = kPlayerOfNode[path[j].node_id];
        const int flat = freq_index(player, path[j].node_id, deal[player - 1], n);
        t.factors[j] = {static_cast<std::int16_t>(flat - 1), !path[j].aggressive};
      }
      std::array<int, 3> a3{}, b3{};
      terminal_payoff_coeffs(topo.terminal(tid), deal, a3, b3);
      for (int k = 0; k < 3; ++k) {
        t.pay_a3[k] = static_cast<std::int8_t>(a3[k]);
        t.pay_b3[k] = static_cast<std::int8_t>(b3[k]);
      }
      out.terms.push_back(t);
    }
  }
  return out;
}

inline GameTerms build_terms(const GameSpec& spec) {
  return build_terms(spec, build_topology());
}

// Deal-averaged expectations (E1, E2, E3) at a full profile.
inline std::array<double, 3> evaluate_expectations(const GameTerms& gt,
                                                   std::span<const double> x_full,
                                                   double pot) {
  std::array<double, 3> acc{};
  for (const Term& t : gt.terms) {
    double prod = 1.0;
    for (int j = 0; j < t.n_factors; ++j) {
      const double v = x_full[t.factors[j].slot];
      prod *= t.factors[j].complement ? 1.0 - v : v;
    }
    for (int k = 0; k < 3; ++k) acc[k] += (t.pay_a3[k] + t.pay_b3[k] * pot) * prod;
  }
  const double scale = 1.0 / (3.0 * gt.deal_count);
  for (auto& e : acc) e *= scale;
  return acc;
}

namespace detail {

inline void check_index_set(const GameTerms& gt, std::span<const int> flat_indices,
                            int min_size) {
  if (static_cast<int>(flat_indices.size()) < min_size || flat_indices.size() > 3)
    throw std::invalid_argument("index set must contain 1 to 3 indices");
  for (std::size_t i = 0; i < flat_indices.size(); ++i) {
    if (flat_indices[i] < 1 || flat_indices[i] > 12 * gt.n_cards)
      throw std::invalid_argument("flat index out of range");
    for (std::size_t j = i + 1; j < flat_indices.size(); ++j)
      if (flat_indices[i] == flat_indices[j])
        throw std::invalid_argument("repeated index in derivative set");
  }
}

// Accumulates the mixed partial over the index set S with payoff weights
// chosen by the caller (values or pot slopes).
template <typename PayFn>
std::array<double, 3> mixed_accumulate(const GameTerms& gt, std::span<const double> x_full,
                                       std::span<const int> flat_indices, PayFn pay) {
  std::array<double, 3> acc{};
  for (const Term& t : gt.terms) {
    double prod = 1.0;
    double sign = 1.0;
    int found = 0;
    for (int j = 0; j < t.n_factors; ++j) {
      const Factor& fc = t.factors[j];
      bool in_set = false;
      for (int s : flat_indices)
        if (fc.slot == s - 1) {
          in_set = true;
          break;
        }
      if (in_set) {
        ++found;
        if (fc.complement) sign = -sign;
      } else {
        const double v = x_full[fc.slot];
        prod *= fc.complement ? 1.0 - v : v;
      }
    }
    if (found != static_cast<int>(flat_indices.size())) continue;
    const double w = sign * prod;
    for (int k = 0; k < 3; ++k) acc[k] += pay(t, k) * w;
  }
  const double scale = 1.0 / (3.0 * gt.deal_count);
  for (auto& e : acc) e *= scale;
  return acc;
}

}  // namespace detail

// Exact mixed partial of (E1, E2, E3) with respect to 1..3 distinct
// frequencies, by multilinearity.
inline std::array<double, 3> mixed_partial(const GameTerms& gt, std::span<const double> x_full,
                                           double pot, std::span<const int> flat_indices) {
  detail::check_index_set(gt, flat_indices, 1);
  return detail::mixed_accumulate(
      gt, x_full, flat_indices,
      [pot](const Term& t, int k) { return t.pay_a3[k] + t.pay_b3[k] * pot; });
}

// d/dP of mixed_partial; the empty set gives (dE1/dP, dE2/dP, dE3/dP).
inline std::array<double, 3> partial_wrt_P(const GameTerms& gt, std::span<const double> x_full,
                                           double /*pot*/, std::span<const int> flat_indices) {
  detail::check_index_set(gt, flat_indices, 0);
  return detail::mixed_accumulate(
      gt, x_full, flat_indices,
      [](const Term& t, int k) { return static_cast<double>(t.pay_b3[k]); });
}

}  // namespace kuhn3p
