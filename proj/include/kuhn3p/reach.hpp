#pragma once
// Reach probabilities under a profile: how often a (player, card) pair
// arrives at a node, conditioned on the player holding that card and
// averaged over opponent deals.

#include <span>

#include "kuhn3p/game_tree.hpp"

namespace kuhn3p {

inline double reach_fraction(const TreeTopology& topo, int n_cards,
                             std::span<const double> x_full, int node_id, int card) {
  if (node_id < 1 || node_id > kDecisionNodes)
    throw std::invalid_argument("node id out of range");
  if (card < 1 || card > n_cards) throw std::invalid_argument("card out of range");
  const int player = kPlayerOfNode[node_id];
  double sum = 0.0;
  long count = 0;
  for (const Deal& deal : enumerate_deals(n_cards)) {
    if (deal[player - 1] != card) continue;
    ++count;
    double prob = 1.0;
    for (const PathStep& st : topo.node_path[node_id - 1]) {
      const int actor = kPlayerOfNode[st.node_id];
      const double xa =
          x_full[freq_index(actor, st.node_id, deal[actor - 1], n_cards) - 1];
      prob *= st.aggressive ? xa : 1.0 - xa;
    }
    sum += prob;
  }
  return sum / count;
}

// Probability that play reaches the node in a uniformly dealt hand.
inline double node_reach(const TreeTopology& topo, int n_cards,
                         std::span<const double> x_full, int node_id) {
  double sum = 0.0;
  for (int card = 1; card <= n_cards; ++card)
    sum += reach_fraction(topo, n_cards, x_full, node_id, card);
  return sum / n_cards;
}

}  // namespace kuhn3p
