#pragma once
// Fixed betting tree of three player Kuhn poker with an N card deck:
// twelve decision nodes, thirteen terminals, deal enumeration, flat
// frequency indexing, dominance pins and terminal payoff accounting.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kuhn3p {

inline constexpr int kDecisionNodes = 12;
inline constexpr int kTerminals = 13;
inline constexpr int kNodesPerPlayer = 4;

// Acting player per node id (index 0 unused).
inline constexpr std::array<int, kDecisionNodes + 1> kPlayerOfNode = {
    0, 1, 2, 3, 1, 2, 2, 3, 1, 1, 2, 3, 3};

// Position of a node among its player's four nodes, ordered by ascending id.
inline constexpr std::array<int, kDecisionNodes + 1> kSlotOfNode = {
    0, 0, 0, 0, 1, 1, 2, 1, 2, 3, 3, 2, 3};

struct GameSpec {
  int n_cards = 4;
  double pot = 0.0;
  // Simplified variant: additionally pin every card-1 frequency to zero.
  bool skp_variant = false;

  void validate() const {
    if (n_cards < 4) throw std::invalid_argument("n_cards must be at least 4");
    if (pot < 0.0) throw std::invalid_argument("pot must be nonnegative");
    if (skp_variant && n_cards != 4)
      throw std::invalid_argument("the simplified variant is defined for n_cards == 4");
  }
};

struct Child {
  bool is_terminal = false;
  int id = 0;  // node id 1..12 or terminal id 1..13
};

struct DecisionNode {
  int id = 0;
  int player = 0;
  Child on_aggressive;  // bet / call
  Child on_passive;     // check / fold
};

struct TerminalNode {
  int id = 0;
  std::array<int, 3> wager{};  // betting units committed by each player
  std::array<bool, 3> folded{};
};

struct PathStep {
  int node_id = 0;
  bool aggressive = false;
};

struct TreeTopology {
  std::array<DecisionNode, kDecisionNodes> nodes{};
  std::array<TerminalNode, kTerminals> terminals{};
  // Root-to-terminal action list per terminal id.
  std::array<std::vector<PathStep>, kTerminals> terminal_path{};
  // Actions taken before reaching each decision node (empty for the root).
  std::array<std::vector<PathStep>, kDecisionNodes> node_path{};
  // Same-player ancestor reached through its passive branch, 0 when none.
  std::array<int, kDecisionNodes + 1> passive_ancestor{};

  const DecisionNode& node(int id) const { return nodes[id - 1]; }
  const TerminalNode& terminal(int id) const { return terminals[id - 1]; }
};

inline TreeTopology build_topology() {
  TreeTopology t{};
  auto node = [](int id) { return Child{false, id}; };
  auto leaf = [](int id) { return Child{true, id}; };
  t.nodes = {{
      {1, 1, node(10), node(2)},
      {2, 2, node(7), node(3)},
      {3, 3, node(4), leaf(13)},
      {4, 1, node(6), node(5)},
      {5, 2, leaf(11), leaf(12)},
      {6, 2, leaf(9), leaf(10)},
      {7, 3, node(9), node(8)},
      {8, 1, leaf(7), leaf(8)},
      {9, 1, leaf(5), leaf(6)},
      {10, 2, node(12), node(11)},
      {11, 3, leaf(3), leaf(4)},
      {12, 3, leaf(1), leaf(2)},
  }};
  for (int i = 0; i < kDecisionNodes; ++i) {
    if (t.nodes[i].id != i + 1 || t.nodes[i].player != kPlayerOfNode[i + 1])
      throw std::logic_error("inconsistent node table");
  }

  // Walk every root-to-terminal path, deriving wagers, fold sets and paths.
  // A passive action at nodes 4..12 faces a live bet and is a fold; at
  // nodes 1..3 it is a check.
  struct Frame {
    int node_id;
    std::vector<PathStep> path;
    std::array<int, 3> wager;
    std::array<bool, 3> folded;
  };
  std::vector<Frame> stack;
  stack.push_back({1, {}, {0, 0, 0}, {false, false, false}});
  std::array<bool, kTerminals> seen{};
  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    const DecisionNode& dn = t.node(fr.node_id);
    t.node_path[fr.node_id - 1] = fr.path;
    for (bool aggressive : {true, false}) {
      Frame next = fr;
      next.path.push_back({fr.node_id, aggressive});
      const int actor = dn.player - 1;
      if (aggressive) {
        next.wager[actor] += 1;
      } else if (fr.node_id >= 4) {
        next.folded[actor] = true;
      }
      const Child c = aggressive ? dn.on_aggressive : dn.on_passive;
      if (c.is_terminal) {
        TerminalNode& term = t.terminals[c.id - 1];
        if (seen[c.id - 1]) throw std::logic_error("terminal reached twice");
        term.id = c.id;
        term.wager = next.wager;
        term.folded = next.folded;
        t.terminal_path[c.id - 1] = next.path;
        seen[c.id - 1] = true;
      } else {
        next.node_id = c.id;
        stack.push_back(std::move(next));
      }
    }
  }
  for (int i = 0; i < kTerminals; ++i) {
    if (!seen[i]) throw std::logic_error("unreached terminal");
    for (int m = 0; m < 3; ++m)
      if (t.terminals[i].folded[m] && t.terminals[i].wager[m] != 0)
        throw std::logic_error("folded player with nonzero wager");
  }

  for (int id = 1; id <= kDecisionNodes; ++id) {
    int anc = 0;
    for (const PathStep& st : t.node_path[id - 1]) {
      if (kPlayerOfNode[st.node_id] != kPlayerOfNode[id]) continue;
      if (anc != 0 || st.aggressive)
        throw std::logic_error("unexpected same-player ancestor structure");
      anc = st.node_id;
    }
    t.passive_ancestor[id] = anc;
  }
  return t;
}

// Node id of the same-player passive ancestor, 0 when the node has none.
inline int same_player_passive_ancestor(int node_id) {
  if (node_id < 1 || node_id > kDecisionNodes)
    throw std::invalid_argument("node id out of range");
  static const TreeTopology topo = build_topology();
  return topo.passive_ancestor[node_id];
}

using Deal = std::array<int, 3>;

// All ordered triples of distinct cards, lexicographic.
inline std::vector<Deal> enumerate_deals(int n_cards) {
  if (n_cards < 4) throw std::invalid_argument("n_cards must be at least 4");
  std::vector<Deal> deals;
  deals.reserve(static_cast<std::size_t>(n_cards) * (n_cards - 1) * (n_cards - 2));
  for (int a = 1; a <= n_cards; ++a)
    for (int b = 1; b <= n_cards; ++b)
      for (int c = 1; c <= n_cards; ++c)
        if (a != b && a != c && b != c) deals.push_back({a, b, c});
  return deals;
}

// Flat 1-based index of a (player, node, card) frequency:
// l = 4N(player-1) + slot*N + card, slots ordered by ascending node id.
inline int freq_index(int player, int node_id, int card, int n_cards) {
  if (player < 1 || player > 3) throw std::invalid_argument("player out of range");
  if (node_id < 1 || node_id > kDecisionNodes)
    throw std::invalid_argument("node id out of range");
  if (kPlayerOfNode[node_id] != player)
    throw std::invalid_argument("node is not controlled by player");
  if (card < 1 || card > n_cards) throw std::invalid_argument("card out of range");
  return 4 * n_cards * (player - 1) + kSlotOfNode[node_id] * n_cards + card;
}

struct IndexSpot {
  int player = 0;
  int node_id = 0;
  int card = 0;
};

inline IndexSpot decode_freq_index(int flat, int n_cards) {
  if (flat < 1 || flat > 12 * n_cards) throw std::invalid_argument("flat index out of range");
  const int z = flat - 1;
  const int player = z / (4 * n_cards) + 1;
  const int rem = z % (4 * n_cards);
  const int slot = rem / n_cards;
  const int card = rem % n_cards + 1;
  for (int id = 1; id <= kDecisionNodes; ++id)
    if (kPlayerOfNode[id] == player && kSlotOfNode[id] == slot) return {player, id, card};
  throw std::logic_error("slot decode failed");
}

struct FixedMask {
  std::vector<std::uint8_t> is_fixed;  // size 12N, position = flat index - 1
  std::vector<double> value;
  int fixed_count = 0;
  int free_count = 0;
};

// Dominance pins: card N bets/calls at nodes 3..12, card 1 folds at
// nodes 4..12, card 2 folds at nodes 6, 9 and 12. The simplified variant
// additionally pins card 1 at nodes 1..3.
inline FixedMask fixed_mask(const GameSpec& spec, bool apply_dominance) {
  spec.validate();
  const int n = spec.n_cards;
  FixedMask m;
  m.is_fixed.assign(static_cast<std::size_t>(12) * n, 0);
  m.value.assign(static_cast<std::size_t>(12) * n, 0.0);
  auto pin = [&](int node, int card, double v) {
    const int l = freq_index(kPlayerOfNode[node], node, card, n);
    m.is_fixed[l - 1] = 1;
    m.value[l - 1] = v;
  };
  if (apply_dominance) {
    for (int node = 3; node <= 12; ++node) pin(node, n, 1.0);
    for (int node = 4; node <= 12; ++node) pin(node, 1, 0.0);
    for (int node : {6, 9, 12}) pin(node, 2, 0.0);
  }
  if (spec.skp_variant)
    for (int node : {1, 2, 3}) pin(node, 1, 0.0);
  for (auto b : m.is_fixed) m.fixed_count += b;
  m.free_count = 12 * n - m.fixed_count;
  return m;
}

inline FixedMask fixed_mask(const GameSpec& spec) { return fixed_mask(spec, true); }

// Sole non-folder, or the non-folded player holding the highest card.
inline int winner_of(const TerminalNode& t, const Deal& deal) {
  int winner = 0;
  int best = 0;
  for (int m = 0; m < 3; ++m) {
    if (t.folded[m]) continue;
    if (deal[m] > best) {
      best = deal[m];
      winner = m + 1;
    }
  }
  if (winner == 0) throw std::logic_error("terminal with all players folded");
  return winner;
}

// 3x the constant part and 3x the pot coefficient of each player's payoff,
// both exact integers: the winner nets (pot + all wagers) - pot/3 - own
// wager, everyone else loses pot/3 plus their own wager.
inline void terminal_payoff_coeffs(const TerminalNode& t, const Deal& deal,
                                   std::array<int, 3>& a3, std::array<int, 3>& b3) {
  const int winner = winner_of(t, deal);
  const int total_wager = t.wager[0] + t.wager[1] + t.wager[2];
  for (int m = 0; m < 3; ++m) {
    if (m + 1 == winner) {
      a3[m] = 3 * (total_wager - t.wager[m]);
      b3[m] = 2;
    } else {
      a3[m] = -3 * t.wager[m];
      b3[m] = -1;
    }
  }
}

inline std::array<double, 3> terminal_payoff(const TerminalNode& t, const Deal& deal,
                                             double pot) {
  std::array<int, 3> a3{}, b3{};
  terminal_payoff_coeffs(t, deal, a3, b3);
  std::array<double, 3> v{};
  for (int m = 0; m < 3; ++m) v[m] = (a3[m] + b3[m] * pot) / 3.0;
  return v;
}

}  // namespace kuhn3p
