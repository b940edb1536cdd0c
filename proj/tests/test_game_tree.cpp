#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "kuhn3p/game_tree.hpp"
#include "oracle.hpp"

using namespace kuhn3p;

TEST_CASE("topology matches the fixed betting tree") {
  const TreeTopology t = build_topology();

  SECTION("twelve decision nodes with the documented owners") {
    REQUIRE(t.nodes.size() == 12);
    const std::map<int, std::set<int>> owners = {
        {1, {1, 4, 8, 9}}, {2, {2, 5, 6, 10}}, {3, {3, 7, 11, 12}}};
    for (const auto& [player, ids] : owners)
      for (int id : ids) CHECK(t.node(id).player == player);
    CHECK(t.node(7).player == 3);
  }

  SECTION("thirteen terminals") {
    REQUIRE(t.terminals.size() == 13);
    for (int id = 1; id <= kTerminals; ++id) CHECK(t.terminal(id).id == id);
  }

  SECTION("child links") {
    auto node_child = [&](int id, bool agg) {
      const Child c = agg ? t.node(id).on_aggressive : t.node(id).on_passive;
      REQUIRE_FALSE(c.is_terminal);
      return c.id;
    };
    CHECK(node_child(1, true) == 10);
    CHECK(node_child(1, false) == 2);
    CHECK(node_child(10, true) == 12);
    CHECK(node_child(10, false) == 11);
    CHECK(node_child(2, true) == 7);
    CHECK(node_child(2, false) == 3);
    CHECK(node_child(7, true) == 9);
    CHECK(node_child(7, false) == 8);
    CHECK(node_child(3, true) == 4);
    CHECK(t.node(3).on_passive.is_terminal);
    CHECK(node_child(4, true) == 6);
    CHECK(node_child(4, false) == 5);
    for (int id : {5, 6, 8, 9, 11, 12}) {
      CHECK(t.node(id).on_aggressive.is_terminal);
      CHECK(t.node(id).on_passive.is_terminal);
    }
  }

  SECTION("every node except the root has exactly one parent") {
    std::map<int, int> node_parents, terminal_parents;
    for (const DecisionNode& dn : t.nodes)
      for (const Child& c : {dn.on_aggressive, dn.on_passive})
        (c.is_terminal ? terminal_parents : node_parents)[c.id] += 1;
    CHECK(node_parents.count(1) == 0);
    for (int id = 2; id <= kDecisionNodes; ++id) CHECK(node_parents[id] == 1);
    for (int id = 1; id <= kTerminals; ++id) CHECK(terminal_parents[id] == 1);
  }

  SECTION("wagers are 0 or 1 and folded players never wagered") {
    int showdown3 = 0;
    for (const TerminalNode& term : t.terminals) {
      for (int m = 0; m < 3; ++m) {
        CHECK((term.wager[m] == 0 || term.wager[m] == 1));
        if (term.folded[m]) CHECK(term.wager[m] == 0);
      }
      if (!term.folded[0] && !term.folded[1] && !term.folded[2]) ++showdown3;
    }
    CHECK(showdown3 == 4);  // three bet-call-call lines plus the all-check line
  }

  SECTION("path lengths") {
    int len3 = 0, len4 = 0, len5 = 0;
    for (const auto& path : t.terminal_path) {
      if (path.size() == 3) ++len3;
      if (path.size() == 4) ++len4;
      if (path.size() == 5) ++len5;
      CHECK(path.size() <= 5);
      CHECK(path.size() >= 3);
    }
    CHECK(len3 + len4 + len5 == 13);
    CHECK(len5 == 4);  // the node-5 and node-6 responses end five-action lines
  }
}

TEST_CASE("same-player passive ancestors") {
  CHECK(same_player_passive_ancestor(4) == 1);
  CHECK(same_player_passive_ancestor(8) == 1);
  CHECK(same_player_passive_ancestor(9) == 1);
  CHECK(same_player_passive_ancestor(5) == 2);
  CHECK(same_player_passive_ancestor(6) == 2);
  for (int id : {1, 2, 3, 7, 10, 11, 12}) CHECK(same_player_passive_ancestor(id) == 0);
  CHECK_THROWS_AS(same_player_passive_ancestor(0), std::invalid_argument);
  CHECK_THROWS_AS(same_player_passive_ancestor(13), std::invalid_argument);
}

TEST_CASE("deal enumeration") {
  CHECK(enumerate_deals(4).size() == 24);
  CHECK(enumerate_deals(5).size() == 60);
  CHECK(enumerate_deals(4).front() == Deal{1, 2, 3});
  CHECK_THROWS_AS(enumerate_deals(3), std::invalid_argument);

  const auto deals = enumerate_deals(6);
  std::set<Deal> unique(deals.begin(), deals.end());
  CHECK(unique.size() == deals.size());
  for (std::size_t i = 1; i < deals.size(); ++i) CHECK(deals[i - 1] < deals[i]);
  for (const Deal& d : deals) {
    CHECK((d[0] != d[1] && d[0] != d[2] && d[1] != d[2]));
    for (int c : d) CHECK((c >= 1 && c <= 6));
  }
}

TEST_CASE("flat frequency indexing") {
  CHECK(freq_index(1, 1, 1, 4) == 1);
  CHECK(freq_index(2, 2, 1, 4) == 17);
  CHECK(freq_index(3, 12, 4, 4) == 48);
  CHECK_THROWS_AS(freq_index(1, 2, 1, 4), std::invalid_argument);  // node 2 is P2's
  CHECK_THROWS_AS(freq_index(2, 5, 6, 5), std::invalid_argument);  // card out of range

  for (int n : {4, 7}) {
    std::set<int> seen;
    for (int player = 1; player <= 3; ++player)
      for (int node = 1; node <= 12; ++node) {
        if (kPlayerOfNode[node] != player) continue;
        for (int card = 1; card <= n; ++card) {
          const int l = freq_index(player, node, card, n);
          CHECK(l >= 1);
          CHECK(l <= 12 * n);
          seen.insert(l);
          const IndexSpot sp = decode_freq_index(l, n);
          CHECK(sp.player == player);
          CHECK(sp.node_id == node);
          CHECK(sp.card == card);
        }
      }
    CHECK(static_cast<int>(seen.size()) == 12 * n);  // bijection onto 1..12N
  }
}

TEST_CASE("dominance pins") {
  SECTION("four cards") {
    const FixedMask m = fixed_mask(GameSpec{4, 0.0, false});
    CHECK(m.fixed_count == 22);
    CHECK(m.free_count == 26);
    CHECK(m.is_fixed[freq_index(3, 3, 4, 4) - 1]);
    CHECK(m.value[freq_index(3, 3, 4, 4) - 1] == 1.0);
    for (int node = 3; node <= 12; ++node) {
      const int l = freq_index(kPlayerOfNode[node], node, 4, 4);
      CHECK(m.is_fixed[l - 1]);
      CHECK(m.value[l - 1] == 1.0);
    }
    for (int node = 4; node <= 12; ++node) {
      const int l = freq_index(kPlayerOfNode[node], node, 1, 4);
      CHECK(m.is_fixed[l - 1]);
      CHECK(m.value[l - 1] == 0.0);
    }
    for (int node : {6, 9, 12}) {
      const int l = freq_index(kPlayerOfNode[node], node, 2, 4);
      CHECK(m.is_fixed[l - 1]);
      CHECK(m.value[l - 1] == 0.0);
    }
    // node-1 and node-2 frequencies stay free, including the top card
    CHECK_FALSE(m.is_fixed[freq_index(1, 1, 4, 4) - 1]);
    CHECK_FALSE(m.is_fixed[freq_index(2, 2, 4, 4) - 1]);
  }

  SECTION("five cards") {
    const FixedMask m = fixed_mask(GameSpec{5, 0.0, false});
    CHECK(m.fixed_count == 22);
    CHECK(m.free_count == 38);
  }

  SECTION("simplified variant adds the three card-1 pins") {
    const FixedMask m = fixed_mask(GameSpec{4, 0.0, true});
    CHECK(m.fixed_count == 25);
    CHECK(m.free_count == 23);
    for (int node : {1, 2, 3}) {
      const int l = freq_index(kPlayerOfNode[node], node, 1, 4);
      CHECK(m.is_fixed[l - 1]);
      CHECK(m.value[l - 1] == 0.0);
    }
    CHECK_THROWS_AS(fixed_mask(GameSpec{5, 0.0, true}), std::invalid_argument);
  }

  SECTION("dominance can be switched off") {
    const FixedMask m = fixed_mask(GameSpec{4, 0.0, false}, false);
    CHECK(m.fixed_count == 0);
    CHECK(m.free_count == 48);
  }
}

TEST_CASE("terminal payoffs") {
  const TreeTopology t = build_topology();
  auto find_terminal = [&](std::array<int, 3> wager, std::array<bool, 3> folded) {
    for (const TerminalNode& term : t.terminals)
      if (term.wager == wager && term.folded == folded) return term;
    FAIL("terminal not found");
    return t.terminals[0];
  };

  SECTION("all-check showdown") {
    const TerminalNode term = find_terminal({0, 0, 0}, {false, false, false});
    const auto v = terminal_payoff(term, {2, 3, 4}, 3.0);
    CHECK(v[0] == Catch::Approx(-1.0));
    CHECK(v[1] == Catch::Approx(-1.0));
    CHECK(v[2] == Catch::Approx(2.0));
  }

  SECTION("bet and two folds") {
    const TerminalNode term = find_terminal({1, 0, 0}, {false, true, true});
    const auto v = terminal_payoff(term, {1, 3, 4}, 3.0);
    // the sole remaining player wins regardless of card strength
    CHECK(v[0] == Catch::Approx(2.0));
    CHECK(v[1] == Catch::Approx(-1.0));
    CHECK(v[2] == Catch::Approx(-1.0));
  }

  SECTION("three-way all-in behind the opening bet") {
    bool checked = false;
    for (const TerminalNode& term : t.terminals) {
      if (term.wager != std::array<int, 3>{1, 1, 1}) continue;
      const auto& path = t.terminal_path[term.id - 1];
      if (path.front().node_id != 1 || !path.front().aggressive) continue;
      const auto v = terminal_payoff(term, {4, 2, 3}, 3.0);
      CHECK(v[0] == Catch::Approx(4.0));
      CHECK(v[1] == Catch::Approx(-2.0));
      CHECK(v[2] == Catch::Approx(-2.0));
      checked = true;
    }
    CHECK(checked);
  }

  SECTION("zero sum for every terminal and deal") {
    oracle::Rng rng(11);
    for (const TerminalNode& term : t.terminals)
      for (const Deal& deal : enumerate_deals(4)) {
        const double pot = rng.uniform(0.0, 12.0);
        const auto v = terminal_payoff(term, deal, pot);
        CHECK(std::abs(v[0] + v[1] + v[2]) < 1e-14);
        std::array<int, 3> a3{}, b3{};
        terminal_payoff_coeffs(term, deal, a3, b3);
        CHECK(a3[0] + a3[1] + a3[2] == 0);
        CHECK(b3[0] + b3[1] + b3[2] == 0);
      }
  }

  SECTION("folded players cannot win") {
    const TerminalNode term = find_terminal({1, 0, 0}, {false, true, true});
    CHECK(winner_of(term, {1, 3, 4}) == 1);  // highest card folded
  }
}

TEST_CASE("game spec validation") {
  CHECK_THROWS_AS((GameSpec{3, 0.0, false}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GameSpec{4, -1.0, false}.validate()), std::invalid_argument);
  CHECK_NOTHROW((GameSpec{4, 0.0, false}.validate()));
  CHECK_NOTHROW((GameSpec{26, 1000.0, false}.validate()));
}
