#pragma once
// Branch persistence. Format (version 1):
//
//   # kuhn3p-branch format=1 cards=<N> skp=<0|1> epsilon=<g17> seed=<u64>
//   step,arclen,P,delta,E1,E2,E3,p<i>_n<node>_c<card>,...
//   <one data row per accepted point, 17 significant digits>
//
// Comma separated, LF line endings, UTF-8. Values round-trip bit exactly
// through the decimal text.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kuhn3p/continuation.hpp"
#include "kuhn3p/game_tree.hpp"

namespace kuhn3p {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string freq_column_name(int slot, int n_cards) {
  const IndexSpot sp = decode_freq_index(slot + 1, n_cards);
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%d_n%d_c%d", sp.player, sp.node_id, sp.card);
  return buf;
}

inline void export_branch_csv(const Branch& br, const std::filesystem::path& path) {
  if (br.points.empty()) throw std::invalid_argument("cannot export an empty branch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "# kuhn3p-branch format=1 cards=" << br.spec.n_cards
      << " skp=" << (br.spec.skp_variant ? 1 : 0)
      << " epsilon=" << format_g17(br.epsilon) << " seed=" << br.config.rng_seed << "\n";
  out << "step,arclen,P,delta,E1,E2,E3";
  for (int slot : br.free_slots) out << ',' << freq_column_name(slot, br.spec.n_cards);
  out << '\n';
  for (std::size_t i = 0; i < br.points.size(); ++i) {
    const BranchPoint& pt = br.points[i];
    out << i << ',' << format_g17(pt.arc_length) << ',' << format_g17(pt.pot) << ','
        << format_g17(pt.delta_used) << ',' << format_g17(pt.expectations[0]) << ','
        << format_g17(pt.expectations[1]) << ',' << format_g17(pt.expectations[2]);
    for (double v : pt.x_free) out << ',' << format_g17(v);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

struct LoadedBranch {
  int format = 0;
  std::uint64_t seed = 0;
  Branch branch;
};

inline LoadedBranch load_branch_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  LoadedBranch lb;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# kuhn3p-branch", 0) != 0)
    throw std::runtime_error("not a kuhn3p branch file: " + path.string());
  {
    std::istringstream meta(line.substr(std::strlen("# kuhn3p-branch")));
    std::string tok;
    while (meta >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "format") lb.format = std::stoi(val);
      else if (key == "cards") lb.branch.spec.n_cards = std::stoi(val);
      else if (key == "skp") lb.branch.spec.skp_variant = val != "0";
      else if (key == "epsilon") lb.branch.epsilon = std::strtod(val.c_str(), nullptr);
      else if (key == "seed") lb.seed = std::stoull(val);
    }
  }
  if (lb.format != 1) throw std::runtime_error("unsupported branch format");
  lb.branch.config.rng_seed = lb.seed;
  lb.branch.config.epsilon_target = lb.branch.epsilon;

  if (!std::getline(in, line)) throw std::runtime_error("missing header row");
  std::vector<std::string> columns;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) columns.push_back(col);
  }
  const std::vector<std::string> expected = {"step", "arclen", "P",  "delta",
                                             "E1",   "E2",     "E3"};
  if (columns.size() < expected.size())
    throw std::runtime_error("truncated header row");
  for (std::size_t i = 0; i < expected.size(); ++i)
    if (columns[i] != expected[i]) throw std::runtime_error("unexpected column order");
  for (std::size_t i = expected.size(); i < columns.size(); ++i) {
    int player = 0, node = 0, card = 0;
    if (std::sscanf(columns[i].c_str(), "p%d_n%d_c%d", &player, &node, &card) != 3)
      throw std::runtime_error("bad frequency column: " + columns[i]);
    lb.branch.free_slots.push_back(
        freq_index(player, node, card, lb.branch.spec.n_cards) - 1);
  }

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    vals.reserve(columns.size());
    const char* p = line.c_str();
    char* end = nullptr;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      vals.push_back(std::strtod(p, &end));
      if (end == p) throw std::runtime_error("bad numeric field in row");
      p = *end == ',' ? end + 1 : end;
    }
    BranchPoint pt;
    pt.arc_length = vals[1];
    pt.pot = vals[2];
    pt.delta_used = vals[3];
    pt.expectations = {vals[4], vals[5], vals[6]};
    pt.x_free.assign(vals.begin() + 7, vals.end());
    if (pt.x_free.size() != lb.branch.free_slots.size())
      throw std::runtime_error("row width does not match header");
    lb.branch.points.push_back(std::move(pt));
  }
  return lb;
}

}  // namespace kuhn3p
