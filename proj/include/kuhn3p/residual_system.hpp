#pragma once
// Regularized equilibrium system over the free frequencies. Each free
// frequency b owned by player i gets one row:
//
//   f_b = dE_i/dx_b                      (no same-player passive ancestor)
//   f_b = -d2E_i/(dx_a dx_b)             (ancestor a: differentiate through
//                                         the ancestor's passive branch)
//   r_b = g(f_b / eps) - x_b
//
// The Jacobian carries one column per free frequency plus a final column
// for the pot. Everything is assembled in a single pass over the term
// list; all derivatives are exact by multilinearity.

#include <algorithm>
#include <Eigen/Dense>
#include <array>
#include <cstring>
#include <span>
#include <stdexcept>
#include <vector>

#include "kuhn3p/game_tree.hpp"
#include "kuhn3p/regularizer.hpp"
#include "kuhn3p/terms.hpp"

namespace kuhn3p {

struct SystemOptions {
  bool dominance_fixing = true;  // pin dominated strategies
  bool ancestor_rule = true;     // mixed derivative through passive ancestors
};

struct FreeRow {
  int slot = 0;      // 0-based position in the full frequency vector
  int player = 0;    // owner, 1..3
  int anc_slot = -1; // 0-based ancestor slot, -1 when the plain gradient is used
  int t3_row = -1;   // row in the third-partial buffer, -1 when unused
};

inline std::size_t packed_pair_index(int a, int b, int size) {
  if (a > b) std::swap(a, b);
  return static_cast<std::size_t>(a) * size - static_cast<std::size_t>(a) * (a + 1) / 2 +
         (b - a - 1);
}

class EquilibriumSystem {
 public:
  explicit EquilibriumSystem(GameSpec spec, SystemOptions opts = {})
      : spec_(spec), opts_(opts), topo_(build_topology()) {
    spec_.validate();
    terms_ = build_terms(spec_, topo_);
    mask_ = fixed_mask(spec_, opts_.dominance_fixing);
    total_ = 12 * spec_.n_cards;
    pair_count_ = static_cast<std::size_t>(total_) * (total_ - 1) / 2;

    row_of_slot_.assign(total_, -1);
    int t3_count = 0;
    for (int slot = 0; slot < total_; ++slot) {
      if (mask_.is_fixed[slot]) continue;
      const IndexSpot sp = decode_freq_index(slot + 1, spec_.n_cards);
      FreeRow row;
      row.slot = slot;
      row.player = sp.player;
      const int anc_node = opts_.ancestor_rule ? topo_.passive_ancestor[sp.node_id] : 0;
      if (anc_node != 0) {
        row.anc_slot = freq_index(sp.player, anc_node, sp.card, spec_.n_cards) - 1;
        row.t3_row = t3_count++;
      }
      row_of_slot_[slot] = static_cast<int>(rows_.size());
      rows_.push_back(row);
    }
    t3_rows_ = t3_count;

    pair_t3_.assign(pair_count_, -1);
    t3_player_.assign(t3_rows_, 0);
    for (const FreeRow& row : rows_) {
      if (row.anc_slot < 0) continue;
      pair_t3_[packed_pair_index(row.anc_slot, row.slot, total_)] = row.t3_row;
      t3_player_[row.t3_row] = row.player;
    }
  }

  int size() const { return static_cast<int>(rows_.size()); }
  int total() const { return total_; }
  const GameSpec& spec() const { return spec_; }
  const SystemOptions& options() const { return opts_; }
  const TreeTopology& topology() const { return topo_; }
  const GameTerms& terms() const { return terms_; }
  const FixedMask& mask() const { return mask_; }
  const std::vector<FreeRow>& rows() const { return rows_; }
  int row_of_slot(int slot) const { return row_of_slot_[slot]; }

  std::vector<int> free_slots() const {
    std::vector<int> s;
    s.reserve(rows_.size());
    for (const FreeRow& r : rows_) s.push_back(r.slot);
    return s;
  }

  void embed(std::span<const double> x_free, std::span<double> x_full) const {
    if (static_cast<int>(x_free.size()) != size() ||
        static_cast<int>(x_full.size()) != total_)
      throw std::invalid_argument("embed: size mismatch");
    for (int slot = 0; slot < total_; ++slot)
      if (mask_.is_fixed[slot]) x_full[slot] = mask_.value[slot];
    for (std::size_t r = 0; r < rows_.size(); ++r) x_full[rows_[r].slot] = x_free[r];
  }

  std::vector<double> embed(std::span<const double> x_free) const {
    std::vector<double> full(total_);
    embed(x_free, full);
    return full;
  }

  std::vector<double> extract(std::span<const double> x_full) const {
    if (static_cast<int>(x_full.size()) != total_)
      throw std::invalid_argument("extract: size mismatch");
    std::vector<double> fr(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) fr[r] = x_full[rows_[r].slot];
    return fr;
  }

  struct Workspace {
    std::array<double, 3> expectations{};
    std::array<double, 3> expectations_pot{};
    std::vector<double> grad;      // 3 players x total slots
    std::vector<double> grad_pot;
    std::vector<double> hess;      // 3 players x packed pairs
    std::vector<double> hess_pot;
    std::vector<double> third;     // t3 rows x total slots
    std::vector<double> f;         // per free row
    std::vector<double> x_full;
  };

  Workspace make_workspace() const {
    Workspace ws;
    ws.grad.assign(3 * static_cast<std::size_t>(total_), 0.0);
    ws.grad_pot.assign(3 * static_cast<std::size_t>(total_), 0.0);
    ws.hess.assign(3 * pair_count_, 0.0);
    ws.hess_pot.assign(3 * pair_count_, 0.0);
    ws.third.assign(static_cast<std::size_t>(t3_rows_) * total_, 0.0);
    ws.f.assign(rows_.size(), 0.0);
    ws.x_full.assign(total_, 0.0);
    return ws;
  }

  // Fills expectations, gradients, Hessians and (optionally) the pot
  // slopes and third partials needed for the Jacobian, then the f rows.
  void assemble_f(Workspace& ws, std::span<const double> x_full, double pot,
                  bool with_jacobian_parts) const {
    eval_terms(ws, x_full, pot, with_jacobian_parts);
    const int S = total_;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const FreeRow& row = rows_[r];
      const std::size_t base = static_cast<std::size_t>(row.player - 1);
      if (row.anc_slot < 0) {
        ws.f[r] = ws.grad[base * S + row.slot];
      } else {
        ws.f[r] = -ws.hess[base * pair_count_ +
                           packed_pair_index(row.anc_slot, row.slot, S)];
      }
    }
  }

  std::vector<double> assemble_f(std::span<const double> x_full, double pot) const {
    Workspace ws = make_workspace();
    assemble_f(ws, x_full, pot, false);
    return ws.f;
  }

  void residual(Workspace& ws, std::span<const double> x_free, double pot, double eps,
                std::span<double> r_out) const {
    embed(x_free, ws.x_full);
    assemble_f(ws, ws.x_full, pot, false);
    for (std::size_t r = 0; r < rows_.size(); ++r)
      r_out[r] = g_eval(ws.f[r] / eps) - x_free[r];
  }

  // Residual plus the M x (M+1) Jacobian (columns: free frequencies, pot).
  void residual_and_jacobian(Workspace& ws, std::span<const double> x_free, double pot,
                             double eps, std::span<double> r_out,
                             Eigen::MatrixXd& jac) const {
    const int M = size();
    const int S = total_;
    embed(x_free, ws.x_full);
    assemble_f(ws, ws.x_full, pot, true);
    jac.resize(M, M + 1);
    for (int r = 0; r < M; ++r) {
      const FreeRow& row = rows_[r];
      const std::size_t base = static_cast<std::size_t>(row.player - 1);
      const double y = ws.f[r] / eps;
      r_out[r] = g_eval(y) - x_free[r];
      const double c = g_prime(y) / eps;
      double df_dpot;
      if (row.anc_slot < 0) {
        const double* hrow = ws.hess.data() + base * pair_count_;
        for (int j = 0; j < M; ++j) {
          const int l = rows_[j].slot;
          const double d2 =
              l == row.slot ? 0.0 : hrow[packed_pair_index(row.slot, l, S)];
          jac(r, j) = c * d2 - (j == r ? 1.0 : 0.0);
        }
        df_dpot = ws.grad_pot[base * S + row.slot];
      } else {
        const double* trow = ws.third.data() + static_cast<std::size_t>(row.t3_row) * S;
        for (int j = 0; j < M; ++j)
          jac(r, j) = -c * trow[rows_[j].slot] - (j == r ? 1.0 : 0.0);
        df_dpot = -ws.hess_pot[base * pair_count_ +
                               packed_pair_index(row.anc_slot, row.slot, S)];
      }
      jac(r, M) = c * df_dpot;
    }
  }

 private:
  void eval_terms(Workspace& ws, std::span<const double> x, double pot, bool full) const {
    const int S = total_;
    ws.expectations = {};
    ws.expectations_pot = {};
    std::memset(ws.grad.data(), 0, ws.grad.size() * sizeof(double));
    std::memset(ws.hess.data(), 0, ws.hess.size() * sizeof(double));
    if (full) {
      std::memset(ws.grad_pot.data(), 0, ws.grad_pot.size() * sizeof(double));
      std::memset(ws.hess_pot.data(), 0, ws.hess_pot.size() * sizeof(double));
      std::memset(ws.third.data(), 0, ws.third.size() * sizeof(double));
    }
    const double inv3d = 1.0 / (3.0 * terms_.deal_count);

    double phi[5], sgn[5];
    int sl[5];
    for (const Term& t : terms_.terms) {
      const int p = t.n_factors;
      for (int j = 0; j < p; ++j) {
        const Factor& fc = t.factors[j];
        sl[j] = fc.slot;
        phi[j] = fc.complement ? 1.0 - x[fc.slot] : x[fc.slot];
        sgn[j] = fc.complement ? -1.0 : 1.0;
      }
      double pay[3], pay_pot[3];
      for (int k = 0; k < 3; ++k) {
        pay[k] = (t.pay_a3[k] + t.pay_b3[k] * pot) * inv3d;
        pay_pot[k] = t.pay_b3[k] * inv3d;
      }

      double prod_all = 1.0;
      for (int j = 0; j < p; ++j) prod_all *= phi[j];
      for (int k = 0; k < 3; ++k) {
        ws.expectations[k] += pay[k] * prod_all;
        if (full) ws.expectations_pot[k] += pay_pot[k] * prod_all;
      }

      for (int i = 0; i < p; ++i) {
        double prod1 = 1.0;
        for (int j = 0; j < p; ++j)
          if (j != i) prod1 *= phi[j];
        const double w1 = sgn[i] * prod1;
        for (int k = 0; k < 3; ++k) {
          ws.grad[static_cast<std::size_t>(k) * S + sl[i]] += pay[k] * w1;
          if (full) ws.grad_pot[static_cast<std::size_t>(k) * S + sl[i]] += pay_pot[k] * w1;
        }
        for (int i2 = i + 1; i2 < p; ++i2) {
          const double s2 = sgn[i] * sgn[i2];
          double prod2 = 1.0;
          for (int j = 0; j < p; ++j)
            if (j != i && j != i2) prod2 *= phi[j];
          const double w2 = s2 * prod2;
          const std::size_t pidx = packed_pair_index(sl[i], sl[i2], S);
          for (int k = 0; k < 3; ++k) {
            ws.hess[static_cast<std::size_t>(k) * pair_count_ + pidx] += pay[k] * w2;
            if (full)
              ws.hess_pot[static_cast<std::size_t>(k) * pair_count_ + pidx] +=
                  pay_pot[k] * w2;
          }
          if (!full || t3_rows_ == 0) continue;
          for (int i3 = i2 + 1; i3 < p; ++i3) {
            double prod3 = 1.0;
            for (int j = 0; j < p; ++j)
              if (j != i && j != i2 && j != i3) prod3 *= phi[j];
            const double w3 = s2 * sgn[i3] * prod3;
            add_third(ws, sl[i], sl[i2], sl[i3], w3, pay);
            add_third(ws, sl[i], sl[i3], sl[i2], w3, pay);
            add_third(ws, sl[i2], sl[i3], sl[i], w3, pay);
          }
        }
      }
    }
  }

  void add_third(Workspace& ws, int a, int b, int other, double w,
                 const double pay[3]) const {
    const int tr = pair_t3_[packed_pair_index(a, b, total_)];
    if (tr < 0) return;
    ws.third[static_cast<std::size_t>(tr) * total_ + other] += pay[t3_player_[tr] - 1] * w;
  }

  GameSpec spec_;
  SystemOptions opts_;
  TreeTopology topo_;
  GameTerms terms_;
  FixedMask mask_;
  int total_ = 0;
  std::size_t pair_count_ = 0;
  int t3_rows_ = 0;
  std::vector<FreeRow> rows_;
  std::vector<int> row_of_slot_;
  std::vector<int> pair_t3_;
  std::vector<int> t3_player_;
};

}  // namespace kuhn3p
