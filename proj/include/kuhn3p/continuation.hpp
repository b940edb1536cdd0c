#pragma once
// Branch tracing for the regularized equilibrium system. The augmented
// unknown is X = (x_free, P). Bootstrap solves at P = 0 with a large eps
// from a random start, walks eps down to its target, solves again at a
// small positive pot, then follows the solution curve with a quadratic
// predictor and a pseudo-arclength corrector:
//
//   (X_{i+1} - X_i) . (X_i - X_{i-1}) / ||X_i - X_{i-1}|| = delta
//
// A step is accepted only if Newton converged and the move is no longer
// than max(1.05*delta, accept_eps_scale*eps); otherwise delta shrinks and
// the step is retried. Accepted steps grow delta, capped at delta_max.

#include <algorithm>
#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kuhn3p/residual_system.hpp"

namespace kuhn3p {

struct ContinuationConfig {
  double epsilon_target = 1e-6;
  double epsilon_start = 0.1;
  double delta_init = 1e-3;
  double delta_max = 0.1;
  double shrink_factor = 0.5;
  double growth_factor = 1.1;
  double newton_tol = 1e-11;       // sup norm of the residual
  int newton_max_iters = 25;
  int bootstrap_max_iters = 100;   // line-searched solves may need more
  int bootstrap_restarts = 20;
  double bootstrap_second_pot = 0.01;
  double p_stop = 10.0;
  long step_budget = 100000;
  std::uint64_t rng_seed = 1;
  double accept_eps_scale = 1e-3;  // second argument of the acceptance bound
  bool log_progress = true;

  void validate() const {
    if (!(epsilon_target > 0.0) || !(epsilon_start >= epsilon_target))
      throw std::invalid_argument("epsilon schedule must satisfy start >= target > 0");
    if (!(delta_init > 0.0) || !(delta_max > 0.0))
      throw std::invalid_argument("step sizes must be positive");
    if (!(shrink_factor > 0.0 && shrink_factor < 1.0))
      throw std::invalid_argument("shrink_factor must lie in (0,1)");
    if (!(growth_factor > 1.0)) throw std::invalid_argument("growth_factor must exceed 1");
    if (!(newton_tol > 0.0) || newton_max_iters < 1 || step_budget < 2)
      throw std::invalid_argument("invalid solver limits");
  }
};

struct BranchPoint {
  std::vector<double> x_free;
  double pot = 0.0;
  std::array<double, 3> expectations{};
  double delta_used = 0.0;
  int newton_iters = 0;
  double residual_norm = 0.0;
  double arc_length = 0.0;  // cumulative
};

struct Branch {
  GameSpec spec;
  double epsilon = 0.0;
  ContinuationConfig config;
  std::vector<int> free_slots;
  std::vector<BranchPoint> points;
};

struct BootstrapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StuckBranchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NewtonMode { kFixedPot, kAugmented };

struct ArcConstraint {
  Eigen::VectorXd tangent;  // unit secant of the two previous solutions
  Eigen::VectorXd anchor;   // last accepted solution
  double delta = 0.0;
};

struct NewtonResult {
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  std::string failure;
};

namespace detail {

inline constexpr double kClampMargin = 1e-12;

inline double uniform01(std::uint64_t& state) {
  // splitmix64, mapped to [0,1); keeps runs reproducible across platforms.
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Newton iteration on the regularized system; X holds (x_free, P). In
// fixed-pot mode P stays put and the square system is solved in x alone;
// augmented mode appends the arc-length row. The x part of the starting
// point is clamped into (0,1).
inline NewtonResult newton_solve(const EquilibriumSystem& sys,
                                 EquilibriumSystem::Workspace& ws, Eigen::VectorXd& X,
                                 double eps, NewtonMode mode, const ArcConstraint* arc,
                                 const ContinuationConfig& cfg, bool line_search,
                                 int max_iters_override = 0) {
  const int M = sys.size();
  if (X.size() != M + 1) throw std::invalid_argument("newton_solve: bad state size");
  if (mode == NewtonMode::kAugmented && arc == nullptr)
    throw std::invalid_argument("newton_solve: augmented mode needs an arc constraint");
  const int n = mode == NewtonMode::kAugmented ? M + 1 : M;
  const int max_iters = max_iters_override > 0 ? max_iters_override : cfg.newton_max_iters;

  for (int j = 0; j < M; ++j)
    X[j] = std::clamp(X[j], detail::kClampMargin, 1.0 - detail::kClampMargin);

  Eigen::VectorXd r(n), r_try(n), step(n), X_try(M + 1);
  Eigen::MatrixXd jac_full;  // M x (M+1)
  Eigen::MatrixXd jac_sq(n, n);

  auto eval_residual = [&](const Eigen::VectorXd& Xv, Eigen::VectorXd& out) {
    sys.residual(ws, std::span<const double>(Xv.data(), M), Xv[M], eps,
                 std::span<double>(out.data(), M));
    if (mode == NewtonMode::kAugmented)
      out[M] = (Xv - arc->anchor).dot(arc->tangent) - arc->delta;
  };

  eval_residual(X, r);
  double res = r.lpNorm<Eigen::Infinity>();
  if (res < cfg.newton_tol) return {true, 0, res, {}};

  for (int iter = 1; iter <= max_iters; ++iter) {
    sys.residual_and_jacobian(ws, std::span<const double>(X.data(), M), X[M], eps,
                              std::span<double>(r.data(), M), jac_full);
    if (mode == NewtonMode::kAugmented) {
      r[M] = (X - arc->anchor).dot(arc->tangent) - arc->delta;
      jac_sq.topRows(M) = jac_full;
      jac_sq.row(M) = arc->tangent.transpose();
    } else {
      jac_sq = jac_full.leftCols(M);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac_sq);
    step = lu.solve(-r.head(n));
    if (!step.allFinite()) return {false, iter, res, "singular linear solve"};

    if (line_search) {
      const double base_norm = r.head(n).norm();
      double lambda = 1.0;
      bool accepted = false;
      for (int back = 0; back < 30; ++back, lambda *= 0.5) {
        X_try = X;
        X_try.head(n) += lambda * step;
        eval_residual(X_try, r_try);
        if (r_try.head(n).allFinite() &&
            r_try.head(n).norm() <= (1.0 - 1e-4 * lambda) * base_norm) {
          accepted = true;
          break;
        }
      }
      if (!accepted) return {false, iter, res, "line search stalled"};
      X = X_try;
      r = r_try;
    } else {
      X.head(n) += step;
      eval_residual(X, r);
    }
    res = r.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(res)) return {false, iter, res, "diverged"};
    if (res < cfg.newton_tol) return {true, iter, res, {}};
  }
  return {false, max_iters, res, "no convergence within iteration budget"};
}

// Re-solves while walking eps geometrically from eps_from to eps_to at the
// pot stored in X; the reduction factor backs off towards 1 on failure.
inline void epsilon_ladder(const EquilibriumSystem& sys, EquilibriumSystem::Workspace& ws,
                           Eigen::VectorXd& X, double eps_from, double eps_to,
                           const ContinuationConfig& cfg) {
  double eps = eps_from;
  double factor = 0.5;
  int stages = 0;
  Eigen::VectorXd last_good = X;
  while (eps > eps_to * (1.0 + 1e-12)) {
    if (++stages > 400)
      throw BootstrapError("epsilon continuation exceeded its stage budget");
    const double eps_next = std::max(eps * factor, eps_to);
    Eigen::VectorXd trial = last_good;
    const NewtonResult nr = newton_solve(sys, ws, trial, eps_next, NewtonMode::kFixedPot,
                                         nullptr, cfg, true, cfg.bootstrap_max_iters);
    if (nr.converged) {
      last_good = trial;
      eps = eps_next;
    } else {
      factor = std::sqrt(factor);
      if (factor > 1.0 - 1e-5)
        throw BootstrapError("epsilon continuation stalled at eps = " +
                             std::to_string(eps) + " (" + nr.failure + ")");
    }
  }
  X = last_good;
}

struct Bootstrap {
  Eigen::VectorXd X0;  // solution at P = 0, eps = epsilon_target
  Eigen::VectorXd X1;  // solution at the small second pot
  int starts_used = 0;
  NewtonResult first_solve;
  NewtonResult second_solve;
};

// Random-start solve at P = 0 with the large starting eps, eps walk down
// to the target, then a second solution at a small pot to seed the
// initial tangent. Deterministic for a given seed.
inline Bootstrap bootstrap_initial(const EquilibriumSystem& sys,
                                   EquilibriumSystem::Workspace& ws,
                                   const ContinuationConfig& cfg) {
  const int M = sys.size();
  std::uint64_t rng = cfg.rng_seed;
  Bootstrap bs;
  Eigen::VectorXd X(M + 1);
  bool solved = false;
  std::string last_failure = "no attempts made";
  for (int attempt = 0; attempt < std::max(1, cfg.bootstrap_restarts); ++attempt) {
    for (int j = 0; j < M; ++j) X[j] = detail::uniform01(rng);
    X[M] = 0.0;
    const NewtonResult nr = newton_solve(sys, ws, X, cfg.epsilon_start,
                                         NewtonMode::kFixedPot, nullptr, cfg, true,
                                         cfg.bootstrap_max_iters);
    bs.starts_used = attempt + 1;
    if (nr.converged) {
      bs.first_solve = nr;
      solved = true;
      break;
    }
    last_failure = nr.failure;
  }
  if (!solved)
    throw BootstrapError("bootstrap failed after " +
                         std::to_string(cfg.bootstrap_restarts) +
                         " random starts: " + last_failure);

  epsilon_ladder(sys, ws, X, cfg.epsilon_start, cfg.epsilon_target, cfg);
  bs.X0 = X;

  Eigen::VectorXd X1 = X;
  X1[M] = cfg.bootstrap_second_pot;
  bs.second_solve = newton_solve(sys, ws, X1, cfg.epsilon_target, NewtonMode::kFixedPot,
                                 nullptr, cfg, true, cfg.bootstrap_max_iters);
  if (!bs.second_solve.converged)
    throw BootstrapError("bootstrap failed at the second pot: " +
                         bs.second_solve.failure);
  bs.X1 = X1;
  return bs;
}

// Extrapolates one arc-length step past the newest point: quadratic in the
// chord-length parameter through the last three points, linear with two.
inline Eigen::VectorXd predictor(std::span<const Eigen::VectorXd> history, double delta) {
  const std::size_t n = history.size();
  if (n < 2) throw std::invalid_argument("predictor needs at least two points");
  const Eigen::VectorXd& h2 = history[n - 1];
  const Eigen::VectorXd& h1 = history[n - 2];
  const double s12 = (h2 - h1).norm();
  if (n >= 3) {
    const Eigen::VectorXd& h0 = history[n - 3];
    const double s01 = (h1 - h0).norm();
    if (s01 > 1e-300 && s12 > 1e-300) {
      const double s0 = 0.0, s1 = s01, s2 = s01 + s12;
      const double t = s2 + delta;
      const double l0 = (t - s1) * (t - s2) / ((s0 - s1) * (s0 - s2));
      const double l1 = (t - s0) * (t - s2) / ((s1 - s0) * (s1 - s2));
      const double l2 = (t - s0) * (t - s1) / ((s2 - s0) * (s2 - s1));
      return l0 * h0 + l1 * h1 + l2 * h2;
    }
  }
  if (s12 <= 1e-300) return h2;
  return h2 + (delta / s12) * (h2 - h1);
}

struct StepResult {
  Eigen::VectorXd X;
  double delta_used = 0.0;
  double delta_next = 0.0;
  int newton_iters = 0;
  double residual_norm = 0.0;
  int attempts = 0;
};

// One adaptive pseudo-arclength step from the newest point in history.
inline StepResult continuation_step(const EquilibriumSystem& sys,
                                    EquilibriumSystem::Workspace& ws,
                                    std::span<const Eigen::VectorXd> history, double delta,
                                    double eps, const ContinuationConfig& cfg) {
  if (history.size() < 2)
    throw std::invalid_argument("continuation_step needs at least two points");
  const Eigen::VectorXd& anchor = history[history.size() - 1];
  const Eigen::VectorXd& prev = history[history.size() - 2];
  ArcConstraint arc;
  arc.tangent = (anchor - prev).normalized();
  arc.anchor = anchor;

  StepResult out;
  while (true) {
    ++out.attempts;
    if (delta < 1e-14)
      throw StuckBranchError("step size underflow at P = " +
                             std::to_string(anchor[anchor.size() - 1]));
    arc.delta = delta;
    Eigen::VectorXd X = predictor(history, delta);
    X[X.size() - 1] = std::max(X[X.size() - 1], -1.0);  // keep the pot sane
    const NewtonResult nr =
        newton_solve(sys, ws, X, eps, NewtonMode::kAugmented, &arc, cfg, false);
    if (nr.converged) {
      const double dist = (X - anchor).norm();
      if (dist <= std::max(1.05 * delta, cfg.accept_eps_scale * eps)) {
        out.X = std::move(X);
        out.delta_used = delta;
        out.delta_next = std::min(cfg.growth_factor * delta, cfg.delta_max);
        out.newton_iters = nr.iterations;
        out.residual_norm = nr.residual_norm;
        return out;
      }
    }
    delta *= cfg.shrink_factor;
  }
}

namespace detail {

inline BranchPoint make_point(const EquilibriumSystem& sys, const Eigen::VectorXd& X,
                              double delta_used, int iters, double res,
                              double arc_length) {
  const int M = sys.size();
  BranchPoint pt;
  pt.x_free.assign(X.data(), X.data() + M);
  pt.pot = X[M];
  pt.expectations =
      evaluate_expectations(sys.terms(), sys.embed(pt.x_free), pt.pot);
  pt.delta_used = delta_used;
  pt.newton_iters = iters;
  pt.residual_norm = res;
  pt.arc_length = arc_length;
  return pt;
}

}  // namespace detail

// Full trace: bootstrap then adaptive continuation until the pot passes
// p_stop moving outward or the step budget runs out.
inline Branch trace_branch(const EquilibriumSystem& sys, const ContinuationConfig& cfg) {
  cfg.validate();
  auto ws = sys.make_workspace();
  Branch br;
  br.spec = sys.spec();
  br.epsilon = cfg.epsilon_target;
  br.config = cfg;
  br.free_slots = sys.free_slots();

  const Bootstrap bs = bootstrap_initial(sys, ws, cfg);
  std::vector<Eigen::VectorXd> history{bs.X0, bs.X1};
  br.points.push_back(detail::make_point(sys, bs.X0, 0.0, bs.first_solve.iterations,
                                         bs.first_solve.residual_norm, 0.0));
  double arc = (bs.X1 - bs.X0).norm();
  br.points.push_back(detail::make_point(sys, bs.X1, 0.0, bs.second_solve.iterations,
                                         bs.second_solve.residual_norm, arc));

  double delta = cfg.delta_init;
  for (long step = 2; step < cfg.step_budget; ++step) {
    const Eigen::VectorXd& last = history.back();
    const Eigen::VectorXd& prev = history[history.size() - 2];
    const int M = sys.size();
    if (last[M] > cfg.p_stop && last[M] - prev[M] > 0.0) break;

    StepResult sr = continuation_step(sys, ws, history, delta, cfg.epsilon_target, cfg);
    arc += (sr.X - history.back()).norm();
    br.points.push_back(detail::make_point(sys, sr.X, sr.delta_used, sr.newton_iters,
                                           sr.residual_norm, arc));
    if (cfg.log_progress) {
      const BranchPoint& pt = br.points.back();
      std::fprintf(stderr, "step %zu P=%.8f delta=%.3e iters=%d res=%.2e\n",
                   br.points.size() - 1, pt.pot, pt.delta_used, pt.newton_iters,
                   pt.residual_norm);
    }
    history.push_back(std::move(sr.X));
    if (history.size() > 3) history.erase(history.begin());
    delta = sr.delta_next;
  }
  return br;
}

inline Branch trace_branch(const GameSpec& spec, const ContinuationConfig& cfg) {
  EquilibriumSystem sys(spec);
  return trace_branch(sys, cfg);
}

}  // namespace kuhn3p
