// Command-line front end: trace equilibrium branches, verify them with
// the independent best-response oracle, check the simplified variant
// against its analytic solution, and emit SVG plots and range frames.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error,
// 3 solver or I/O failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "kuhn3p/kuhn3p.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  int cards = 4;
  double pot_max = 10.0;
  double epsilon = 1e-6;
  std::uint64_t seed = 1;
  bool skp = false;
  std::string out = "out";
  std::string in;
  double delta_init = 1e-3;
  double delta_max = 0.1;
  double newton_tol = 1e-11;
  long step_budget = 100000;
  double tol_zero = 1e-3;
  double exploit_tol = 1e-3;
  double skp_tol = 1e-3;
  int stride = 1;
  bool interpolate = false;
  bool logp = false;
  bool quiet = false;
};

// The optional JSON config mirrors the flag names; explicit flags win.
void apply_config_file(Options& o, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json j = json::parse(in);
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("cards", o.cards);
  get("pot_max", o.pot_max);
  get("epsilon", o.epsilon);
  get("seed", o.seed);
  get("skp", o.skp);
  get("out", o.out);
  get("in", o.in);
  get("delta_init", o.delta_init);
  get("delta_max", o.delta_max);
  get("newton_tol", o.newton_tol);
  get("step_budget", o.step_budget);
  get("tol_zero", o.tol_zero);
  get("exploit_tol", o.exploit_tol);
  get("skp_tol", o.skp_tol);
  get("stride", o.stride);
  get("interpolate", o.interpolate);
  get("logp", o.logp);
  get("quiet", o.quiet);
}

kuhn3p::ContinuationConfig continuation_config(const Options& o) {
  kuhn3p::ContinuationConfig cfg;
  cfg.epsilon_target = o.epsilon;
  cfg.rng_seed = o.seed;
  cfg.p_stop = o.pot_max;
  cfg.delta_init = o.delta_init;
  cfg.delta_max = o.delta_max;
  cfg.newton_tol = o.newton_tol;
  cfg.step_budget = o.step_budget;
  cfg.log_progress = !o.quiet;
  return cfg;
}

int run_trace(const Options& o) {
  kuhn3p::GameSpec spec{o.cards, 0.0, o.skp};
  spec.validate();
  const kuhn3p::ContinuationConfig cfg = continuation_config(o);
  const kuhn3p::Branch branch = kuhn3p::trace_branch(spec, cfg);
  fs::create_directories(o.out);
  kuhn3p::export_branch_csv(branch, fs::path(o.out) / "branch.csv");

  json summary;
  summary["cards"] = o.cards;
  summary["skp"] = o.skp;
  summary["epsilon"] = o.epsilon;
  summary["seed"] = o.seed;
  summary["pot_max"] = o.pot_max;
  summary["points"] = branch.points.size();
  summary["final_pot"] = branch.points.back().pot;
  summary["arc_length"] = branch.points.back().arc_length;
  std::ofstream(fs::path(o.out) / "summary.json") << summary.dump(2) << "\n";

  std::fprintf(stderr, "traced %zu points to P=%.4f; wrote %s\n", branch.points.size(),
               branch.points.back().pot, (fs::path(o.out) / "branch.csv").c_str());
  return 0;
}

int run_verify(const Options& o) {
  const kuhn3p::LoadedBranch lb = kuhn3p::load_branch_csv(o.in);
  const kuhn3p::EquilibriumSystem sys(lb.branch.spec);
  const double tol_grad = kuhn3p::branch_grad_tolerance(lb.branch.epsilon, o.tol_zero);
  bool all_pass = true;
  double worst_exploit = 0.0;
  for (std::size_t i = 0; i < lb.branch.points.size(); ++i) {
    const kuhn3p::BranchPoint& pt = lb.branch.points[i];
    const auto rep = kuhn3p::verify_equilibrium(sys, sys.embed(pt.x_free), pt.pot,
                                                o.tol_zero, tol_grad, o.exploit_tol);
    const double e = std::max({rep.exploit[0], rep.exploit[1], rep.exploit[2]});
    worst_exploit = std::max(worst_exploit, e);
    std::printf("point %zu P=%.6f %s max_exploit=%.3e grad_violation=%.3e\n", i, pt.pot,
                rep.pass ? "pass" : "FAIL", e, rep.max_grad_violation);
    all_pass = all_pass && rep.pass;
  }
  std::printf("verify: %zu points, %s, worst exploitability %.3e\n",
              lb.branch.points.size(), all_pass ? "all pass" : "FAILURES", worst_exploit);
  return all_pass ? 0 : 1;
}

int run_verify_skp(const Options& o) {
  const kuhn3p::LoadedBranch lb = kuhn3p::load_branch_csv(o.in);
  if (!lb.branch.spec.skp_variant) {
    std::fprintf(stderr, "verify-skp needs a branch traced with --skp\n");
    return 2;
  }
  const kuhn3p::EquilibriumSystem sys(lb.branch.spec);
  const auto rep = kuhn3p::skp::compare_embedding(sys, lb.branch, o.skp_tol);
  for (const auto& ck : rep.points)
    std::printf("point %zu P=%.6f %s b3_dev=%.3e d2_dev=%.3e sum_dev=%.3e\n",
                ck.point_index, ck.pot, ck.pass ? "pass" : "FAIL", ck.b3_dev, ck.d2_dev,
                ck.sum_dev);
  std::printf("verify-skp: %zu points in [2,3], %s, max devs b3=%.3e d2=%.3e sum=%.3e\n",
              rep.points.size(), rep.pass ? "all pass" : "FAILURES", rep.max_b3_dev,
              rep.max_d2_dev, rep.max_sum_dev);
  return rep.pass ? 0 : 1;
}

int run_plot(const Options& o) {
  const kuhn3p::LoadedBranch lb = kuhn3p::load_branch_csv(o.in);
  kuhn3p::emit_expectation_plot(lb.branch, o.out, o.logp);
  std::fprintf(stderr, "wrote %s\n", o.out.c_str());
  return 0;
}

int run_frames(const Options& o) {
  const kuhn3p::LoadedBranch lb = kuhn3p::load_branch_csv(o.in);
  kuhn3p::emit_range_frames(lb.branch, o.out, o.stride, o.interpolate);
  std::fprintf(stderr, "wrote frames to %s\n", o.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;

  // Pre-scan for --config so flags parsed below override file values.
  try {
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) apply_config_file(o, argv[i + 1]);
      else if (arg.rfind("--config=", 0) == 0) apply_config_file(o, arg.substr(9));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  CLI::App app{"equilibrium branch tracing for three player Kuhn poker"};
  app.require_subcommand(1);
  std::string config_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
  };

  CLI::App* trace = app.add_subcommand("trace", "trace an equilibrium branch");
  trace->add_option("--cards", o.cards, "deck size N (> 3)");
  trace->add_option("--pot-max", o.pot_max, "trace until the pot passes this value");
  trace->add_option("--epsilon", o.epsilon, "regularization parameter");
  trace->add_option("--seed", o.seed, "bootstrap RNG seed");
  trace->add_option("--out", o.out, "output directory");
  trace->add_flag("--skp", o.skp, "simplified variant (N=4, card 1 pinned)");
  trace->add_option("--delta-init", o.delta_init, "initial arc-length step");
  trace->add_option("--delta-max", o.delta_max, "arc-length step ceiling");
  trace->add_option("--newton-tol", o.newton_tol, "Newton residual tolerance");
  trace->add_option("--step-budget", o.step_budget, "maximum accepted points");
  trace->add_flag("--quiet", o.quiet, "suppress per-step progress lines");
  add_common(trace);

  CLI::App* verify = app.add_subcommand("verify", "verify every point of a branch CSV");
  verify->add_option("--in", o.in, "branch CSV to verify")->required();
  verify->add_option("--tol-zero", o.tol_zero, "boundary classification threshold");
  verify->add_option("--exploit-tol", o.exploit_tol, "per-player exploitability bound");
  add_common(verify);

  CLI::App* vskp = app.add_subcommand("verify-skp",
                                      "check a simplified-variant branch against the "
                                      "analytic solution");
  vskp->add_option("--in", o.in, "branch CSV to check")->required();
  vskp->add_option("--tol", o.skp_tol, "deviation tolerance");
  add_common(vskp);

  CLI::App* plot = app.add_subcommand("plot", "emit an SVG of the expectations");
  plot->add_option("--in", o.in, "branch CSV")->required();
  plot->add_option("--out", o.out, "output SVG path")->required();
  plot->add_flag("--logp", o.logp, "logarithmic pot axis");
  add_common(plot);

  CLI::App* frames = app.add_subcommand("frames", "emit per-point range-frame CSVs");
  frames->add_option("--in", o.in, "branch CSV")->required();
  frames->add_option("--out", o.out, "output directory")->required();
  frames->add_option("--stride", o.stride, "keep every stride-th point");
  frames->add_flag("--interpolate", o.interpolate,
                   "resample at equal arc-length steps instead");
  add_common(frames);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::printf("%s", app.help().c_str());
    return 0;
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n%s", e.what(), app.help().c_str());
    return 2;
  }

  try {
    if (trace->parsed()) return run_trace(o);
    if (verify->parsed()) return run_verify(o);
    if (vskp->parsed()) return run_verify_skp(o);
    if (plot->parsed()) return run_plot(o);
    if (frames->parsed()) return run_frames(o);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
