#pragma once

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sds/io.hpp"
#include "sds/sds.hpp"

#ifndef SDS_VERSION
#define SDS_VERSION "0.1.0"
#endif

namespace sds::cli {

using io::json;

inline std::string build_info() {
  std::string info = "sds " SDS_VERSION " (C++" + std::to_string(__cplusplus / 100 % 100);
#if defined(__clang__)
  info += ", clang " __clang_version__;
#elif defined(__GNUC__)
  info += ", gcc " __VERSION__;
#endif
#ifdef NDEBUG
  info += ", release";
#else
  info += ", debug";
#endif
  return info + ")";
}

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Arrival/waiting/population flags shared by the stochastic subcommands.
struct ModelFlags {
  std::string arrival = "uniform";
  std::string waiting = "point:0";
  std::string arrivals;
  std::string model;

  void add(CLI::App* cmd) {
    cmd->add_option("--arrival", arrival, "uniform, or a JSON file with an \"arrival\" object")
        ->capture_default_str();
    cmd->add_option("--waiting", waiting, "exp:RATE, point:VALUE, or a JSON file")
        ->capture_default_str();
    cmd->add_option("--arrivals", arrivals, "poisson:RATE (replaces the fixed candidate count)");
    cmd->add_option("--model", model, "JSON file with arrival/waiting/arrivals objects; overrides flags");
  }

  struct Resolved {
    ArrivalModel arrival;
    WaitingModel waiting;
    std::optional<PoissonArrivals> poisson;
  };

  Resolved resolve() const {
    Resolved r{io::parse_arrival(arrival), io::parse_waiting(waiting), std::nullopt};
    if (!arrivals.empty()) r.poisson = io::parse_poisson(arrivals);
    if (!model.empty()) {
      const auto j = io::read_json_file(model);
      if (j.contains("arrival")) r.arrival = io::arrival_from_json(j.at("arrival"));
      if (j.contains("waiting")) r.waiting = io::waiting_from_json(j.at("waiting"));
      if (j.contains("arrivals")) r.poisson = io::poisson_from_json(j.at("arrivals"));
    }
    return r;
  }
};

/// Writes to `path`, or to `out` when the path is empty.
inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty())
    out << text;
  else
    io::write_text_file(path, text);
}

struct CheckLine {
  std::string name;
  bool pass;
  std::string detail;
};

/// Invariant suite: sampler equivalence, concentration, monotonicity of a
/// solved policy, and agreement of the two evaluation routes.
inline std::vector<CheckLine> run_checks(bool quick, std::uint64_t seed) {
  std::vector<CheckLine> lines;
  const auto uniform = ArrivalModel::uniform();

  const std::uint64_t samples = quick ? 20000 : 100000;
  for (int gap = 1; gap <= 4; ++gap)
    for (auto mode : {FutureMode::sequential, FutureMode::triples}) {
      const ConditionalFutureSpec spec{0.4, 3, 3 + gap, uniform, WaitingModel::exponential(1.0)};
      const auto r = sampler_pattern_test(spec, mode, samples, seed);
      lines.push_back({std::string("sampler_") +
                           (mode == FutureMode::sequential ? "sequential" : "triples") +
                           "_n_minus_k_" + std::to_string(gap),
                       r.p_value > 1e-3, "p=" + fixed(r.p_value, 4)});
    }

  for (int n : quick ? std::vector<int>{100} : std::vector<int>{100, 1000}) {
    EvalConfig ec;
    ec.trials = quick ? 2000 : 10000;
    ec.seed = seed;
    const auto r = concentration_check(n, uniform, ec);
    const double p = 1.0 / n;
    const double bound = p + 3.0 * std::sqrt(p * (1.0 - p) / ec.trials);
    lines.push_back({"concentration_n" + std::to_string(n), r.fraction <= bound,
                     "fraction=" + fixed(r.fraction, 4) + " bound=" + fixed(bound, 4)});
  }

  SolverConfig sc;
  sc.n = 10;
  sc.cells = 16;
  sc.rollouts = quick ? 500 : 2000;
  sc.seed = seed;
  const auto sol = solve_bivariate(uniform, WaitingModel::point(0.0), sc);
  const auto mono = monotonicity_report(sol.policy, uniform);
  lines.push_back({"k_monotonicity", mono.k_violations == 0,
                   "violations=" + std::to_string(mono.k_violations)});
  lines.push_back({"t_monotonicity_projected", mono.t_violations_projected == 0,
                   "violations=" + std::to_string(mono.t_violations_projected)});

  EvalConfig ec;
  ec.trials = quick ? 20000 : 100000;
  ec.seed = seed;
  ec.population = FixedPopulation{20};
  const Policy pol = Threshold{std::exp(-1.0)};
  const auto waiting = WaitingModel::exponential(2.0);
  const auto fast = evaluate(pol, uniform, waiting, ec);
  ec.route = EvalRoute::full;
  const auto full = evaluate(pol, uniform, waiting, ec);
  const double gap = std::abs(fast.success_rate - full.success_rate);
  lines.push_back({"route_agreement", gap <= fast.half_width + full.half_width,
                   "records=" + fixed(fast.success_rate, 4) + " full=" + fixed(full.success_rate, 4)});
  return lines;
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Secretary problem with stochastic departures: simulation, solver, closed forms"};
  app.name("sds");
  app.set_version_flag("--version", build_info());
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  unsigned threads = 0;
  app.add_option("--seed", seed, "Seed for every stochastic step")->capture_default_str();
  app.add_option("--threads", threads, "Worker thread cap (0 = all cores)")->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo success rate of a policy");
  ModelFlags sim_model;
  sim_model.add(simulate);
  int sim_n = 100;
  std::uint64_t sim_trials = 100000;
  std::string sim_policy, sim_out, sim_dump, sim_route = "records";
  std::uint64_t sim_dump_count = 1000;
  simulate->add_option("--n", sim_n, "Number of candidates")->capture_default_str();
  simulate->add_option("--policy", sim_policy, "threshold:T, grid:FILE, rankcutoff:M or never")
      ->required();
  simulate->add_option("--trials", sim_trials, "Monte Carlo trials")->capture_default_str();
  simulate->add_option("--route", sim_route, "records (sparse sampler) or full")
      ->check(CLI::IsMember({"records", "full"}))
      ->capture_default_str();
  simulate->add_option("--out", sim_out, "Report JSON path (default: stdout)");
  simulate->add_option("--dump-trajectories", sim_dump, "Write the first trial instances as JSON lines");
  simulate->add_option("--dump-count", sim_dump_count, "Instances to dump")->capture_default_str();

  // replay
  auto* replay = app.add_subcommand("replay", "Run a policy on dumped trajectories");
  std::string rep_in, rep_policy, rep_out;
  replay->add_option("--trajectories", rep_in, "JSON-lines file from --dump-trajectories")
      ->required();
  replay->add_option("--policy", rep_policy, "Policy to replay")->required();
  replay->add_option("--out", rep_out, "Outcome JSON-lines path (default: stdout)");

  // solve / threshold
  struct SolveFlags {
    int n = 50;
    int grid = 64;
    std::uint64_t rollouts = 5000;
    bool no_isotonic = false;
    bool linear_scan = false;
    std::string out;
  };
  auto add_solver_flags = [](CLI::App* cmd, SolveFlags& f) {
    cmd->add_option("--n", f.n, "Number of candidates")->capture_default_str();
    cmd->add_option("--grid", f.grid, "Time cells (uniform in arrival quantiles)")
        ->capture_default_str();
    cmd->add_option("--rollouts", f.rollouts, "Rollouts per estimate")->capture_default_str();
    cmd->add_flag("--no-isotonic", f.no_isotonic, "Skip the projection of cutoffs along t");
    cmd->add_flag("--linear-scan", f.linear_scan, "Probe every k instead of binary search");
  };
  auto* solve = app.add_subcommand("solve", "Approximately optimal bivariate grid policy");
  ModelFlags solve_model;
  solve_model.add(solve);
  SolveFlags solve_flags;
  add_solver_flags(solve, solve_flags);
  solve->add_option("--out", solve_flags.out, "Policy JSON path (default: stdout)");

  auto* threshold = app.add_subcommand("threshold", "Single threshold from the success curve");
  ModelFlags thr_model;
  thr_model.add(threshold);
  SolveFlags thr_flags;
  thr_flags.n = 1000;
  add_solver_flags(threshold, thr_flags);
  std::uint64_t thr_eval = 0;
  threshold->add_option("--out", thr_flags.out, "Threshold JSON path (default: stdout)");
  threshold->add_option("--evaluate", thr_eval, "Also evaluate Threshold(t*) with this many trials")
      ->capture_default_str();

  // closed forms
  auto* closed = app.add_subcommand("closed-form", "Success probability of a threshold, exponential waits");
  double cf_lambda = 1.0, cf_theta = 0.5;
  closed->add_option("--lambda", cf_lambda, "Departure rate")->required();
  closed->add_option("--theta", cf_theta, "Threshold in (0, 1]")->required();

  auto* optimize = app.add_subcommand("optimize", "Optimal threshold for exponential waits");
  double opt_lambda = 1.0;
  optimize->add_option("--lambda", opt_lambda, "Departure rate")->required();

  auto* table = app.add_subcommand("table1", "Optimal thresholds for the reference rates");
  std::string table_out;
  table->add_option("--out", table_out, "CSV path (default: stdout)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Optimal threshold and success over a rate grid");
  double sw_min = 0.1, sw_max = 10.0, sw_step = 0.1;
  std::string sw_thr, sw_prob;
  sweep_cmd->add_option("--lambda-min", sw_min, "Smallest rate")->capture_default_str();
  sweep_cmd->add_option("--lambda-max", sw_max, "Largest rate")->capture_default_str();
  sweep_cmd->add_option("--step", sw_step, "Rate step")->capture_default_str();
  sweep_cmd->add_option("--out-thresholds", sw_thr, "CSV of (lambda, theta_star)");
  sweep_cmd->add_option("--out-probs", sw_prob, "CSV of (lambda, p_star)");

  auto* check = app.add_subcommand("check", "Run the invariant suite; nonzero exit on failure");
  bool check_quick = false;
  check->add_flag("--quick", check_quick, "Smaller sample sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  thread_limit() = threads;
  try {
    if (*simulate) {
      const auto m = sim_model.resolve();
      const Policy policy = io::parse_policy(sim_policy);
      EvalConfig ec;
      ec.trials = sim_trials;
      ec.seed = seed;
      ec.threads = threads;
      ec.route = sim_route == "full" ? EvalRoute::full : EvalRoute::records;
      if (m.poisson)
        ec.population = *m.poisson;
      else
        ec.population = FixedPopulation{sim_n};
      const auto report = evaluate(policy, m.arrival, m.waiting, ec);
      json j = io::to_json(report);
      j["policy"] = io::to_json(policy);
      if (m.poisson)
        j["arrivals"] = {{"kind", "poisson"}, {"rate", m.poisson->rate}};
      else
        j["n"] = sim_n;
      emit(sim_out, io::dump(j), out);
      if (!sim_dump.empty()) {
        std::ostringstream lines;
        const auto count = std::min(sim_dump_count, sim_trials);
        for (std::uint64_t i = 0; i < count; ++i)
          if (const auto traj = trial_instance(m.arrival, m.waiting, ec, i))
            lines << io::to_json(*traj).dump() << "\n";
          else
            lines << json{{"a", json::array()}, {"l", json::array()}, {"r", json::array()}}.dump()
                  << "\n";
        io::write_text_file(sim_dump, lines.str());
      }
    } else if (*replay) {
      const Policy policy = io::parse_policy(rep_policy);
      std::ifstream probe(rep_in);
      if (!probe) throw ConfigError(rep_in, "cannot open file");
      std::ostringstream lines;
      std::string line;
      for (std::uint64_t index = 0; std::getline(probe, line);) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = json::parse(line);
        json o{{"index", index++}};
        if (j.at("a").empty()) {
          o["accepted"] = nullptr;
          o["success"] = false;
        } else {
          const auto r = run_policy(policy, io::trajectory_from_json(j));
          o["accepted"] = r.accepted ? json(*r.accepted) : json(nullptr);
          o["accept_time"] = r.accept_time ? json(*r.accept_time) : json(nullptr);
          o["success"] = r.success;
        }
        lines << o.dump() << "\n";
      }
      emit(rep_out, lines.str(), out);
    } else if (*solve || *threshold) {
      const bool is_solve = static_cast<bool>(*solve);
      const auto& f = is_solve ? solve_flags : thr_flags;
      const auto m = (is_solve ? solve_model : thr_model).resolve();
      if (m.poisson) throw ConfigError("arrivals", "the solver works with a fixed candidate count");
      SolverConfig sc;
      sc.n = f.n;
      sc.cells = f.grid;
      sc.rollouts = f.rollouts;
      sc.seed = seed;
      sc.isotonic = !f.no_isotonic;
      sc.linear_scan = f.linear_scan;
      sc.threads = threads;
      if (is_solve) {
        auto j = io::to_json(solve_bivariate(m.arrival, m.waiting, sc));
        j["n"] = f.n;
        emit(f.out, io::dump(j), out);
      } else {
        const auto r = find_threshold(m.arrival, m.waiting, sc);
        auto j = io::to_json(r);
        if (thr_eval > 0) {
          EvalConfig ec;
          ec.trials = thr_eval;
          ec.seed = seed;
          ec.threads = threads;
          ec.population = FixedPopulation{f.n};
          j["evaluation"] = io::to_json(evaluate(Threshold{r.t_star}, m.arrival, m.waiting, ec));
        }
        emit(f.out, io::dump(j), out);
      }
    } else if (*closed) {
      const auto q = singular_integral(cf_lambda, cf_theta);
      json j{{"lambda", cf_lambda},
             {"theta", cf_theta},
             {"success_probability", success_probability(cf_lambda, cf_theta)},
             {"integral", q.value},
             {"integral_error", q.error}};
      out << io::dump(j);
    } else if (*optimize) {
      const auto r = optimize_threshold(opt_lambda);
      out << io::dump(json{{"lambda", r.lambda}, {"theta_star", r.theta_star}, {"p_star", r.p_star}});
    } else if (*table) {
      std::string csv = "lambda,theta_star,p_star\n";
      for (const auto& r : table1())
        csv += fixed(r.lambda, 1) + "," + fixed(r.theta_star) + "," + fixed(r.p_star) + "\n";
      emit(table_out, csv, out);
    } else if (*sweep_cmd) {
      const auto rows = sweep(sw_min, sw_max, sw_step);
      std::string thr = "lambda,theta_star\n", prob = "lambda,p_star\n";
      std::string both = "lambda,theta_star,p_star\n";
      for (const auto& r : rows) {
        thr += fixed(r.lambda) + "," + fixed(r.theta_star) + "\n";
        prob += fixed(r.lambda) + "," + fixed(r.p_star) + "\n";
        both += fixed(r.lambda) + "," + fixed(r.theta_star) + "," + fixed(r.p_star) + "\n";
      }
      if (!sw_thr.empty()) io::write_text_file(sw_thr, thr);
      if (!sw_prob.empty()) io::write_text_file(sw_prob, prob);
      if (sw_thr.empty() && sw_prob.empty()) out << both;
    } else if (*check) {
      bool ok = true;
      for (const auto& l : run_checks(check_quick, seed)) {
        out << (l.pass ? "PASS " : "FAIL ") << l.name << "  " << l.detail << "\n";
        ok = ok && l.pass;
      }
      return ok ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NoCrossingError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace sds::cli
