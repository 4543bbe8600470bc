#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sds/closedform.hpp"
#include "sds/distributions.hpp"
#include "sds/engine.hpp"
#include "sds/errors.hpp"
#include "sds/policies.hpp"
#include "sds/process.hpp"
#include "sds/solver.hpp"

namespace sds::io {

using json = nlohmann::json;

namespace detail {

template <class T>
T field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(path + "." + key, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key, "wrong type");
  }
}

inline std::vector<std::pair<double, double>> grid(const json& j, const std::string& path) {
  const auto rows = field<std::vector<std::vector<double>>>(j, "grid", path);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 2)
      throw ConfigError(path + ".grid[" + std::to_string(i) + "]", "expected [x, F(x)]");
    pts.emplace_back(rows[i][0], rows[i][1]);
  }
  return pts;
}

inline json grid_json(const std::vector<std::pair<double, double>>& pts) {
  json g = json::array();
  for (const auto& [x, f] : pts) g.push_back({x, f});
  return g;
}

inline double to_number(const std::string& text, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(path, "not a number: '" + text + "'");
  }
}

}  // namespace detail

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path, "cannot write file");
  out << text;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

inline ArrivalModel arrival_from_json(const json& j) {
  const auto kind = detail::field<std::string>(j, "kind", "arrival");
  if (kind == "uniform") return ArrivalModel::uniform();
  if (kind == "piecewise") {
    const auto rows = detail::field<std::vector<std::vector<double>>>(j, "segments", "arrival");
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != 3)
        throw ConfigError("arrival.segments[" + std::to_string(i) + "]", "expected [lo, hi, mass]");
      segs.push_back({rows[i][0], rows[i][1], rows[i][2]});
    }
    return ArrivalModel::piecewise(std::move(segs));
  }
  if (kind == "tabulated") return ArrivalModel::tabulated(detail::grid(j, "arrival"));
  throw ConfigError("arrival.kind", "unknown kind '" + kind + "'");
}

inline json to_json(const ArrivalModel& m) {
  return std::visit(
      [](const auto& v) -> json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Uniform01>) {
          return {{"kind", "uniform"}};
        } else if constexpr (std::is_same_v<V, PiecewiseUniform>) {
          json segs = json::array();
          for (const auto& s : v.segments()) segs.push_back({s.lo, s.hi, s.mass});
          return {{"kind", "piecewise"}, {"segments", segs}};
        } else {
          return {{"kind", "tabulated"}, {"grid", detail::grid_json(v.points())}};
        }
      },
      m.variant());
}

inline WaitingModel waiting_from_json(const json& j) {
  const auto kind = detail::field<std::string>(j, "kind", "waiting");
  if (kind == "exp") return WaitingModel::exponential(detail::field<double>(j, "rate", "waiting"));
  if (kind == "point") return WaitingModel::point(detail::field<double>(j, "value", "waiting"));
  if (kind == "tabulated") return WaitingModel::tabulated(detail::grid(j, "waiting"));
  throw ConfigError("waiting.kind", "unknown kind '" + kind + "'");
}

inline json to_json(const WaitingModel& m) {
  return std::visit(
      [](const auto& v) -> json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, PointMass>)
          return {{"kind", "point"}, {"value", v.value}};
        else if constexpr (std::is_same_v<V, Exponential>)
          return {{"kind", "exp"}, {"rate", v.rate}};
        else
          return {{"kind", "tabulated"}, {"grid", detail::grid_json(v.points())}};
      },
      m.variant());
}

inline PoissonArrivals poisson_from_json(const json& j) {
  const auto kind = detail::field<std::string>(j, "kind", "arrivals");
  if (kind != "poisson") throw ConfigError("arrivals.kind", "unknown kind '" + kind + "'");
  PoissonArrivals p{detail::field<double>(j, "rate", "arrivals")};
  if (!(p.rate > 0.0)) throw ConfigError("arrivals.rate", "Poisson rate must be > 0");
  return p;
}

/// "uniform" or "file.json" holding {"arrival": {...}}.
inline ArrivalModel parse_arrival(const std::string& text) {
  if (text == "uniform") return ArrivalModel::uniform();
  const auto j = read_json_file(text);
  return arrival_from_json(j.contains("arrival") ? j.at("arrival") : j);
}

/// "exp:RATE", "point:VALUE" or "file.json" holding {"waiting": {...}}.
inline WaitingModel parse_waiting(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (colon != std::string::npos && (head == "exp" || head == "point")) {
    const double v = detail::to_number(text.substr(colon + 1), "waiting");
    return head == "exp" ? WaitingModel::exponential(v) : WaitingModel::point(v);
  }
  if (colon != std::string::npos) throw ConfigError("waiting.kind", "unknown kind '" + head + "'");
  const auto j = read_json_file(text);
  return waiting_from_json(j.contains("waiting") ? j.at("waiting") : j);
}

/// "poisson:RATE".
inline PoissonArrivals parse_poisson(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || text.substr(0, colon) != "poisson")
    throw ConfigError("arrivals", "expected poisson:RATE");
  PoissonArrivals p{detail::to_number(text.substr(colon + 1), "arrivals.rate")};
  if (!(p.rate > 0.0)) throw ConfigError("arrivals.rate", "Poisson rate must be > 0");
  return p;
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

inline Policy policy_from_json(const json& j) {
  const auto kind = detail::field<std::string>(j, "kind", "policy");
  Policy p;
  if (kind == "never")
    p = NeverAccept{};
  else if (kind == "threshold")
    p = Threshold{detail::field<double>(j, "theta", "policy")};
  else if (kind == "rankcutoff")
    p = RankCutoff{detail::field<int>(j, "skip", "policy")};
  else if (kind == "grid")
    p = BivariateGrid{detail::field<std::vector<double>>(j, "t", "policy"),
                      detail::field<std::vector<int>>(j, "cutoff", "policy")};
  else
    throw ConfigError("policy.kind", "unknown kind '" + kind + "'");
  validate_policy(p);
  return p;
}

inline json to_json(const Policy& policy) {
  return std::visit(
      [](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NeverAccept>)
          return {{"kind", "never"}};
        else if constexpr (std::is_same_v<P, Threshold>)
          return {{"kind", "threshold"}, {"theta", p.theta}};
        else if constexpr (std::is_same_v<P, RankCutoff>)
          return {{"kind", "rankcutoff"}, {"skip", p.skip}};
        else
          return {{"kind", "grid"}, {"t", p.times}, {"cutoff", p.cutoffs}};
      },
      policy);
}

/// "threshold:THETA", "grid:FILE", "rankcutoff:M" or "never".
inline Policy parse_policy(const std::string& text) {
  if (text == "never") return NeverAccept{};
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("policy", "unknown policy '" + text + "'");
  const std::string head = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  Policy p;
  if (head == "threshold") {
    p = Threshold{detail::to_number(arg, "policy.theta")};
  } else if (head == "rankcutoff") {
    const double v = detail::to_number(arg, "policy.skip");
    if (v != std::floor(v)) throw ConfigError("policy.skip", "must be an integer");
    p = RankCutoff{static_cast<int>(v)};
  } else if (head == "grid") {
    return policy_from_json(read_json_file(arg));
  } else {
    throw ConfigError("policy", "unknown policy kind '" + head + "'");
  }
  validate_policy(p);
  return p;
}

// ---------------------------------------------------------------------------
// Trajectories and reports
// ---------------------------------------------------------------------------

inline json to_json(const Trajectory& t) {
  return {{"a", t.arrivals}, {"l", t.waits}, {"r", t.rel_ranks}};
}

inline Trajectory trajectory_from_json(const json& j) {
  return make_trajectory(detail::field<std::vector<double>>(j, "a", "trajectory"),
                         detail::field<std::vector<double>>(j, "l", "trajectory"),
                         detail::field<std::vector<int>>(j, "r", "trajectory"));
}

/// One trajectory per non-empty line.
inline std::vector<Trajectory> read_trajectories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  std::vector<Trajectory> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(trajectory_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ConfigError(path + ":" + std::to_string(lineno), std::string("invalid JSON: ") + e.what());
    }
  }
  return out;
}

inline json to_json(const EvalReport& r) {
  return {{"success_rate", r.success_rate},
          {"half_width", r.half_width},
          {"successes", r.successes},
          {"trials", r.trials},
          {"seed", r.seed}};
}

inline json to_json(const ThresholdResult& r) {
  return {{"t_star", r.t_star}, {"p_at_t_star", r.p_at_t_star}, {"n", r.n}};
}

inline json to_json(const BivariateSolution& s) {
  json j = to_json(Policy{s.policy});
  j["raw_cutoff"] = s.raw_cutoffs;
  j["probe_t"] = s.probe_times;
  std::vector<int> uncertain(s.uncertain.begin(), s.uncertain.end());
  j["uncertain"] = uncertain;
  j["projected"] = s.projected;
  return j;
}

/// Pretty JSON with a trailing newline; number formatting is deterministic.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace sds::io
