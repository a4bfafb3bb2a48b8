#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "wddqn/core/error.hpp"
#include "wddqn/harness/config.hpp"
#include "wddqn/harness/runner.hpp"

namespace wddqn::harness {

struct ReferenceLines {
  double optimal = 0.0;
  double suboptimal = 0.0;
};

/// Expected optimal / suboptimal episode reward (predator) or ratio (pacman).
inline ReferenceLines reference_lines(const ExperimentConfig& cfg) {
  if (cfg.env == EnvKind::Pacman) return {1.0, 0.0};
  return {cfg.predator.reward_g.expected(), cfg.predator.reward_s.expected()};
}

struct RunDir {
  std::filesystem::path path;
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::string summary_body;  // summary.csv without its header
};

inline RunDir read_run_dir(const std::filesystem::path& dir) {
  RunDir r;
  r.path = dir;
  std::ifstream cfg_in(dir / "config.txt");
  if (!cfg_in) throw Error("missing " + (dir / "config.txt").string());
  std::stringstream ss;
  ss << cfg_in.rdbuf();
  r.config = parse_config(ss.str(), dir.string());
  r.seed = r.config.seeds.front();
  std::ifstream sum_in(dir / "summary.csv");
  if (!sum_in) throw Error("missing " + (dir / "summary.csv").string());
  std::string header;
  std::getline(sum_in, header);
  if (header != kSummaryHeader) throw Error("unexpected summary header in " + dir.string());
  std::stringstream body;
  body << sum_in.rdbuf();
  r.summary_body = body.str();
  return r;
}

inline constexpr const char* kCompareHeader =
    "agent,seed,window,first_episode,episodes,mean_reward,min_reward,max_reward,mean_ratio,min_ratio,max_ratio,"
    "optimal_ref,suboptimal_ref";

/// Merge run directories into one plot-ready table keyed by (agent, seed, window).
/// All runs must share the environment.
inline void compare(const std::vector<std::filesystem::path>& dirs, std::ostream& out) {
  if (dirs.empty()) throw Error("compare needs at least one run directory");
  std::vector<RunDir> runs;
  for (const auto& d : dirs) runs.push_back(read_run_dir(d));
  const std::string env = runs.front().config.env_signature();
  for (const auto& r : runs)
    if (r.config.env_signature() != env)
      throw Error("mismatched environments: " + env + " vs " + r.config.env_signature());
  const auto refs = reference_lines(runs.front().config);
  out << kCompareHeader << '\n';
  for (const auto& r : runs) {
    std::istringstream rows(r.summary_body);
    for (std::string line; std::getline(rows, line);) {
      if (line.empty()) continue;
      out << r.config.agent_kind << ',' << r.seed << ',' << line << ',' << detail::fmt_double(refs.optimal) << ','
          << detail::fmt_double(refs.suboptimal) << '\n';
    }
  }
}

}  // namespace wddqn::harness
