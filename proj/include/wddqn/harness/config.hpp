#pragma once

#include <charconv>
#include <filesystem>
#include <optional>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wddqn/agents/agent.hpp"
#include "wddqn/core/error.hpp"
#include "wddqn/env/layout.hpp"
#include "wddqn/env/pacman.hpp"
#include "wddqn/env/predator.hpp"
#include "wddqn/lenient/leniency.hpp"
#include "wddqn/replay/schedule.hpp"

namespace wddqn::harness {

enum class EnvKind { Pacman, Predator };

inline const std::vector<std::string>& known_agent_kinds() {
  static const std::vector<std::string> kinds{
      "dqn",       "ddqn",           "lenient",   "wddqn",           "wddqn-no-lrn-srs", "wddqn-lrn-only",
      "tabular-q", "tabular-double", "tabular-weighted", "tabular-lenient"};
  return kinds;
}

struct ExperimentConfig {
  EnvKind env = EnvKind::Pacman;
  pacman::Config pacman = pacman::Config::with_size(5);
  predator::Config predator = predator::Config::deterministic();
  std::string predator_rewards = "deterministic";
  std::string map_path;  // empty: bundled default map
  std::string agent_kind = "wddqn";
  agents::AgentConfig agent;
  lenient::LeniencyParams leniency;
  replay::PrioritySchedule schedule;
  int max_episodes = 2500;
  std::vector<std::uint64_t> seeds{1};
  std::string out_dir = "runs";

  void validate() const {
    bool known = false;
    for (const auto& k : known_agent_kinds()) known = known || k == agent_kind;
    if (!known) throw ConfigError("unknown agent kind '" + agent_kind + "'");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (max_episodes < 1) throw ConfigError("train.max_episodes must be >= 1");
    agent.validate();
    leniency.validate();
    schedule.validate();
    if (env == EnvKind::Pacman) pacman.validate();
    else predator.validate();
  }

  std::string env_name() const { return env == EnvKind::Pacman ? "pacman" : "predator"; }

  /// Identifies the environment for cross-run comparisons.
  std::string env_signature() const {
    if (env == EnvKind::Pacman)
      return "pacman/" + std::to_string(pacman.size) + "/" +
             (pacman.goal_mode == pacman::GoalMode::RandomPerEpisode ? "random" : "fixed");
    return "predator/" + predator_rewards + "/" + std::to_string(predator.layout.height()) + "x" +
           std::to_string(predator.layout.width());
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  }
}

inline long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return out;
}

inline std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split(v, ',')) out.push_back(static_cast<int>(to_long(key, s)));
  return out;
}

inline std::string join(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

}  // namespace detail

inline std::vector<std::uint64_t> parse_seed_list(const std::string& v) {
  std::vector<std::uint64_t> seeds;
  for (const auto& s : detail::split(v, ',')) {
    const long x = detail::to_long("seeds", s);
    if (x < 0) throw ConfigError("seeds must be non-negative");
    seeds.push_back(static_cast<std::uint64_t>(x));
  }
  if (seeds.empty()) throw ConfigError("empty seed list");
  return seeds;
}

/// Flat `key = value` text; '#' starts a comment. Unknown keys are errors.
inline ExperimentConfig parse_config(std::string_view text, const std::string& base_dir = ".") {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    kv[detail::trim(t.substr(0, eq))] = detail::trim(t.substr(eq + 1));
  }

  ExperimentConfig c;
  const auto take = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  using detail::to_double;
  using detail::to_long;

  if (auto v = take("env.name")) {
    if (*v == "pacman") c.env = EnvKind::Pacman;
    else if (*v == "predator") c.env = EnvKind::Predator;
    else throw ConfigError("env.name must be pacman or predator");
  }
  if (auto v = take("env.size")) c.pacman = pacman::Config::with_size(static_cast<int>(to_long("env.size", *v)));
  if (auto v = take("env.goal_mode")) {
    if (*v == "random") c.pacman.goal_mode = pacman::GoalMode::RandomPerEpisode;
    else if (*v == "fixed") c.pacman.goal_mode = pacman::GoalMode::FixedBottomRight;
    else throw ConfigError("env.goal_mode must be random or fixed");
  }
  if (auto v = take("env.rewards")) {
    if (*v == "deterministic") c.predator = predator::Config::deterministic();
    else if (*v == "stochastic") c.predator = predator::Config::stochastic();
    else throw ConfigError("env.rewards must be deterministic or stochastic");
    c.predator_rewards = *v;
  }
  if (auto v = take("env.map")) {
    std::filesystem::path p(*v);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    std::ifstream f(p);
    if (!f) throw ConfigError("cannot open map file " + p.string());
    std::stringstream ss;
    ss << f.rdbuf();
    c.predator.layout = load_map(ss.str());
    c.map_path = std::filesystem::absolute(p).lexically_normal().string();
  }
  if (auto v = take("env.max_steps")) {
    const int m = static_cast<int>(to_long("env.max_steps", *v));
    c.pacman.max_steps = m;
    c.predator.max_steps = m;
  }
  if (auto v = take("env.miscoordination_penalty")) c.predator.miscoordination_penalty = to_double("env.miscoordination_penalty", *v);
  if (auto v = take("env.nongoal_reward")) c.predator.nongoal_reward = to_double("env.nongoal_reward", *v);

  if (auto v = take("agent.kind")) c.agent_kind = *v;
  if (auto v = take("agent.gamma")) c.agent.gamma = to_double("agent.gamma", *v);
  if (auto v = take("agent.c")) c.agent.c = to_double("agent.c", *v);
  if (auto v = take("agent.batch_size")) c.agent.batch_size = static_cast<int>(to_long("agent.batch_size", *v));
  if (auto v = take("agent.lr")) c.agent.lr = to_double("agent.lr", *v);
  if (auto v = take("agent.target_sync")) c.agent.target_sync_interval = to_long("agent.target_sync", *v);
  if (auto v = take("agent.epsilon_start")) c.agent.epsilon_start = to_double("agent.epsilon_start", *v);
  if (auto v = take("agent.epsilon_end")) c.agent.epsilon_end = to_double("agent.epsilon_end", *v);
  if (auto v = take("agent.epsilon_steps")) c.agent.epsilon_anneal_steps = to_long("agent.epsilon_steps", *v);
  if (auto v = take("agent.q_hidden")) c.agent.q_hidden = detail::to_int_list("agent.q_hidden", *v);
  if (auto v = take("agent.lrn_hidden")) c.agent.lrn_hidden = detail::to_int_list("agent.lrn_hidden", *v);
  if (auto v = take("agent.alpha")) c.agent.tabular_alpha = to_double("agent.alpha", *v);

  if (auto v = take("replay.capacity")) c.agent.replay_capacity = static_cast<std::size_t>(to_long("replay.capacity", *v));
  if (auto v = take("replay.rho_c")) c.schedule.rho_c = to_double("replay.rho_c", *v);
  if (auto v = take("replay.u")) c.schedule.u = to_double("replay.u", *v);
  if (auto v = take("replay.w_max")) c.schedule.w_max = to_double("replay.w_max", *v);

  if (auto v = take("lenient.K")) c.leniency.K = to_double("lenient.K", *v);
  if (auto v = take("lenient.kappa")) c.leniency.kappa = to_double("lenient.kappa", *v);
  if (auto v = take("lenient.eta")) c.leniency.eta = to_double("lenient.eta", *v);
  if (auto v = take("lenient.max_temperature")) c.leniency.max_temperature = to_double("lenient.max_temperature", *v);
  if (auto v = take("lenient.gate")) {
    if (*v == "optimistic") c.leniency.gate = lenient::GateRule::Optimistic;
    else if (*v == "literal") c.leniency.gate = lenient::GateRule::LiteralReward;
    else throw ConfigError("lenient.gate must be optimistic or literal");
  }

  if (auto v = take("train.max_episodes")) c.max_episodes = static_cast<int>(to_long("train.max_episodes", *v));
  if (auto v = take("train.seeds")) c.seeds = parse_seed_list(*v);
  if (auto v = take("train.out")) c.out_dir = *v;

  if (!kv.empty()) throw ConfigError("unknown config key '" + kv.begin()->first + "'");
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.parent_path().string());
}

/// Resolved configuration in the same key = value format (plus run.seed).
inline std::string to_text(const ExperimentConfig& c, std::uint64_t seed) {
  std::ostringstream o;
  o.precision(17);
  const auto gate = c.leniency.gate == lenient::GateRule::Optimistic ? "optimistic" : "literal";
  o << "env.name = " << c.env_name() << '\n';
  if (c.env == EnvKind::Pacman) {
    o << "env.size = " << c.pacman.size << '\n'
      << "env.goal_mode = " << (c.pacman.goal_mode == pacman::GoalMode::RandomPerEpisode ? "random" : "fixed") << '\n'
      << "env.max_steps = " << c.pacman.max_steps << '\n';
  } else {
    o << "env.rewards = " << c.predator_rewards << '\n';
    if (!c.map_path.empty()) o << "env.map = " << c.map_path << '\n';
    o << "env.max_steps = " << c.predator.max_steps << '\n'
      << "env.miscoordination_penalty = " << c.predator.miscoordination_penalty << '\n'
      << "env.nongoal_reward = " << c.predator.nongoal_reward << '\n';
  }
  o << "agent.kind = " << c.agent_kind << '\n'
    << "agent.gamma = " << c.agent.gamma << '\n'
    << "agent.c = " << c.agent.c << '\n'
    << "agent.batch_size = " << c.agent.batch_size << '\n'
    << "agent.lr = " << c.agent.lr << '\n'
    << "agent.target_sync = " << c.agent.target_sync_interval << '\n'
    << "agent.epsilon_start = " << c.agent.epsilon_start << '\n'
    << "agent.epsilon_end = " << c.agent.epsilon_end << '\n'
    << "agent.epsilon_steps = " << c.agent.epsilon_anneal_steps << '\n'
    << "agent.q_hidden = " << detail::join(c.agent.q_hidden) << '\n'
    << "agent.lrn_hidden = " << detail::join(c.agent.lrn_hidden) << '\n'
    << "agent.alpha = " << c.agent.tabular_alpha << '\n'
    << "replay.capacity = " << c.agent.replay_capacity << '\n'
    << "replay.rho_c = " << c.schedule.rho_c << '\n'
    << "replay.u = " << c.schedule.u << '\n'
    << "replay.w_max = " << c.schedule.w_max << '\n'
    << "lenient.K = " << c.leniency.K << '\n'
    << "lenient.kappa = " << c.leniency.kappa << '\n'
    << "lenient.eta = " << c.leniency.eta << '\n'
    << "lenient.max_temperature = " << c.leniency.max_temperature << '\n'
    << "lenient.gate = " << gate << '\n'
    << "train.max_episodes = " << c.max_episodes << '\n'
    << "train.seeds = " << seed << '\n';
  return o.str();
}

}  // namespace wddqn::harness
