#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wddqn/agents/agent.hpp"
#include "wddqn/agents/dqn.hpp"
#include "wddqn/agents/tabular_agent.hpp"
#include "wddqn/agents/wddqn.hpp"
#include "wddqn/core/random.hpp"
#include "wddqn/harness/config.hpp"
#include "wddqn/harness/metrics.hpp"

namespace wddqn::harness {

struct EpisodeRecord {
  int episode = 0;
  double total_reward = 0.0;
  int steps = 0;
  double efficiency_ratio = 0.0;
  double epsilon = 0.0;
  double loss_u = std::nan("");
  double loss_v = std::nan("");
  double loss_lrn = std::nan("");
  Outcome outcome = Outcome::Step;
};

struct RunSummary {
  std::vector<WindowStats> reward_windows;
  std::vector<WindowStats> ratio_windows;
  double final_window_mean_reward = 0.0;
  double final_window_mean_ratio = 0.0;
  double wall_clock_seconds = 0.0;
};

struct RunResult {
  std::vector<EpisodeRecord> episodes;
  RunSummary summary;

  std::vector<double> rewards() const {
    std::vector<double> r;
    for (const auto& e : episodes) r.push_back(e.total_reward);
    return r;
  }
  std::vector<double> ratios() const {
    std::vector<double> r;
    for (const auto& e : episodes) r.push_back(e.efficiency_ratio);
    return r;
  }
};

inline constexpr std::size_t kWindow = 50;

inline std::unique_ptr<agents::Agent> make_agent(const ExperimentConfig& cfg, int input_size, int num_actions,
                                                 std::uint64_t seed) {
  using namespace agents;
  const auto& k = cfg.agent_kind;
  if (k == "wddqn" || k == "wddqn-no-lrn-srs" || k == "wddqn-lrn-only") {
    WddqnOptions opt;
    opt.use_lrn = k != "wddqn-no-lrn-srs";
    opt.use_srs = k == "wddqn";
    return std::make_unique<WddqnAgent>(input_size, num_actions, cfg.agent, cfg.leniency, cfg.schedule, opt, seed);
  }
  if (k == "dqn") return std::make_unique<DqnAgent>(DqnVariant::Dqn, input_size, num_actions, cfg.agent, cfg.leniency, seed);
  if (k == "ddqn") return std::make_unique<DqnAgent>(DqnVariant::Ddqn, input_size, num_actions, cfg.agent, cfg.leniency, seed);
  if (k == "lenient") return std::make_unique<DqnAgent>(DqnVariant::Lenient, input_size, num_actions, cfg.agent, cfg.leniency, seed);
  if (k == "tabular-q") return std::make_unique<TabularAgent>(TabularVariant::Single, false, num_actions, cfg.agent, cfg.leniency, seed);
  if (k == "tabular-double") return std::make_unique<TabularAgent>(TabularVariant::Double, false, num_actions, cfg.agent, cfg.leniency, seed);
  if (k == "tabular-weighted") return std::make_unique<TabularAgent>(TabularVariant::Weighted, false, num_actions, cfg.agent, cfg.leniency, seed);
  if (k == "tabular-lenient") return std::make_unique<TabularAgent>(TabularVariant::Single, true, num_actions, cfg.agent, cfg.leniency, seed);
  throw ConfigError("unknown agent kind '" + k + "'");
}

namespace detail {

/// Accumulates per-network losses over an episode.
struct LossAccumulator {
  double sum[3] = {0, 0, 0};
  long count[3] = {0, 0, 0};

  void add(const agents::LearnMetrics& m) {
    if (!m.trained) return;
    const int net = m.network == 1 ? 1 : 0;
    sum[net] += m.loss;
    ++count[net];
    if (!std::isnan(m.loss_lrn)) {
      sum[2] += m.loss_lrn;
      ++count[2];
    }
  }
  double mean(int i) const { return count[i] ? sum[i] / static_cast<double>(count[i]) : std::nan(""); }
};

inline RunResult run_pacman(const ExperimentConfig& cfg, std::uint64_t seed, const std::function<void(const EpisodeRecord&)>& on_episode) {
  const auto& env = cfg.pacman;
  Rng env_rng = make_rng(derive_seed(seed, 0));
  auto agent = make_agent(cfg, static_cast<int>(pacman::observation_size(env)), kNumActions, derive_seed(seed, 1));
  RunResult result;
  long step_count = 0;
  for (int ep = 0; ep < cfg.max_episodes; ++ep) {
    pacman::State s = pacman::reset(env, env_rng);
    const int shortest = pacman::min_steps(s, env);
    auto enc = pacman::encode_observation(s, env);
    auto key = pacman::state_key(s, env);
    EpisodeRecord rec;
    rec.episode = ep;
    rec.epsilon = agents::epsilon_at(step_count, cfg.agent);
    LossAccumulator losses;
    while (true) {
      const double eps = agents::epsilon_at(step_count, cfg.agent);
      const int a = agent->select_action(enc, key, eps);
      const auto r = pacman::step(s, action_from_index(a), env, env_rng);
      auto next_enc = pacman::encode_observation(r.next_state, env);
      const auto next_key = pacman::state_key(r.next_state, env);
      agent->observe(Transition{enc, a, r.reward, next_enc, r.terminal && r.info == Outcome::Goal, key, next_key});
      losses.add(agent->learn());
      ++step_count;
      rec.total_reward += r.reward;
      ++rec.steps;
      s = r.next_state;
      enc = std::move(next_enc);
      key = next_key;
      if (r.terminal) {
        rec.outcome = r.info;
        break;
      }
    }
    agent->end_episode();
    rec.efficiency_ratio = efficiency_ratio(shortest, rec.steps, rec.outcome == Outcome::Goal);
    rec.loss_u = losses.mean(0);
    rec.loss_v = losses.mean(1);
    rec.loss_lrn = losses.mean(2);
    if (on_episode) on_episode(rec);
    result.episodes.push_back(rec);
  }
  return result;
}

inline RunResult run_predator(const ExperimentConfig& cfg, std::uint64_t seed, const std::function<void(const EpisodeRecord&)>& on_episode) {
  const auto& env = cfg.predator;
  Rng env_rng = make_rng(derive_seed(seed, 0));
  const int dim = static_cast<int>(predator::observation_size(env));
  std::array<std::unique_ptr<agents::Agent>, 2> team{make_agent(cfg, dim, kNumActions, derive_seed(seed, 1)),
                                                     make_agent(cfg, dim, kNumActions, derive_seed(seed, 2))};
  RunResult result;
  long step_count = 0;
  for (int ep = 0; ep < cfg.max_episodes; ++ep) {
    predator::State s = predator::reset(env);
    const int shortest = predator::min_steps(s, env);
    auto enc = predator::encode_observation(s, env);
    auto key = predator::state_key(s, env);
    EpisodeRecord rec;
    rec.episode = ep;
    rec.epsilon = agents::epsilon_at(step_count, cfg.agent);
    LossAccumulator losses;
    while (true) {
      const double eps = agents::epsilon_at(step_count, cfg.agent);
      const std::array<int, 2> actions{team[0]->select_action(enc, key, eps), team[1]->select_action(enc, key, eps)};
      const auto r = predator::step(s, {action_from_index(actions[0]), action_from_index(actions[1])}, env, env_rng);
      auto next_enc = predator::encode_observation(r.next_state, env);
      const auto next_key = predator::state_key(r.next_state, env);
      const bool absorbing = r.terminal && r.info == Outcome::Goal;
      for (std::size_t i = 0; i < 2; ++i) {
        team[i]->observe(Transition{enc, actions[i], r.reward, next_enc, absorbing, key, next_key});
        losses.add(team[i]->learn());
      }
      ++step_count;
      rec.total_reward += r.reward;
      ++rec.steps;
      s = r.next_state;
      enc = std::move(next_enc);
      key = next_key;
      if (r.terminal) {
        rec.outcome = r.info;
        break;
      }
    }
    for (auto& agent : team) agent->end_episode();
    rec.efficiency_ratio = efficiency_ratio(shortest, rec.steps, rec.outcome == Outcome::Goal);
    rec.loss_u = losses.mean(0);
    rec.loss_v = losses.mean(1);
    rec.loss_lrn = losses.mean(2);
    if (on_episode) on_episode(rec);
    result.episodes.push_back(rec);
  }
  return result;
}

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

inline RunSummary summarize(const RunResult& r) {
  RunSummary s;
  const auto rewards = r.rewards();
  const auto ratios = r.ratios();
  s.reward_windows = rolling_metrics(rewards, kWindow);
  s.ratio_windows = rolling_metrics(ratios, kWindow);
  if (!s.reward_windows.empty()) {
    s.final_window_mean_reward = s.reward_windows.back().mean;
    s.final_window_mean_ratio = s.ratio_windows.back().mean;
  }
  return s;
}

/// Execute one seeded run in memory. Fully determined by (config, seed).
inline RunResult run(const ExperimentConfig& cfg, std::uint64_t seed,
                     const std::function<void(const EpisodeRecord&)>& on_episode = {}) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r = cfg.env == EnvKind::Pacman ? detail::run_pacman(cfg, seed, on_episode)
                                           : detail::run_predator(cfg, seed, on_episode);
  r.summary = summarize(r);
  r.summary.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline constexpr const char* kEpisodesHeader =
    "episode,total_reward,steps,efficiency_ratio,epsilon,loss_u,loss_v,loss_lrn,outcome";
inline constexpr const char* kSummaryHeader =
    "window,first_episode,episodes,mean_reward,min_reward,max_reward,mean_ratio,min_ratio,max_ratio";

inline void write_episodes_csv(const RunResult& r, std::ostream& out) {
  using detail::fmt_double;
  out << kEpisodesHeader << '\n';
  for (const auto& e : r.episodes)
    out << e.episode << ',' << fmt_double(e.total_reward) << ',' << e.steps << ',' << fmt_double(e.efficiency_ratio)
        << ',' << fmt_double(e.epsilon) << ',' << fmt_double(e.loss_u) << ',' << fmt_double(e.loss_v) << ','
        << fmt_double(e.loss_lrn) << ',' << to_string(e.outcome) << '\n';
}

inline void write_summary_csv(const RunSummary& s, std::ostream& out) {
  using detail::fmt_double;
  out << kSummaryHeader << '\n';
  for (std::size_t i = 0; i < s.reward_windows.size(); ++i) {
    const auto& w = s.reward_windows[i];
    const auto& q = s.ratio_windows[i];
    out << i << ',' << w.first << ',' << w.size << ',' << fmt_double(w.mean) << ',' << fmt_double(w.min) << ','
        << fmt_double(w.max) << ',' << fmt_double(q.mean) << ',' << fmt_double(q.min) << ',' << fmt_double(q.max)
        << '\n';
  }
}

/// Run and write episodes.csv, summary.csv and config.txt into `out_dir`.
/// Wall-clock time goes to timing.txt so the CSVs stay reproducible.
inline RunResult run_to_dir(const ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& out_dir,
                            const std::function<void(const EpisodeRecord&)>& on_episode = {}) {
  std::filesystem::create_directories(out_dir);
  RunResult r = run(cfg, seed, on_episode);
  const auto write = [&](const char* name, auto&& fn) {
    std::ofstream out(out_dir / name);
    if (!out) throw Error("cannot write " + (out_dir / name).string());
    fn(out);
    if (!out) throw Error("failed writing " + (out_dir / name).string());
  };
  write("episodes.csv", [&](std::ostream& o) { write_episodes_csv(r, o); });
  write("summary.csv", [&](std::ostream& o) { write_summary_csv(r.summary, o); });
  write("config.txt", [&](std::ostream& o) { o << to_text(cfg, seed); });
  write("timing.txt", [&](std::ostream& o) { o << "wall_clock_seconds = " << r.summary.wall_clock_seconds << '\n'; });
  return r;
}

}  // namespace wddqn::harness
