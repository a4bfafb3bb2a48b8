#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "wddqn/harness/compare.hpp"
#include "wddqn/harness/config.hpp"
#include "wddqn/harness/metrics.hpp"
#include "wddqn/harness/runner.hpp"

using namespace wddqn;
using namespace wddqn::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("wddqn_harness_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Small nets and a short horizon so whole runs take well under a second.
ExperimentConfig quick(const std::string& env, const std::string& kind, int episodes) {
  std::ostringstream t;
  t << "env.name = " << env << "\n"
    << "agent.kind = " << kind << "\n"
    << "agent.q_hidden = 16\n"
    << "agent.lrn_hidden = 8\n"
    << "agent.batch_size = 8\n"
    << "replay.capacity = 500\n"
    << "env.max_steps = 40\n"
    << "train.max_episodes = " << episodes << "\n";
  if (env == "pacman") t << "env.size = 3\n";
  return parse_config(t.str());
}

}  // namespace

TEST(EfficiencyRatio, Examples) {
  EXPECT_DOUBLE_EQ(efficiency_ratio(10, 20, true), 0.5);
  EXPECT_DOUBLE_EQ(efficiency_ratio(7, 7, true), 1.0);
  EXPECT_DOUBLE_EQ(efficiency_ratio(7, 200, false), 0.0);
  EXPECT_THROW(efficiency_ratio(3, 0, true), ContractViolation);
}

TEST(RollingMetrics, OneToFifty) {
  std::vector<double> r(50);
  std::iota(r.begin(), r.end(), 1.0);
  const auto w = rolling_metrics(r);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_DOUBLE_EQ(w[0].mean, 25.5);
  EXPECT_DOUBLE_EQ(w[0].min, 1.0);
  EXPECT_DOUBLE_EQ(w[0].max, 50.0);
  EXPECT_EQ(w[0].size, 50u);
}

TEST(RollingMetrics, ConstantInput) {
  const std::vector<double> r(73, -4.25);
  for (const auto& w : rolling_metrics(r)) {
    EXPECT_EQ(w.mean, -4.25);
    EXPECT_EQ(w.min, -4.25);
    EXPECT_EQ(w.max, -4.25);
  }
}

TEST(RollingMetrics, PartialFinalWindow) {
  std::vector<double> r(120);
  std::iota(r.begin(), r.end(), 0.0);
  const auto w = rolling_metrics(r);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0].size, 50u);
  EXPECT_EQ(w[1].size, 50u);
  EXPECT_EQ(w[2].size, 20u);
  EXPECT_EQ(w[2].first, 100u);
  EXPECT_DOUBLE_EQ(w[2].mean, 109.5);
  EXPECT_THROW(rolling_metrics(r, 0), ContractViolation);
}

TEST(RollingMetrics, WindowsTileTheRange) {
  Rng rng = make_rng(3);
  for (int n : {1, 49, 50, 51, 2500}) {
    std::vector<double> r(static_cast<std::size_t>(n));
    for (auto& x : r) x = uniform01(rng);
    const auto ws = rolling_metrics(r, 50);
    std::size_t next = 0;
    for (const auto& w : ws) {
      EXPECT_EQ(w.first, next);
      double sum = 0, lo = r[w.first], hi = r[w.first];
      for (std::size_t i = w.first; i < w.first + w.size; ++i) {
        sum += r[i];
        lo = std::min(lo, r[i]);
        hi = std::max(hi, r[i]);
      }
      EXPECT_NEAR(w.mean, sum / static_cast<double>(w.size), 1e-12);
      EXPECT_EQ(w.min, lo);
      EXPECT_EQ(w.max, hi);
      next += w.size;
    }
    EXPECT_EQ(next, r.size());
  }
}

TEST(Config, DefaultsAndKeys) {
  const auto c = parse_config(
      "# comment\n"
      "env.name = predator\n"
      "env.rewards = stochastic   # trailing comment\n"
      "agent.kind = lenient\n"
      "agent.gamma = 0.9\n"
      "agent.c = 0.5\n"
      "replay.rho_c = 0.3\n"
      "replay.u = 1.2\n"
      "lenient.K = 3\n"
      "lenient.kappa = 0.9\n"
      "lenient.eta = 0.8\n"
      "train.max_episodes = 12\n"
      "train.seeds = 4, 5,6\n");
  EXPECT_EQ(c.env, EnvKind::Predator);
  EXPECT_EQ(c.agent_kind, "lenient");
  EXPECT_DOUBLE_EQ(c.agent.gamma, 0.9);
  EXPECT_DOUBLE_EQ(c.agent.c, 0.5);
  EXPECT_DOUBLE_EQ(c.schedule.rho_c, 0.3);
  EXPECT_DOUBLE_EQ(c.schedule.u, 1.2);
  EXPECT_DOUBLE_EQ(c.leniency.K, 3.0);
  EXPECT_DOUBLE_EQ(c.leniency.kappa, 0.9);
  EXPECT_DOUBLE_EQ(c.leniency.eta, 0.8);
  EXPECT_EQ(c.max_episodes, 12);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{4, 5, 6}));
  EXPECT_EQ(c.env_signature(), "predator/stochastic/5x7");

  const auto d = parse_config("");
  EXPECT_EQ(d.env, EnvKind::Pacman);
  EXPECT_EQ(d.agent_kind, "wddqn");
  EXPECT_EQ(d.max_episodes, 2500);
  EXPECT_EQ(d.seeds, (std::vector<std::uint64_t>{1}));
}

TEST(Config, StochasticRewardsAreApplied) {
  const auto det = parse_config("env.name = predator\n");
  const auto sto = parse_config("env.name = predator\nenv.rewards = stochastic\n");
  EXPECT_DOUBLE_EQ(det.predator.reward_s.expected(), 10.0);
  EXPECT_DOUBLE_EQ(sto.predator.reward_s.expected(), 46.0);
  EXPECT_DOUBLE_EQ(sto.predator.reward_g.expected(), 80.0);
  // Same seed, different reward model: runs that reach S must differ.
  Rng a = make_rng(9), b = make_rng(9);
  std::set<double> seen;
  for (int i = 0; i < 200; ++i) seen.insert(sto.predator.reward_s.sample(a));
  EXPECT_GT(seen.size(), 1u);
  EXPECT_EQ(det.predator.reward_s.sample(b), 10.0);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("agent.kind = nope\n"), ConfigError);
  EXPECT_THROW(parse_config("bogus.key = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("agent.gamma = fast\n"), ConfigError);
  EXPECT_THROW(parse_config("train.max_episodes = 2.5\n"), ConfigError);
  EXPECT_THROW(parse_config("just some words\n"), ConfigError);
  EXPECT_THROW(parse_config("train.seeds = \n"), ConfigError);
  EXPECT_THROW(parse_config("train.max_episodes = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("env.rewards = sometimes\n"), ConfigError);
  EXPECT_THROW(parse_config("env.map = /definitely/not/here.map\n"), ConfigError);
}

TEST(Config, MapFileRelativeToConfig) {
  const char* maps = std::getenv("WDDQN_MAPS_DIR");
  if (!maps) GTEST_SKIP() << "WDDQN_MAPS_DIR not set";
  const auto c = parse_config("env.name = predator\nenv.map = default.map\n", maps);
  EXPECT_EQ(c.predator.layout.width(), 7);
  EXPECT_EQ(c.predator.layout.height(), 5);
  EXPECT_TRUE(fs::path(c.map_path).is_absolute());
}

TEST(Config, TextRoundTrip) {
  for (const char* env : {"pacman", "predator"}) {
    auto c = quick(env, "wddqn", 7);
    c.agent.lr = 3.3e-4;
    const auto text = to_text(c, 42);
    const auto back = parse_config(text);
    EXPECT_EQ(to_text(back, 42), text);
    EXPECT_EQ(back.seeds, (std::vector<std::uint64_t>{42}));
    EXPECT_EQ(back.agent.lr, 3.3e-4);
  }
}

TEST(Runner, AgentKinds) {
  const auto c = quick("pacman", "wddqn", 1);
  for (const auto& k : known_agent_kinds()) {
    auto cfg = c;
    cfg.agent_kind = k;
    EXPECT_EQ(make_agent(cfg, 10, kNumActions, 1)->kind(), k);
  }
}

TEST(Runner, RecordCountsAndInvariants) {
  for (const char* env : {"pacman", "predator"}) {
    for (const char* kind : {"wddqn", "ddqn", "lenient", "tabular-q"}) {
      const auto cfg = quick(env, kind, 30);
      const auto r = run(cfg, 5);
      ASSERT_EQ(r.episodes.size(), 30u) << env << " " << kind;
      for (std::size_t i = 0; i < r.episodes.size(); ++i) {
        const auto& e = r.episodes[i];
        EXPECT_EQ(e.episode, static_cast<int>(i));
        EXPECT_GE(e.steps, 1);
        EXPECT_LE(e.steps, 40);
        if (e.outcome == Outcome::Goal) {
          EXPECT_GT(e.efficiency_ratio, 0.0);
          EXPECT_LE(e.efficiency_ratio, 1.0);
        } else {
          EXPECT_EQ(e.outcome, Outcome::Timeout);
          EXPECT_EQ(e.efficiency_ratio, 0.0);
          EXPECT_EQ(e.steps, 40);
        }
        EXPECT_GE(e.epsilon, cfg.agent.epsilon_end);
        EXPECT_LE(e.epsilon, cfg.agent.epsilon_start);
      }
      ASSERT_EQ(r.summary.reward_windows.size(), 1u);
      EXPECT_EQ(r.summary.reward_windows[0].size, 30u);
    }
  }
}

TEST(Runner, NoLrnSrsHasNoRewardNetLoss) {
  const auto plain = run(quick("pacman", "wddqn-no-lrn-srs", 20), 2);
  const auto full = run(quick("pacman", "wddqn", 20), 2);
  bool any_lrn = false;
  for (const auto& e : plain.episodes) EXPECT_TRUE(std::isnan(e.loss_lrn));
  for (const auto& e : full.episodes) any_lrn = any_lrn || !std::isnan(e.loss_lrn);
  EXPECT_TRUE(any_lrn);
}

TEST(Runner, DeterministicCsv) {
  TempDir tmp("det");
  for (const char* env : {"pacman", "predator"}) {
    const auto cfg = quick(env, "wddqn", 60);
    run_to_dir(cfg, 11, tmp.path / env / "a");
    run_to_dir(cfg, 11, tmp.path / env / "b");
    run_to_dir(cfg, 12, tmp.path / env / "c");
    for (const char* f : {"episodes.csv", "summary.csv", "config.txt"})
      EXPECT_EQ(slurp(tmp.path / env / "a" / f), slurp(tmp.path / env / "b" / f)) << env << " " << f;
    EXPECT_NE(slurp(tmp.path / env / "a" / "episodes.csv"), slurp(tmp.path / env / "c" / "episodes.csv"));
  }
}

TEST(Runner, CsvShape) {
  TempDir tmp("csv");
  const auto cfg = quick("pacman", "ddqn", 120);
  run_to_dir(cfg, 3, tmp.path);
  const auto episodes = slurp(tmp.path / "episodes.csv");
  const auto summary = slurp(tmp.path / "summary.csv");
  EXPECT_EQ(count_lines(episodes), 121u);
  EXPECT_EQ(count_lines(summary), 4u);
  EXPECT_EQ(episodes.substr(0, episodes.find('\n')), kEpisodesHeader);
  EXPECT_EQ(summary.substr(0, summary.find('\n')), kSummaryHeader);
  EXPECT_EQ(episodes.find(';'), std::string::npos);
  std::istringstream rows(episodes);
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8);
  EXPECT_TRUE(fs::exists(tmp.path / "timing.txt"));
}

TEST(Compare, ReferenceLines) {
  EXPECT_DOUBLE_EQ(reference_lines(parse_config("env.name = predator\nenv.rewards = stochastic\n")).optimal, 80.0);
  EXPECT_DOUBLE_EQ(reference_lines(parse_config("env.name = predator\nenv.rewards = stochastic\n")).suboptimal, 46.0);
  EXPECT_DOUBLE_EQ(reference_lines(parse_config("env.name = predator\n")).suboptimal, 10.0);
  EXPECT_DOUBLE_EQ(reference_lines(parse_config("")).optimal, 1.0);
}

TEST(Compare, EmptyInputIsError) {
  std::ostringstream out;
  EXPECT_THROW(compare({}, out), Error);
}

TEST(Compare, TwoAgentsTwoSeeds) {
  TempDir tmp("cmp");
  std::vector<fs::path> dirs;
  for (const char* kind : {"wddqn", "lenient"}) {
    auto cfg = quick("predator", kind, 60);
    cfg.predator = predator::Config::stochastic();
    cfg.predator.max_steps = 40;
    cfg.predator_rewards = "stochastic";
    for (std::uint64_t seed : {1u, 2u}) {
      dirs.push_back(tmp.path / (std::string(kind) + "_" + std::to_string(seed)));
      run_to_dir(cfg, seed, dirs.back());
    }
  }
  std::ostringstream out;
  compare(dirs, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kCompareHeader);
  std::set<std::pair<std::string, std::string>> series;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 13u);
    series.insert({cells[0], cells[1]});
    EXPECT_EQ(cells[11], "80");
    EXPECT_EQ(cells[12], "46");
  }
  EXPECT_EQ(series.size(), 4u);
  EXPECT_EQ(rows, 8u);  // 60 episodes -> windows of 50 and 10

  auto other = quick("pacman", "wddqn", 10);
  run_to_dir(other, 1, tmp.path / "pacman");
  dirs.push_back(tmp.path / "pacman");
  std::ostringstream out2;
  EXPECT_THROW(compare(dirs, out2), Error);
}
