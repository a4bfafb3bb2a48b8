#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "wddqn/agents/tabular.hpp"
#include "wddqn/env/pacman.hpp"
#include "wddqn/env/predator.hpp"
#include "wddqn/harness/config.hpp"
#include "wddqn/harness/metrics.hpp"
#include "wddqn/harness/runner.hpp"
#include "wddqn/lenient/leniency.hpp"
#include "wddqn/lenient/reward_net.hpp"
#include "wddqn/nn/dense_net.hpp"
#include "wddqn/nn/train.hpp"
#include "wddqn/replay/schedule.hpp"
#include "wddqn/replay/sum_tree_memory.hpp"

// Acceptance criteria as plain functions so both the acceptance binary and
// `wddqn_cli check` can run them.
namespace wddqn::acceptance {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

struct Criterion {
  int id;
  const char* title;
  bool slow;  // full-length training runs
  std::function<Verdict()> check;
};

inline std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

inline void progress(const std::string& line) { std::cerr << "  .. " << line << std::endl; }

// ---------------------------------------------------------------- 1

namespace detail {

struct RandomMdp {
  int states = 1;
  // per (s, a): successor distribution (terminal = index `states`), reward mean
  std::vector<std::vector<double>> next_prob;
  std::vector<double> reward_mean;

  static RandomMdp make(Rng& rng) {
    RandomMdp m;
    m.states = 1 + static_cast<int>(uniform_index(rng, 4));
    for (int i = 0; i < m.states * 2; ++i) {
      std::vector<double> p(static_cast<std::size_t>(m.states + 1));
      double total = 0.0;
      for (auto& x : p) total += (x = uniform01(rng));
      for (auto& x : p) x /= total;
      m.next_prob.push_back(std::move(p));
      m.reward_mean.push_back(4.0 * uniform01(rng) - 2.0);
    }
    return m;
  }

  agents::TabularTransition step(int s, int a, Rng& rng, double noise) const {
    const auto& p = next_prob[static_cast<std::size_t>(s * 2 + a)];
    double x = uniform01(rng);
    int next = 0;
    while (next < states && x >= p[static_cast<std::size_t>(next)]) x -= p[static_cast<std::size_t>(next++)];
    const double r = reward_mean[static_cast<std::size_t>(s * 2 + a)] + noise * standard_normal(rng);
    return {static_cast<std::uint64_t>(s), a, r, static_cast<std::uint64_t>(next), next == states};
  }
};

}  // namespace detail

inline Verdict criterion_1() {
  constexpr double alpha = 0.1, gamma = 0.9, c = 0.1;
  Verdict v;
  double worst = 0.0;
  long steps = 0, weighted_mismatch = 0;
  Rng rng = make_rng(101);
  for (int m = 0; m < 100; ++m) {
    const auto mdp = detail::RandomMdp::make(rng);
    // Oracle: dense array, Q(s,a) += alpha (r + gamma max Q(s') - Q(s,a)).
    std::vector<std::array<double, 2>> oracle(static_cast<std::size_t>(mdp.states), {0.0, 0.0});
    agents::TabularQ single(agents::TabularVariant::Single, 2);
    Rng learner = make_rng(derive_seed(101, static_cast<std::uint64_t>(m)));
    int s = 0;
    for (int k = 0; k < 500; ++k, ++steps) {
      const int a = static_cast<int>(uniform_index(rng, 2));
      const auto t = mdp.step(s, a, rng, 1.0);

      agents::TabularQ weighted(agents::TabularVariant::Weighted, 2);
      weighted.u = single.u;
      weighted.v = single.u;

      auto& q = oracle[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
      const double boot = t.terminal ? 0.0 : std::max(oracle[t.next_state][0], oracle[t.next_state][1]);
      q = q + alpha * (t.reward + gamma * boot - q);

      agents::tabular_update(single, t, alpha, gamma, c, learner);
      agents::tabular_update(weighted, t, alpha, gamma, c, learner);
      for (int ss = 0; ss < mdp.states; ++ss)
        for (int aa = 0; aa < 2; ++aa)
          worst = std::max(worst, std::abs(single.u.get(static_cast<std::uint64_t>(ss), aa) -
                                           oracle[static_cast<std::size_t>(ss)][static_cast<std::size_t>(aa)]));
      if (!(weighted.u == single.u || weighted.v == single.u)) ++weighted_mismatch;
      s = t.terminal ? 0 : static_cast<int>(t.next_state);
    }
  }
  v.require(worst <= 1e-12, fmt("single vs oracle max |diff| %.3g over %ld steps", worst, steps));
  v.require(weighted_mismatch == 0, fmt("weighted(U=V) != single in %ld steps", weighted_mismatch));
  return v;
}

// ---------------------------------------------------------------- 2

namespace detail {

// Two non-terminal states. In A, action 0 ends the episode with reward 0 and
// action 1 moves to B with reward 0. Both actions in B end the episode with
// reward N(-0.1, 1). The learned Q(A, 1) carries each estimator's bias at B.
struct BiasMdp {
  static constexpr std::uint64_t A = 0, B = 1, End = 2;
  static constexpr double mean_b = -0.1;
};

inline double bias_trial(agents::TabularVariant variant, std::uint64_t seed, int steps) {
  constexpr double alpha = 0.1, gamma = 1.0, c = 0.1;
  agents::TabularQ q(variant, 2);
  Rng env = make_rng(derive_seed(seed, 0));
  Rng learner = make_rng(derive_seed(seed, 1));
  std::uint64_t s = BiasMdp::A;
  for (int k = 0; k < steps; ++k) {
    const int a = static_cast<int>(uniform_index(env, 2));
    agents::TabularTransition t;
    t.state = s;
    t.action = a;
    if (s == BiasMdp::A) {
      t.reward = 0.0;
      t.next_state = a == 1 ? BiasMdp::B : BiasMdp::End;
      t.terminal = a == 0;
    } else {
      t.reward = BiasMdp::mean_b + standard_normal(env);
      t.next_state = BiasMdp::End;
      t.terminal = true;
    }
    agents::tabular_update(q, t, alpha, gamma, c, learner);
    s = t.terminal ? BiasMdp::A : t.next_state;
  }
  return q.action_values(BiasMdp::A)[1];
}

// Lower end of a 95% percentile-bootstrap interval for mean(x - y).
inline double bootstrap_lower(const std::vector<double>& x, const std::vector<double>& y, Rng& rng) {
  const std::size_t n = x.size();
  std::vector<double> d(n), means;
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
  for (int b = 0; b < 2000; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += d[uniform_index(rng, n)];
    means.push_back(s / static_cast<double>(n));
  }
  std::sort(means.begin(), means.end());
  return means[static_cast<std::size_t>(0.025 * static_cast<double>(means.size()))];
}

}  // namespace detail

inline Verdict criterion_2() {
  using agents::TabularVariant;
  const int trials = 1000, steps = 10000;
  std::vector<double> single, weighted, dbl;
  for (int i = 0; i < trials; ++i) {
    const auto seed = derive_seed(202, static_cast<std::uint64_t>(i));
    single.push_back(detail::bias_trial(TabularVariant::Single, seed, steps));
    weighted.push_back(detail::bias_trial(TabularVariant::Weighted, seed, steps));
    dbl.push_back(detail::bias_trial(TabularVariant::Double, seed, steps));
  }
  const auto mean = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double e : x) s += e;
    return s / static_cast<double>(x.size());
  };
  Rng rng = make_rng(203);
  const double lo_sw = detail::bootstrap_lower(single, weighted, rng);
  const double lo_wd = detail::bootstrap_lower(weighted, dbl, rng);
  Verdict v;
  v.require(true, fmt("means single %.4f weighted %.4f double %.4f (true %.1f)", mean(single), mean(weighted),
                      mean(dbl), detail::BiasMdp::mean_b));
  v.require(lo_sw > 0.0, fmt("single-weighted 95%% lower %.4f", lo_sw));
  v.require(lo_wd > 0.0, fmt("weighted-double 95%% lower %.4f", lo_wd));
  return v;
}

// ---------------------------------------------------------------- 3

inline Verdict criterion_3() {
  Verdict v;
  const agents::AgentConfig defaults;
  const int pac_in = static_cast<int>(pacman::observation_size(pacman::Config::with_size(5)));
  const int pred_in = static_cast<int>(predator::observation_size(predator::Config::deterministic()));
  Rng rng = make_rng(303);
  double worst = 0.0;
  for (int in : {pac_in, pred_in}) {
    for (const auto& hidden : {defaults.q_hidden, defaults.lrn_hidden}) {
      std::vector<int> sizes{in};
      sizes.insert(sizes.end(), hidden.begin(), hidden.end());
      sizes.push_back(kNumActions);
      const auto net = nn::net_init<double>(sizes, rng);
      for (int trial = 0; trial < 3; ++trial) {
        std::vector<double> x(static_cast<std::size_t>(in));
        for (auto& e : x) e = standard_normal(rng);
        const int a = static_cast<int>(uniform_index(rng, kNumActions));
        worst = std::max(worst, nn::finite_diff_check<double>(net, x, a, 3.0 * standard_normal(rng), 1e-4));
      }
    }
  }
  v.require(worst < 1e-4, fmt("default architectures max rel err %.3g", worst));

  const auto linear = nn::net_init<double>({7, 4}, rng);
  std::vector<double> x(7);
  for (auto& e : x) e = standard_normal(rng);
  const double lin = nn::finite_diff_check<double>(linear, x, 2, 1.5, 1e-5);
  v.require(lin < 1e-6, fmt("linear max rel err %.3g", lin));
  return v;
}

// ---------------------------------------------------------------- 4

inline Verdict criterion_4() {
  using namespace replay;
  Verdict v;
  {
    SumTreeMemory<int> mem(1000);
    Rng rng = make_rng(404);
    std::vector<Handle> handles;
    std::vector<double> mirror(1000, 0.0);
    for (int step = 0; step < 100000; ++step) {
      if (handles.empty() || uniform01(rng) < 0.3) {
        const double p = 0.01 + 10.0 * uniform01(rng);
        const Handle h = mem.push(step, p);
        mirror[h.slot] = p;
        handles.push_back(h);
      } else {
        const Handle h = handles[uniform_index(rng, handles.size())];
        if (!mem.valid(h)) continue;
        const double td = 20.0 * (uniform01(rng) - 0.5);
        mem.update_priority(h, td);
        mirror[h.slot] = std::abs(td) + kPriorityFloor;
      }
    }
    double oracle = 0.0;
    for (double p : mirror) oracle += p;
    const double drift = std::max(std::abs(mem.total_priority() - mem.leaf_sum()), std::abs(mem.total_priority() - oracle));
    v.require(drift <= 1e-9, fmt("root vs leaf sum drift %.3g", drift));
  }
  {
    SumTreeMemory<int> mem(2);
    mem.push(0, 1.0);
    const Handle second = mem.push(1, 3.0);
    Rng rng = make_rng(405);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) hits += mem.sample(1, rng).handles[0].slot == second.slot;
    const double f = hits / 10000.0;
    v.require(std::abs(f - 0.75) <= 0.02, fmt("priority-3 share %.4f", f));
  }
  {
    const auto w = schedule_weights(3, PrioritySchedule{0.2, 1.1, 10.0});
    const double expect[3] = {1.2214, 1.2461, 1.2740};
    double err = 0.0;
    for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(w[static_cast<std::size_t>(i)] - expect[i]));
    v.require(err <= 1e-3, fmt("schedule [%.4f %.4f %.4f]", w[0], w[1], w[2]));
    const auto long_w = schedule_weights(10000, PrioritySchedule{});
    bool ok = true;
    for (std::size_t i = 0; i < long_w.size(); ++i) {
      ok = ok && std::isfinite(long_w[i]) && long_w[i] <= 10.0 + 1e-12;
      if (i > 0) ok = ok && long_w[i] >= long_w[i - 1];
    }
    v.require(ok && long_w.back() == 10.0, fmt("n=10000 monotone, clamped at %.4g", long_w.back()));
  }
  return v;
}

// ---------------------------------------------------------------- 5

inline Verdict criterion_5() {
  using namespace lenient;
  Verdict v;
  const double l = leniency(1.0, 2.0);
  v.require(std::abs(l - 0.8647) <= 1e-4, fmt("leniency(1; K=2) = %.6f", l));

  TemperatureTable table(2, 1.0);
  table.set(9, 0, 0.25);
  table.set(9, 1, 0.75);
  const double t = table.decay(1, 0, 9, false, LeniencyParams{});
  v.require(std::abs(t - 0.665) <= 1e-9, fmt("non-terminal decay = %.12f", t));

  Rng rng = make_rng(505);
  int applied = 0;
  for (int i = 0; i < 10000; ++i) applied += lenient_q_gate(-1.0, 0.9, uniform01(rng));
  const double f = applied / 10000.0;
  v.require(std::abs(f - 0.10) <= 0.01, fmt("negative acceptance at l=0.9: %.4f", f));
  return v;
}

// ---------------------------------------------------------------- 6

inline Verdict criterion_6() {
  using namespace lenient;
  Verdict v;
  {
    const agents::AgentConfig defaults;
    const auto env = pacman::Config::with_size(5);
    Rng rng = make_rng(606);
    Rng env_rng = make_rng(607);
    pacman::State s = pacman::reset(env, env_rng);
    const auto enc = pacman::encode_observation(s, env);
    const auto key = pacman::state_key(s, env);
    LenientRewardNet lrn(static_cast<int>(enc.size()), defaults.lrn_hidden, kNumActions, defaults.lr, rng);
    LeniencyParams off;
    off.max_temperature = 0.0;
    TemperatureTable temps(kNumActions, off.max_temperature);
    RewardStats stats(kNumActions);
    const int action = 1;
    int converged_at = -1;
    // Balanced stream: each consecutive pair holds one -30 and one +40 in random order.
    bool low_first = false;
    for (int i = 1; i <= 5000; ++i) {
      if (i % 2 == 1) low_first = coin_flip(env_rng);
      stats.record(key, action, (i % 2 == 1) == low_first ? -30.0 : 40.0);
      std::vector<RewardQuery> q{{key, enc, action}};
      lrn.update(q, stats, temps, off, rng);
      if (converged_at < 0 && std::abs(lrn.predict(enc, action) - 5.0) <= 0.5) converged_at = i;
    }
    const double p = lrn.predict(enc, action);
    v.require(std::abs(p - 5.0) <= 0.5, fmt("LRN prediction %.4f after 5000 updates (first within 0.5 at %d, mean %.3f)",
                                            p, converged_at, stats.mean(key, action)));
  }
  {
    RewardStats stats(4);
    const auto sto = predator::Config::stochastic();
    Rng rng = make_rng(608);
    for (int i = 0; i < 10000; ++i) stats.record(0, 0, sto.reward_s.sample(rng));
    v.require(std::abs(stats.mean(0, 0) - 46.0) <= 1.0, fmt("RewardStats mean %.4f", stats.mean(0, 0)));
  }
  return v;
}

// ---------------------------------------------------------------- 7-9

inline constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

inline harness::RunResult timed_run(const harness::ExperimentConfig& cfg, std::uint64_t seed) {
  auto r = harness::run(cfg, seed);
  progress(fmt("%s %s seed %llu: %.1fs", cfg.env_signature().c_str(), cfg.agent_kind.c_str(),
               static_cast<unsigned long long>(seed), r.summary.wall_clock_seconds));
  return r;
}

inline harness::ExperimentConfig pacman_config(const std::string& kind) {
  harness::ExperimentConfig c;
  c.env = harness::EnvKind::Pacman;
  c.pacman = pacman::Config::with_size(5);
  c.agent_kind = kind;
  return c;
}

inline harness::ExperimentConfig predator_config(const std::string& kind, bool stochastic) {
  harness::ExperimentConfig c;
  c.env = harness::EnvKind::Predator;
  c.predator = stochastic ? predator::Config::stochastic() : predator::Config::deterministic();
  c.predator_rewards = stochastic ? "stochastic" : "deterministic";
  c.agent_kind = kind;
  return c;
}

inline Verdict criterion_7() {
  Verdict v;
  int wins = 0, reached = 0;
  bool counts_ok = true;
  std::string per_seed;
  for (auto seed : kSeeds) {
    const auto w = timed_run(pacman_config("wddqn"), seed);
    const auto d = timed_run(pacman_config("ddqn"), seed);
    counts_ok = counts_ok && w.episodes.size() == 2500 && d.episodes.size() == 2500;
    const double wt = harness::tail_mean(w.ratios(), 500);
    const double dt = harness::tail_mean(d.ratios(), 500);
    double best = 0.0;
    for (const auto& win : w.summary.ratio_windows) best = std::max(best, win.mean);
    wins += wt > dt;
    reached += best >= 0.8;
    per_seed += fmt(" s%llu:%.3f/%.3f/%.2f", static_cast<unsigned long long>(seed), wt, dt, best);
  }
  v.require(counts_ok, "2500 records per run");
  v.require(wins >= 4, fmt("WDDQN > DDQN final-500 ratio in %d/5 seeds", wins));
  v.require(reached == 5, fmt("WDDQN 50-episode ratio >= 0.8 in %d/5 seeds", reached));
  v.require(true, "wddqn/ddqn/best-window:" + per_seed);
  return v;
}

inline Verdict criterion_8() {
  Verdict v;
  int full_ok = 0, ablation_short = 0;
  std::string per_seed;
  for (auto seed : kSeeds) {
    const auto w = timed_run(predator_config("wddqn", false), seed);
    const auto a = timed_run(predator_config("wddqn-no-lrn-srs", false), seed);
    const double wt = harness::tail_mean(w.rewards(), 250);
    const double at = harness::tail_mean(a.rewards(), 250);
    full_ok += wt >= 70.0;
    ablation_short += at < 70.0;
    per_seed += fmt(" s%llu:%.2f/%.2f", static_cast<unsigned long long>(seed), wt, at);
  }
  v.require(full_ok >= 4, fmt("WDDQN final-250 >= 70 in %d/5 seeds", full_ok));
  v.require(ablation_short >= 3, fmt("no-LRN/SRS below 70 in %d/5 seeds", ablation_short));
  v.require(true, "wddqn/no-lrn-srs:" + per_seed);
  return v;
}

inline Verdict criterion_9() {
  Verdict v;
  int above = 0;
  double sum_w = 0, sum_l = 0, sum_d = 0;
  std::string per_seed;
  const auto final_window = [](const harness::RunResult& r) { return r.summary.final_window_mean_reward; };
  for (auto seed : kSeeds) {
    const double w = final_window(timed_run(predator_config("wddqn", true), seed));
    const double l = final_window(timed_run(predator_config("lenient", true), seed));
    const double d = final_window(timed_run(predator_config("ddqn", true), seed));
    above += w > 46.0;
    sum_w += w;
    sum_l += l;
    sum_d += d;
    per_seed += fmt(" s%llu:%.2f/%.2f/%.2f", static_cast<unsigned long long>(seed), w, l, d);
  }
  const double n = std::size(kSeeds);
  v.require(above >= 4, fmt("WDDQN final window > 46 in %d/5 seeds", above));
  v.require(sum_w > sum_l, fmt("WDDQN mean %.2f > lenient mean %.2f", sum_w / n, sum_l / n));
  v.require(sum_d < sum_w && sum_d < sum_l, fmt("DDQN mean %.2f below both", sum_d / n));
  v.require(true, "wddqn/lenient/ddqn:" + per_seed);
  return v;
}

// ---------------------------------------------------------------- 10

inline Verdict criterion_10() {
  namespace fs = std::filesystem;
  Verdict v;
  const fs::path root = fs::temp_directory_path() / ("wddqn_acceptance_det_" + std::to_string(::getpid()));
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::vector<harness::ExperimentConfig> cfgs{pacman_config("wddqn"), predator_config("wddqn", true),
                                              predator_config("lenient", false), pacman_config("tabular-weighted")};
  int identical = 0;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    cfgs[i].max_episodes = 150;
    const auto dir = root / std::to_string(i);
    harness::run_to_dir(cfgs[i], 77, dir / "a");
    harness::run_to_dir(cfgs[i], 77, dir / "b");
    bool same = true;
    for (const char* f : {"episodes.csv", "summary.csv", "config.txt"})
      same = same && slurp(dir / "a" / f) == slurp(dir / "b" / f) && !slurp(dir / "a" / f).empty();
    identical += same;
  }
  fs::remove_all(root);
  v.require(identical == static_cast<int>(cfgs.size()),
            fmt("%d/%zu configurations byte-identical on rerun", identical, cfgs.size()));
  return v;
}

inline const std::vector<Criterion>& all_criteria() {
  static const std::vector<Criterion> list{
      {1, "tabular oracle equivalence", false, criterion_1},
      {2, "estimator bias ordering", false, criterion_2},
      {3, "gradient correctness", false, criterion_3},
      {4, "sum tree and SRS", false, criterion_4},
      {5, "leniency numerics", false, criterion_5},
      {6, "LRN convergence", false, criterion_6},
      {7, "pacman WDDQN vs DDQN", true, criterion_7},
      {8, "deterministic predator", true, criterion_8},
      {9, "stochastic predator", true, criterion_9},
      {10, "determinism", false, criterion_10},
  };
  return list;
}

/// Run the selected criteria, one PASS/FAIL line each. Returns the failure count.
inline int run_criteria(const std::vector<int>& ids, std::ostream& out) {
  int failed = 0;
  for (const auto& c : all_criteria()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += !v.pass;
    out << "criterion " << c.id << " (" << c.title << "): " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail
        << std::endl;
  }
  return failed;
}

}  // namespace wddqn::acceptance
