#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "criteria.hpp"
#include "wddqn/harness/compare.hpp"
#include "wddqn/harness/config.hpp"
#include "wddqn/harness/runner.hpp"

namespace fs = std::filesystem;
using namespace wddqn;
using namespace wddqn::harness;

namespace {

void report(const ExperimentConfig& cfg, std::uint64_t seed, const RunResult& r, const fs::path& dir) {
  std::printf("%s seed %llu: %zu episodes, final window reward %.3f ratio %.3f, %.1fs -> %s\n",
              cfg.agent_kind.c_str(), static_cast<unsigned long long>(seed), r.episodes.size(),
              r.summary.final_window_mean_reward, r.summary.final_window_mean_ratio, r.summary.wall_clock_seconds,
              dir.string().c_str());
}

fs::path seed_dir(const fs::path& out, const ExperimentConfig& cfg, std::uint64_t seed) {
  return out / (cfg.env_name() + "_" + cfg.agent_kind + "_seed" + std::to_string(seed));
}

int cmd_run(const std::string& config, std::uint64_t seed, const std::string& out, bool verbose) {
  const auto cfg = load_config(config);
  const fs::path dir = out.empty() ? seed_dir(cfg.out_dir, cfg, seed) : fs::path(out);
  const auto on_episode = [&](const EpisodeRecord& e) {
    if (verbose && (e.episode + 1) % 50 == 0)
      std::fprintf(stderr, "episode %d reward %.2f steps %d eps %.3f\n", e.episode + 1, e.total_reward, e.steps,
                   e.epsilon);
  };
  const auto r = run_to_dir(cfg, seed, dir, on_episode);
  report(cfg, seed, r, dir);
  return 0;
}

// Runs are independent; each worker takes the next seed off a shared counter.
int cmd_sweep(const std::string& config, const std::string& seeds, const std::string& out, unsigned jobs) {
  const auto cfg = load_config(config);
  const auto list = seeds.empty() ? cfg.seeds : parse_seed_list(seeds);
  const fs::path root = out.empty() ? fs::path(cfg.out_dir) : fs::path(out);
  std::atomic<std::size_t> next{0};
  std::mutex io;
  std::vector<std::string> errors;
  const auto worker = [&] {
    for (std::size_t i = next++; i < list.size(); i = next++) {
      const auto dir = seed_dir(root, cfg, list[i]);
      try {
        const auto r = run_to_dir(cfg, list[i], dir);
        std::lock_guard lock(io);
        report(cfg, list[i], r, dir);
      } catch (const std::exception& e) {
        std::lock_guard lock(io);
        errors.push_back("seed " + std::to_string(list[i]) + ": " + e.what());
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(list.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) std::cerr << "error: " << e << '\n';
  return errors.empty() ? 0 : 1;
}

int cmd_compare(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<fs::path> dirs(inputs.begin(), inputs.end());
  if (out.empty() || out == "-") {
    compare(dirs, std::cout);
    return 0;
  }
  std::ofstream f(out);
  if (!f) throw Error("cannot write " + out);
  compare(dirs, f);
  return 0;
}

int cmd_check(bool full, const std::vector<int>& ids) {
  std::vector<int> selected = ids;
  if (selected.empty())
    for (const auto& c : acceptance::all_criteria())
      if (full || !c.slow) selected.push_back(c.id);
  return acceptance::run_criteria(selected, std::cout) == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WDDQN multiagent reinforcement learning experiments"};
  app.require_subcommand(1);

  std::string config, out, seeds;
  std::uint64_t seed = 1;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "Train one seeded run and write its CSVs");
  run->add_option("--config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--out", out, "Output directory (default: <train.out>/<env>_<agent>_seed<n>)");
  run->add_flag("-v,--verbose", verbose, "Print progress every 50 episodes");

  unsigned jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Run one config over several seeds");
  sweep->add_option("--config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--seeds", seeds, "Comma-separated seeds (default: train.seeds)");
  sweep->add_option("--out", out, "Root output directory (default: train.out)");
  sweep->add_option("-j,--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  std::vector<std::string> inputs;
  auto* cmp = app.add_subcommand("compare", "Merge run directories into one plot-ready CSV");
  cmp->add_option("--inputs", inputs, "Run directories")->required()->expected(1, -1);
  cmp->add_option("--out", out, "Output CSV (default: stdout)");

  bool full = false;
  std::vector<int> ids;
  auto* check = app.add_subcommand("check", "Run the invariant and oracle acceptance checks");
  check->add_flag("--full", full, "Include the long training-run criteria");
  check->add_option("--criteria", ids, "Only these criterion ids");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, seed, out, verbose);
    if (*sweep) return cmd_sweep(config, seeds, out, jobs);
    if (*cmp) return cmd_compare(inputs, out);
    if (*check) return cmd_check(full, ids);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
