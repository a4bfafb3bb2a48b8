#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "wddqn/agents/agent.hpp"
#include "wddqn/agents/checkpoint_io.hpp"
#include "wddqn/agents/estimators.hpp"
#include "wddqn/agents/tabular.hpp"
#include "wddqn/lenient/lenient_q.hpp"

namespace wddqn::agents {

/// Online tabular learner keyed by the discrete state; learns inside observe().
class TabularAgent final : public Agent {
 public:
  TabularAgent(TabularVariant variant, bool lenient, int num_actions, AgentConfig config,
               lenient::LeniencyParams leniency, std::uint64_t seed)
      : q_(variant, num_actions),
        lenient_(lenient),
        config_(std::move(config)),
        leniency_(leniency),
        temperatures_(num_actions, leniency.max_temperature),
        rng_(make_rng(seed)) {
    config_.validate();
    leniency_.validate();
    if (lenient_ && variant != TabularVariant::Single)
      throw ConfigError("lenient tabular learning uses the single estimator");
  }

  std::string kind() const override {
    if (lenient_) return "tabular-lenient";
    switch (q_.variant) {
      case TabularVariant::Single: return "tabular-q";
      case TabularVariant::Double: return "tabular-double";
      case TabularVariant::Weighted: return "tabular-weighted";
    }
    return "tabular-q";
  }

  int select_action(std::span<const float>, std::uint64_t state_key, double epsilon) override {
    const int n = q_.num_actions();
    if (uniform01(rng_) < epsilon) return static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(n)));
    const auto values = q_.action_values(state_key);
    return estimators::argmax_random_tie<double>(values, rng_);
  }

  void observe(const Transition& t) override {
    const TabularTransition tt{t.state_key, t.action, t.reward, t.next_state_key, t.terminal};
    if (lenient_)
      lenient::lenient_q_update(q_.u, tt, temperatures_, leniency_, config_.tabular_alpha, config_.gamma, rng_);
    else
      tabular_update(q_, tt, config_.tabular_alpha, config_.gamma, config_.c, rng_);
  }

  LearnMetrics learn() override { return {}; }
  void end_episode() override {}

  void save_checkpoint(const std::filesystem::path& dir) const override {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "q_table.csv");
    if (!out) throw Error("cannot write " + (dir / "q_table.csv").string());
    out.precision(17);
    out << "table,state_key,action,value\n";
    q_.u.for_each([&](std::uint64_t s, int a, double v) { out << "u," << s << ',' << a << ',' << v << '\n'; });
    q_.v.for_each([&](std::uint64_t s, int a, double v) { out << "v," << s << ',' << a << ',' << v << '\n'; });
    if (lenient_) io::save_temperatures(temperatures_, dir / "temperatures.csv");
  }

  void load_checkpoint(const std::filesystem::path& dir) override {
    std::ifstream in(dir / "q_table.csv");
    if (!in) throw Error("cannot open " + (dir / "q_table.csv").string());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.size() < 2) continue;
      std::istringstream row(line.substr(2));
      std::uint64_t s = 0;
      int a = 0;
      double v = 0.0;
      char comma = 0;
      if (!(row >> s >> comma >> a >> comma >> v)) throw Error("malformed q_table row: " + line);
      (line[0] == 'u' ? q_.u : q_.v).set(s, a, v);
    }
    if (lenient_) io::load_temperatures(temperatures_, dir / "temperatures.csv");
  }

  const TabularQ& table() const { return q_; }

 private:
  TabularQ q_;
  bool lenient_;
  AgentConfig config_;
  lenient::LeniencyParams leniency_;
  lenient::TemperatureTable temperatures_;
  Rng rng_;
};

}  // namespace wddqn::agents
