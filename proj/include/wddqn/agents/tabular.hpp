#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "wddqn/agents/estimators.hpp"
#include "wddqn/core/error.hpp"
#include "wddqn/core/random.hpp"

namespace wddqn::agents {

struct TabularTransition {
  std::uint64_t state = 0;
  int action = 0;
  double reward = 0.0;
  std::uint64_t next_state = 0;
  bool terminal = false;
};

/// Sparse table of action values; unseen entries read 0.
class QTable {
 public:
  explicit QTable(int num_actions = 4) : num_actions_(num_actions) {}

  int num_actions() const { return num_actions_; }

  double get(std::uint64_t s, int a) const {
    const auto it = rows_.find(s);
    return it == rows_.end() ? 0.0 : it->second[static_cast<std::size_t>(a)];
  }

  void set(std::uint64_t s, int a, double v) { row_mut(s)[static_cast<std::size_t>(a)] = v; }

  /// Row copy, zeros when unseen.
  std::vector<double> row(std::uint64_t s) const {
    const auto it = rows_.find(s);
    return it == rows_.end() ? std::vector<double>(static_cast<std::size_t>(num_actions_), 0.0) : it->second;
  }

  double max(std::uint64_t s) const {
    const auto r = row(s);
    return r[static_cast<std::size_t>(estimators::argmax<double>(r))];
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [s, r] : rows_)
      for (int a = 0; a < num_actions_; ++a) fn(s, a, r[static_cast<std::size_t>(a)]);
  }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::vector<double>& row_mut(std::uint64_t s) {
    auto it = rows_.find(s);
    if (it == rows_.end()) it = rows_.emplace(s, std::vector<double>(static_cast<std::size_t>(num_actions_), 0.0)).first;
    return it->second;
  }

  int num_actions_;
  std::unordered_map<std::uint64_t, std::vector<double>> rows_;
};

enum class TabularVariant { Single, Double, Weighted };

/// Tabular learner. Single uses `u` only; Double and Weighted keep the pair
/// (u, v) and update one of them per step chosen by a fair coin.
struct TabularQ {
  TabularVariant variant = TabularVariant::Single;
  QTable u;
  QTable v;

  explicit TabularQ(TabularVariant kind = TabularVariant::Single, int num_actions = 4)
      : variant(kind), u(num_actions), v(num_actions) {}

  int num_actions() const { return u.num_actions(); }

  /// Value estimate used for acting: u for Single, (u + v) / 2 otherwise.
  std::vector<double> action_values(std::uint64_t s) const {
    auto r = u.row(s);
    if (variant != TabularVariant::Single) {
      const auto w = v.row(s);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.5 * (r[i] + w[i]);
    }
    return r;
  }
};

/// Bootstrap value of s' from `chooser`'s viewpoint, per variant. Single
/// ignores the evaluator.
inline double tabular_bootstrap(TabularVariant variant, const QTable& chooser, const QTable& evaluator,
                                std::uint64_t next_state, double c) {
  const auto cr = chooser.row(next_state);
  switch (variant) {
    case TabularVariant::Single:
      return cr[static_cast<std::size_t>(estimators::argmax<double>(cr))];
    case TabularVariant::Double: {
      const int a_star = estimators::argmax<double>(cr);
      return evaluator.get(next_state, a_star);
    }
    case TabularVariant::Weighted: {
      const auto er = evaluator.row(next_state);
      return estimators::weighted_bootstrap<double>(cr, er, c).value;
    }
  }
  return 0.0;
}

/// One tabular TD update. The coin flip happens only for the two-table variants.
inline void tabular_update(TabularQ& tq, const TabularTransition& t, double alpha, double gamma, double c,
                           Rng& rng) {
  QTable* chooser = &tq.u;
  QTable* evaluator = &tq.v;
  if (tq.variant != TabularVariant::Single && coin_flip(rng)) std::swap(chooser, evaluator);
  const double bootstrap =
      t.terminal ? 0.0 : tabular_bootstrap(tq.variant, *chooser, *evaluator, t.next_state, c);
  const double q = chooser->get(t.state, t.action);
  chooser->set(t.state, t.action, q + alpha * (t.reward + gamma * bootstrap - q));
}

}  // namespace wddqn::agents
