#pragma once

#include "wddqn/agents/tabular.hpp"
#include "wddqn/core/random.hpp"
#include "wddqn/lenient/leniency.hpp"

namespace wddqn::lenient {

/// Lenient tabular Q-learning step: plain TD error on `q`, applied through the
/// leniency gate, then the pair's temperature is decayed.
/// Returns whether the update was applied.
inline bool lenient_q_update(agents::QTable& q, const agents::TabularTransition& t, TemperatureTable& table,
                             const LeniencyParams& params, double alpha, double gamma, Rng& rng) {
  const double bootstrap = t.terminal ? 0.0 : q.max(t.next_state);
  const double current = q.get(t.state, t.action);
  const double delta = t.reward + gamma * bootstrap - current;
  const double l = table.leniency_of(t.state, t.action, params.K);
  const double x = uniform01(rng);
  const bool apply = lenient_q_gate(delta, l, x, params.gate);
  if (apply) q.set(t.state, t.action, current + alpha * delta);
  table.decay(t.state, t.action, t.next_state, t.terminal, params);
  return apply;
}

}  // namespace wddqn::lenient
