#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "wddqn/core/error.hpp"
#include "wddqn/core/random.hpp"

// Bootstrap targets for the single, double and weighted double estimators.
// Rows are per-sample action values at the successor state.
namespace wddqn::estimators {

template <typename T>
int argmax(std::span<const T> row) {
  if (row.empty()) throw ContractViolation("argmax of an empty row");
  int best = 0;
  for (int a = 1; a < static_cast<int>(row.size()); ++a)
    if (row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(best)]) best = a;
  return best;
}

template <typename T>
int argmin(std::span<const T> row) {
  if (row.empty()) throw ContractViolation("argmin of an empty row");
  int best = 0;
  for (int a = 1; a < static_cast<int>(row.size()); ++a)
    if (row[static_cast<std::size_t>(a)] < row[static_cast<std::size_t>(best)]) best = a;
  return best;
}

/// Argmax with ties broken uniformly at random.
template <typename T>
int argmax_random_tie(std::span<const T> row, Rng& rng) {
  if (row.empty()) throw ContractViolation("argmax of an empty row");
  T best = row[0];
  int count = 0;
  int choice = 0;
  for (int a = 0; a < static_cast<int>(row.size()); ++a) {
    const T v = row[static_cast<std::size_t>(a)];
    if (v > best) {
      best = v;
      count = 1;
      choice = a;
    } else if (v == best) {
      // Reservoir sampling over the tied set.
      ++count;
      if (uniform_index(rng, static_cast<std::uint64_t>(count)) == 0) choice = a;
    }
  }
  return choice;
}

/// beta = D / (c + D), D = |evaluator[a_star] - evaluator[a_low]|. beta lies in [0, 1).
template <typename T>
double compute_beta(std::span<const T> evaluator_row, int a_star, int a_low, double c) {
  if (!(c > 0.0)) throw ContractViolation("beta constant c must be > 0");
  const double spread = std::abs(static_cast<double>(evaluator_row[static_cast<std::size_t>(a_star)]) -
                                 static_cast<double>(evaluator_row[static_cast<std::size_t>(a_low)]));
  return spread / (c + spread);
}

/// Single-row form: a_low is the row's own argmin.
template <typename T>
double compute_beta(std::span<const T> row, int a_star, double c) {
  return compute_beta(row, a_star, argmin(row), c);
}

/// beta * chooser(s', a*) + (1 - beta) * evaluator(s', a*) with a* and a_low the
/// chooser's argmax and argmin; the spread for beta is read off the evaluator.
struct WeightedBootstrap {
  int a_star = 0;
  double beta = 0.0;
  double value = 0.0;
};

template <typename T>
WeightedBootstrap weighted_bootstrap(std::span<const T> chooser_row, std::span<const T> evaluator_row,
                                     double c, const double* forced_beta = nullptr) {
  if (chooser_row.size() != evaluator_row.size())
    throw ContractViolation("chooser and evaluator rows differ in length");
  WeightedBootstrap w;
  w.a_star = argmax(chooser_row);
  w.beta = forced_beta ? *forced_beta : compute_beta(evaluator_row, w.a_star, argmin(chooser_row), c);
  const auto i = static_cast<std::size_t>(w.a_star);
  // Written as e + beta (c - e) so equal rows give exactly their max.
  const auto c_val = static_cast<double>(chooser_row[i]);
  const auto e_val = static_cast<double>(evaluator_row[i]);
  w.value = e_val + w.beta * (c_val - e_val);
  return w;
}

/// r + gamma * Q_target(s', argmax_a Q_online(s', a)); no bootstrap at terminals.
template <typename T>
double ddqn_target(double reward, bool terminal, std::span<const T> online_row,
                   std::span<const T> target_row, double gamma) {
  if (terminal) return reward;
  const int a = argmax(online_row);
  return reward + gamma * static_cast<double>(target_row[static_cast<std::size_t>(a)]);
}

/// r + gamma * max_a Q(s', a); no bootstrap at terminals.
template <typename T>
double dqn_target(double reward, bool terminal, std::span<const T> row, double gamma) {
  if (terminal) return reward;
  return reward + gamma * static_cast<double>(row[static_cast<std::size_t>(argmax(row))]);
}

}  // namespace wddqn::estimators
