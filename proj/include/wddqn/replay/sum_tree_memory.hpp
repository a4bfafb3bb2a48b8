#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "wddqn/core/error.hpp"
#include "wddqn/core/random.hpp"
#include "wddqn/replay/schedule.hpp"

namespace wddqn::replay {

class ReplayError : public Error {
 public:
  using Error::Error;
};

/// Identifies a stored item; `serial` detects slots overwritten since sampling.
struct Handle {
  std::size_t slot = 0;
  std::uint64_t serial = 0;

  friend bool operator==(const Handle&, const Handle&) = default;
};

struct SampleBatch {
  std::vector<Handle> handles;
  std::vector<double> probabilities;  // p_j / sum p at draw time
};

inline constexpr double kPriorityFloor = 1e-3;

/// Capacity-bounded FIFO store with proportional sampling via a sum-tree.
/// A parallel max-tree tracks p_max over the stored leaves.
template <typename Item>
class SumTreeMemory {
 public:
  explicit SumTreeMemory(std::size_t capacity = 8192) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay capacity must be >= 1");
    leaves_ = std::bit_ceil(capacity);
    sum_.assign(2 * leaves_, 0.0);
    max_.assign(2 * leaves_, 0.0);
    slots_.resize(capacity);
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  double total_priority() const { return sum_[1]; }

  /// Largest stored priority; 1 for an empty memory.
  double max_priority() const { return size_ == 0 ? 1.0 : max_[1]; }

  double priority(std::size_t slot) const { return sum_[leaves_ + slot]; }

  const Item& at(Handle h) const {
    check(h);
    return *slots_[h.slot].item;
  }

  bool valid(Handle h) const {
    return h.slot < capacity_ && slots_[h.slot].item.has_value() && slots_[h.slot].serial == h.serial;
  }

  /// Insert with an explicit priority (> 0), evicting the oldest item when full.
  Handle push(Item item, double priority) {
    if (!(priority > 0.0) || !std::isfinite(priority))
      throw ReplayError("insert priority must be positive and finite");
    const std::size_t slot = next_;
    next_ = (next_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
    auto& s = slots_[slot];
    s.item = std::move(item);
    s.serial = ++serial_counter_;
    set_leaf(slot, priority);
    return {slot, s.serial};
  }

  /// Scheduled insertion: item i gets p_max * w_i, with p_max read once before
  /// the first insert.
  void push_trajectory(std::span<const Item> episode, const PrioritySchedule& sched) {
    if (episode.empty()) throw ContractViolation("push_trajectory needs a non-empty episode");
    const double p_max = max_priority();
    const auto w = schedule_weights(episode.size(), sched);
    for (std::size_t i = 0; i < episode.size(); ++i) push(episode[i], p_max * w[i]);
  }

  /// Standard prioritized insertion: every item gets the current p_max.
  void push_trajectory_uniform(std::span<const Item> episode) {
    if (episode.empty()) throw ContractViolation("push_trajectory needs a non-empty episode");
    const double p_max = max_priority();
    for (const auto& item : episode) push(item, p_max);
  }

  /// Independent draws with replacement, leaf j chosen w.p. p_j / sum p.
  SampleBatch sample(std::size_t batch_size, Rng& rng) const {
    if (size_ < batch_size || size_ == 0)
      throw ReplayError("cannot sample " + std::to_string(batch_size) + " items from a memory of " +
                        std::to_string(size_));
    SampleBatch out;
    out.handles.reserve(batch_size);
    out.probabilities.reserve(batch_size);
    const double total = sum_[1];
    for (std::size_t k = 0; k < batch_size; ++k) {
      const std::size_t slot = find_prefix(uniform01(rng) * total);
      out.handles.push_back({slot, slots_[slot].serial});
      out.probabilities.push_back(sum_[leaves_ + slot] / total);
    }
    return out;
  }

  /// Priority becomes |td_error| + 1e-3.
  void update_priority(Handle h, double td_error) {
    check(h);
    if (!std::isfinite(td_error)) throw ReplayError("non-finite TD error");
    set_leaf(h.slot, std::abs(td_error) + kPriorityFloor);
  }

  void set_priority(Handle h, double priority) {
    check(h);
    if (!(priority > 0.0) || !std::isfinite(priority))
      throw ReplayError("priority must be positive and finite");
    set_leaf(h.slot, priority);
  }

  /// Recompute every internal node from the leaves.
  void rebuild() {
    for (std::size_t i = leaves_ - 1; i >= 1; --i) {
      sum_[i] = sum_[2 * i] + sum_[2 * i + 1];
      max_[i] = std::max(max_[2 * i], max_[2 * i + 1]);
    }
  }

  /// Plain left-to-right sum of leaf priorities.
  double leaf_sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i < capacity_; ++i) s += sum_[leaves_ + i];
    return s;
  }

  /// Largest |node - (left + right)| over internal nodes.
  double max_node_inconsistency() const {
    double worst = 0.0;
    for (std::size_t i = 1; i < leaves_; ++i)
      worst = std::max(worst, std::abs(sum_[i] - (sum_[2 * i] + sum_[2 * i + 1])));
    return worst;
  }

  void dump_csv(std::ostream& out) const {
    out << "slot,priority\n";
    for (std::size_t i = 0; i < capacity_; ++i)
      if (slots_[i].item) out << i << ',' << sum_[leaves_ + i] << '\n';
  }

  void clear() {
    std::fill(sum_.begin(), sum_.end(), 0.0);
    std::fill(max_.begin(), max_.end(), 0.0);
    for (auto& s : slots_) s.item.reset();
    size_ = 0;
    next_ = 0;
  }

 private:
  struct Slot {
    std::optional<Item> item;
    std::uint64_t serial = 0;
  };

  void check(Handle h) const {
    if (!valid(h)) throw ReplayError("stale or invalid replay handle");
  }

  void set_leaf(std::size_t slot, double p) {
    std::size_t i = leaves_ + slot;
    sum_[i] = p;
    max_[i] = p;
    for (i /= 2; i >= 1; i /= 2) {
      sum_[i] = sum_[2 * i] + sum_[2 * i + 1];
      max_[i] = std::max(max_[2 * i], max_[2 * i + 1]);
    }
  }

  std::size_t find_prefix(double mass) const {
    std::size_t i = 1;
    while (i < leaves_) {
      const double left = sum_[2 * i];
      const double right = sum_[2 * i + 1];
      if ((mass >= left && right > 0.0) || left <= 0.0) {
        mass -= left;
        i = 2 * i + 1;
      } else {
        i = 2 * i;
      }
    }
    return std::min(i - leaves_, capacity_ - 1);
  }

  std::size_t capacity_;
  std::size_t leaves_ = 1;
  std::vector<double> sum_;
  std::vector<double> max_;
  std::vector<Slot> slots_;
  std::size_t size_ = 0;
  std::size_t next_ = 0;
  std::uint64_t serial_counter_ = 0;
};

}  // namespace wddqn::replay
