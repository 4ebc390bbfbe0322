#pragma once

#include <cstdint>
#include <vector>

#include "covsched/local_filter.hpp"
#include "covsched/model.hpp"

namespace covsched {

// Action encoding used throughout: 0 = no transmission, m in 1..M = sensor m
// transmits. At most one sensor transmits per step.
inline constexpr int kNoTransmit = 0;

/// One element of the covariance state space: the matrix f^hops(Pbar_m)
/// reached after `hops` consecutive non-receptions since the last packet
/// from sensor `sensor` (0-based).
struct CovState {
  int sensor = 0;
  int hops = 0;
  Matrix matrix;
  double trace = 0.0;
};

/// The truncated state space S^N: per sensor the chain Pbar_m, f(Pbar_m),
/// ..., f^{N-1}(Pbar_m), plus the pairwise PSD comparability table.
/// Immutable after construction.
class StateSpace {
 public:
  enum class Order : std::uint8_t { Equal, LessEq, GreaterEq, Incomparable };

  StateSpace(SystemModel model, std::vector<SensorModel> sensors,
             std::vector<SteadyStateFilter> filters, int N);

  const SystemModel& model() const { return model_; }
  const std::vector<SensorModel>& sensors() const { return sensors_; }
  const std::vector<SteadyStateFilter>& filters() const { return filters_; }
  int sensor_count() const { return static_cast<int>(sensors_.size()); }
  int depth() const { return N_; }
  int size() const { return static_cast<int>(states_.size()); }

  int index(int sensor, int hops) const { return sensor * N_ + hops; }
  const CovState& at(int idx) const { return states_[idx]; }

  // Successor under a non-reception; hops clamp at N-1 (absorbing tail).
  int f_successor(int idx, bool* truncated = nullptr) const;
  // Successor under a successful reception from `sensor`.
  int reset_state(int sensor) const { return index(sensor, 0); }

  // Trace of f(matrix) using the true matrix, also at the clamped boundary.
  double trace_f(int idx) const { return trace_f_[idx]; }

  Order order(int i, int j) const { return order_[i * size() + j]; }
  bool comparable(int i, int j) const { return order(i, j) != Order::Incomparable; }
  // matrix(i) <= matrix(j) in PSD order (Equal counts).
  bool leq(int i, int j) const {
    Order o = order(i, j);
    return o == Order::LessEq || o == Order::Equal;
  }
  bool totally_ordered() const { return totally_ordered_; }
  // State indices sorted so that leq(chain[i], chain[j]) for i < j.
  // Meaningful only when totally_ordered().
  std::vector<int> sorted_chain() const;

 private:
  SystemModel model_;
  std::vector<SensorModel> sensors_;
  std::vector<SteadyStateFilter> filters_;
  int N_;
  std::vector<CovState> states_;
  std::vector<double> trace_f_;
  std::vector<Order> order_;
  bool totally_ordered_ = false;
};

/// Enumerates f^n(Pbar_m) for n = 0..N-1 per sensor and fills the PSD
/// comparability table (eigenvalue slack -1e-8).
StateSpace build_state_space(const SystemModel& model,
                             const std::vector<SensorModel>& sensors, int N);

/// MDP transition: a successful reception from sensor m resets to (m, 0);
/// anything else advances the hop count, clamped at N-1 with the truncation
/// flag set.
int transition(const StateSpace& space, int state_idx, int action, bool success,
               bool* truncated = nullptr);

}  // namespace covsched
