#include "covsched/state_space.hpp"

#include <algorithm>

#include "covsched/errors.hpp"

namespace covsched {

StateSpace::StateSpace(SystemModel model, std::vector<SensorModel> sensors,
                       std::vector<SteadyStateFilter> filters, int N)
    : model_(std::move(model)),
      sensors_(std::move(sensors)),
      filters_(std::move(filters)),
      N_(N) {
  const int M = static_cast<int>(sensors_.size());
  states_.reserve(static_cast<size_t>(M) * N_);
  for (int m = 0; m < M; ++m) {
    Matrix P = filters_[m].post_cov;
    for (int n = 0; n < N_; ++n) {
      states_.push_back(CovState{m, n, P, P.trace()});
      P = f_map(P, model_);
    }
  }
  trace_f_.resize(states_.size());
  for (size_t i = 0; i < states_.size(); ++i)
    trace_f_[i] = f_map(states_[i].matrix, model_).trace();

  const int S = size();
  order_.assign(static_cast<size_t>(S) * S, Order::Incomparable);
  totally_ordered_ = true;
  for (int i = 0; i < S; ++i) {
    order_[i * S + i] = Order::Equal;
    for (int j = i + 1; j < S; ++j) {
      const Matrix diff = states_[j].matrix - states_[i].matrix;
      const bool le = is_psd(diff);
      const bool ge = is_psd(-diff);
      Order o = Order::Incomparable;
      if (le && ge) o = Order::Equal;
      else if (le) o = Order::LessEq;       // i <= j
      else if (ge) o = Order::GreaterEq;    // i >= j
      order_[i * S + j] = o;
      order_[j * S + i] = o == Order::LessEq    ? Order::GreaterEq
                          : o == Order::GreaterEq ? Order::LessEq
                                                  : o;
      if (o == Order::Incomparable) totally_ordered_ = false;
    }
  }
}

int StateSpace::f_successor(int idx, bool* truncated) const {
  const CovState& s = states_[idx];
  if (s.hops + 1 >= N_) {
    if (truncated) *truncated = true;
    return idx;
  }
  if (truncated) *truncated = false;
  return index(s.sensor, s.hops + 1);
}

std::vector<int> StateSpace::sorted_chain() const {
  std::vector<int> chain(states_.size());
  for (size_t i = 0; i < chain.size(); ++i) chain[i] = static_cast<int>(i);
  std::stable_sort(chain.begin(), chain.end(), [this](int a, int b) {
    Order o = order(a, b);
    if (o == Order::LessEq) return true;
    if (o == Order::GreaterEq || o == Order::Equal) return false;
    return states_[a].trace < states_[b].trace;  // incomparable: trace fallback
  });
  return chain;
}

StateSpace build_state_space(const SystemModel& model,
                             const std::vector<SensorModel>& sensors, int N) {
  if (N < 1) throw ConfigError("build_state_space: N must be >= 1");
  if (sensors.empty()) throw ConfigError("build_state_space: need at least one sensor");
  std::vector<SteadyStateFilter> filters;
  filters.reserve(sensors.size());
  for (const auto& sensor : sensors) filters.push_back(dare_steady_state(model, sensor));
  return StateSpace(model, sensors, std::move(filters), N);
}

int transition(const StateSpace& space, int state_idx, int action, bool success,
               bool* truncated) {
  if (action != kNoTransmit && success) {
    if (truncated) *truncated = false;
    return space.reset_state(action - 1);
  }
  return space.f_successor(state_idx, truncated);
}

}  // namespace covsched
