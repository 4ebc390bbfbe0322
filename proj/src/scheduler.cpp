#include "covsched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "covsched/errors.hpp"

namespace covsched {

namespace {

// Precomputed stage data for the estimate-transmission MDP on S^N.
struct Stage {
  int S = 0;
  int M = 0;
  std::vector<double> tr_f;     // tr f(P~) with the true matrix
  std::vector<int> f_succ;      // clamped f successor
  std::vector<int> reset;       // per sensor
  std::vector<double> tr_bar;   // tr Pbar_m
  std::vector<double> lambda;
  std::vector<double> energy;

  explicit Stage(const StateSpace& space) {
    S = space.size();
    M = space.sensor_count();
    tr_f.resize(S);
    f_succ.resize(S);
    for (int s = 0; s < S; ++s) {
      tr_f[s] = space.trace_f(s);
      f_succ[s] = space.f_successor(s);
    }
    for (int m = 0; m < M; ++m) {
      reset.push_back(space.reset_state(m));
      tr_bar.push_back(space.at(space.reset_state(m)).trace);
      lambda.push_back(space.sensors()[m].lambda);
      energy.push_back(space.sensors()[m].energy_cost);
    }
  }

  double stage_cost(int s, int a, double beta) const {
    if (a == kNoTransmit) return beta * tr_f[s];
    const int m = a - 1;
    return beta * (lambda[m] * tr_bar[m] + (1.0 - lambda[m]) * tr_f[s]) +
           (1.0 - beta) * energy[m];
  }

  double cost(int s, int a, const std::vector<double>& next, double beta) const {
    if (a == kNoTransmit) return stage_cost(s, a, beta) + next[f_succ[s]];
    const int m = a - 1;
    return stage_cost(s, a, beta) + lambda[m] * next[reset[m]] +
           (1.0 - lambda[m]) * next[f_succ[s]];
  }

  // Minimization over V with the tie-break: e_0 first, then lowest sensor.
  std::pair<double, int> best(int s, const std::vector<double>& next, double beta) const {
    double bv = cost(s, kNoTransmit, next, beta);
    int ba = kNoTransmit;
    for (int m = 1; m <= M; ++m) {
      const double c = cost(s, m, next, beta);
      if (c < bv) {
        bv = c;
        ba = m;
      }
    }
    return {bv, ba};
  }
};

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw ConfigError("beta must lie in (0,1)");
}

void check_infinite_preconditions(const StateSpace& space) {
  const double bound = stability_bound(space.model());
  if (bound <= 0.0) return;  // stable A
  for (const auto& sensor : space.sensors())
    if (sensor.lambda > bound) return;
  std::ostringstream msg;
  msg << "infinite horizon: no sensor exceeds the stability bound " << bound
      << " (lambda > 1 - 1/rho(A)^2 required for at least one sensor)";
  throw PreconditionError(msg.str());
}

// Stationary mass at the clamped tail of the chain induced by a stationary
// policy, by damped power iteration ((I+P)/2 has the same stationary
// distribution and is aperiodic).
double stationary_boundary_mass(const StateSpace& space, const Stage& st,
                                const std::vector<int>& action) {
  const int S = st.S;
  std::vector<double> pi(S, 1.0 / S), next(S);
  for (int it = 0; it < 200000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      const int a = action[s];
      if (a == kNoTransmit) {
        next[st.f_succ[s]] += pi[s];
      } else {
        const double lam = st.lambda[a - 1];
        next[st.reset[a - 1]] += lam * pi[s];
        next[st.f_succ[s]] += (1.0 - lam) * pi[s];
      }
    }
    double delta = 0.0;
    for (int s = 0; s < S; ++s) {
      next[s] = 0.5 * (next[s] + pi[s]);
      delta = std::max(delta, std::abs(next[s] - pi[s]));
    }
    pi.swap(next);
    if (delta < 1e-13) break;
  }
  double mass = 0.0;
  for (int s = 0; s < S; ++s)
    if (space.at(s).hops == space.depth() - 1) mass += pi[s];
  return mass;
}

}  // namespace

FiniteSolution solve_finite_horizon(const StateSpace& space, double beta, int K) {
  check_beta(beta);
  if (K < 1) throw ConfigError("solve_finite_horizon: K must be >= 1");
  const Stage st(space);
  FiniteSolution sol;
  sol.policy.horizon = K;
  sol.policy.action.assign(K, std::vector<int>(st.S, kNoTransmit));
  sol.values.assign(K + 1, std::vector<double>(st.S, 0.0));
  for (int k = K; k >= 1; --k) {
    for (int s = 0; s < st.S; ++s) {
      auto [v, a] = st.best(s, sol.values[k], beta);
      sol.values[k - 1][s] = v;
      sol.policy.action[k - 1][s] = a;
    }
  }
  return sol;
}

RviSolution solve_infinite_horizon(const StateSpace& space, double beta, double epsilon,
                                   long max_iterations) {
  check_beta(beta);
  check_infinite_preconditions(space);
  const Stage st(space);
  const int ref = space.reset_state(0);

  RviSolution sol;
  std::vector<double> h(st.S, 0.0), v(st.S, 0.0);
  std::vector<int> action(st.S, kNoTransmit);
  bool converged = false;
  for (long l = 0; l < max_iterations; ++l) {
    for (int s = 0; s < st.S; ++s) {
      auto [val, a] = st.best(s, h, beta);
      v[s] = val;
      action[s] = a;
    }
    const double rho = v[ref];
    double delta = 0.0;
    for (int s = 0; s < st.S; ++s) {
      const double hn = v[s] - rho;
      delta = std::max(delta, std::abs(hn - h[s]));
      h[s] = hn;
    }
    sol.rho = rho;
    sol.rho_history.push_back(rho);
    if (sol.rho_history.size() > 10) sol.rho_history.erase(sol.rho_history.begin());
    sol.iterations = l + 1;
    if (delta < epsilon) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "relative value iteration did not converge within " << max_iterations
        << " iterations (rho trail:";
    for (double r : sol.rho_history) msg << " " << r;
    msg << ")";
    throw PreconditionError(msg.str());
  }

  // Bellman residual under the computed (rho, h).
  double residual = 0.0;
  for (int s = 0; s < st.S; ++s) {
    auto [val, a] = st.best(s, h, beta);
    residual = std::max(residual, std::abs(val - sol.rho - h[s]));
    action[s] = a;
  }
  sol.bellman_residual = residual;
  sol.h = h;
  sol.policy.action = action;
  sol.boundary_mass = stationary_boundary_mass(space, st, action);
  return sol;
}

double evaluate_finite_policy(const StateSpace& space, const FinitePolicy& policy,
                              double beta, int initial_state) {
  const Stage st(space);
  std::vector<double> dist(st.S, 0.0);
  dist[initial_state] = 1.0;
  double total = 0.0;
  for (int k = 1; k <= policy.horizon; ++k) {
    std::vector<double> next_dist(st.S, 0.0);
    for (int s = 0; s < st.S; ++s) {
      const double p = dist[s];
      if (p == 0.0) continue;
      const int a = policy.action[k - 1][s];
      if (a == kNoTransmit) {
        total += p * beta * st.tr_f[s];
        next_dist[st.f_succ[s]] += p;
      } else {
        const int m = a - 1;
        total += p * (beta * (st.lambda[m] * st.tr_bar[m] +
                              (1.0 - st.lambda[m]) * st.tr_f[s]) +
                      (1.0 - beta) * st.energy[m]);
        next_dist[st.reset[m]] += p * st.lambda[m];
        next_dist[st.f_succ[s]] += p * (1.0 - st.lambda[m]);
      }
    }
    dist.swap(next_dist);
  }
  return total;
}

BruteForceResult brute_force_policy_oracle(const StateSpace& space, double beta, int K,
                                           int initial_state, std::size_t guard) {
  check_beta(beta);
  const Stage st(space);
  const int S = st.S;

  // Reachable states per stage, ignoring the action choice.
  std::vector<std::vector<int>> reach(K);
  std::vector<char> cur(S, 0), nxt(S, 0);
  cur[initial_state] = 1;
  for (int k = 0; k < K; ++k) {
    for (int s = 0; s < S; ++s)
      if (cur[s]) reach[k].push_back(s);
    std::fill(nxt.begin(), nxt.end(), 0);
    for (int s : reach[k]) {
      nxt[st.f_succ[s]] = 1;
      for (int m = 0; m < st.M; ++m) nxt[st.reset[m]] = 1;
    }
    cur.swap(nxt);
  }

  std::size_t points = 0;
  for (const auto& r : reach) points += r.size();
  const double count = std::pow(static_cast<double>(st.M + 1), static_cast<double>(points));
  if (count > static_cast<double>(guard)) {
    std::ostringstream msg;
    msg << "brute_force_policy_oracle: " << count << " policies exceed the guard of "
        << guard;
    throw ConfigError(msg.str());
  }

  FinitePolicy policy;
  policy.horizon = K;
  policy.action.assign(K, std::vector<int>(S, -1));

  std::vector<int> digits(points, 0);
  BruteForceResult best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<double> dist(S), next_dist(S);
  while (true) {
    // Install the candidate policy on the reachable pairs.
    std::size_t d = 0;
    for (int k = 0; k < K; ++k)
      for (int s : reach[k]) policy.action[k][s] = digits[d++];

    std::fill(dist.begin(), dist.end(), 0.0);
    dist[initial_state] = 1.0;
    double total = 0.0;
    for (int k = 1; k <= K; ++k) {
      std::fill(next_dist.begin(), next_dist.end(), 0.0);
      for (int s : reach[k - 1]) {
        const double p = dist[s];
        if (p == 0.0) continue;
        const int a = policy.action[k - 1][s];
        total += p * st.stage_cost(s, a, beta);
        if (a == kNoTransmit) {
          next_dist[st.f_succ[s]] += p;
        } else {
          next_dist[st.reset[a - 1]] += p * st.lambda[a - 1];
          next_dist[st.f_succ[s]] += p * (1.0 - st.lambda[a - 1]);
        }
      }
      dist.swap(next_dist);
    }
    ++best.policies_evaluated;
    if (total < best.cost) {
      best.cost = total;
      best.policy = policy;
    }

    // Odometer increment over the (M+1)-ary digits.
    std::size_t i = 0;
    while (i < points && ++digits[i] > st.M) digits[i++] = 0;
    if (i == points) break;
  }
  return best;
}

ExactFiniteSolution solve_finite_exact(const SystemModel& model,
                                       const std::vector<SensorModel>& sensors,
                                       const std::vector<SteadyStateFilter>& filters,
                                       double beta, int K, const Matrix& P0) {
  check_beta(beta);
  const int M = static_cast<int>(sensors.size());
  // Orbit 0 is the f-chain of P0; orbit m (1-based) the chain of Pbar_m.
  // After k stages the hop count within an orbit is at most K, so depth K+1
  // suffices and no truncation is involved.
  std::vector<std::vector<double>> tr_f(M + 1);
  std::vector<std::vector<double>> tr_bar(M + 1);
  for (int o = 0; o <= M; ++o) {
    Matrix P = o == 0 ? P0 : filters[o - 1].post_cov;
    for (int j = 0; j <= K + 1; ++j) {
      tr_bar[o].push_back(P.trace());
      P = f_map(P, model);
      tr_f[o].push_back(P.trace());
    }
  }

  ExactFiniteSolution sol;
  sol.action.assign(K, std::vector<std::vector<int>>(M + 1, std::vector<int>(K + 1, 0)));
  // J[k][orbit][hops]
  std::vector<std::vector<std::vector<double>>> J(
      K + 2, std::vector<std::vector<double>>(M + 1, std::vector<double>(K + 2, 0.0)));
  for (int k = K; k >= 1; --k) {
    for (int o = 0; o <= M; ++o) {
      for (int j = 0; j <= K; ++j) {
        double bv = beta * tr_f[o][j] + J[k + 1][o][j + 1];
        int ba = kNoTransmit;
        for (int m = 1; m <= M; ++m) {
          const double lam = sensors[m - 1].lambda;
          const double c = beta * (lam * tr_bar[m][0] + (1.0 - lam) * tr_f[o][j]) +
                           (1.0 - beta) * sensors[m - 1].energy_cost +
                           lam * J[k + 1][m][0] + (1.0 - lam) * J[k + 1][o][j + 1];
          if (c < bv) {
            bv = c;
            ba = m;
          }
        }
        J[k][o][j] = bv;
        sol.action[k - 1][o][j] = ba;
      }
    }
  }
  sol.cost = J[1][0][0];
  return sol;
}

// ---------------------------------------------------------------------------
// Measurement transmission
// ---------------------------------------------------------------------------

MeasTree solve_finite_meas(const SystemModel& model,
                           const std::vector<SensorModel>& sensors, double beta, int K,
                           const Matrix& P0, std::size_t guard) {
  check_beta(beta);
  if (K < 1) throw ConfigError("solve_finite_meas: K must be >= 1");
  const int M = static_cast<int>(sensors.size());
  Matrix stacked(0, model.n);
  for (const auto& s : sensors) {
    Matrix tmp(stacked.rows() + s.C.rows(), model.n);
    tmp << stacked, s.C;
    stacked = tmp;
  }
  if (!check_detectability(model, stacked))
    throw PreconditionError("solve_finite_meas: stacked system is not detectable");

  // Node count of the full (M+1)-ary decision tree of depth K.
  double expected = 0.0;
  for (int d = 0; d < K; ++d) expected += std::pow(M + 1.0, d);
  if (expected > static_cast<double>(guard))
    throw ConfigError("solve_finite_meas: reachable tree exceeds the node guard");

  MeasTree tree;
  tree.horizon = K;
  tree.nodes.push_back(MeasNode{symmetrize(P0), 0, -1, -1, {}, -1, 0.0});
  // Breadth-first expansion of decision nodes up to depth K-1.
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].depth >= K - 1) continue;
    const Matrix P = tree.nodes[i].cov;
    const int depth = tree.nodes[i].depth;
    tree.nodes[i].children.resize(M + 1);
    for (int b = 0; b <= M; ++b) {
      Matrix child = b == 0 ? f_map(P, model) : g_map(P, model, sensors[b - 1]);
      tree.nodes[i].children[b] = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(
          MeasNode{std::move(child), depth + 1, static_cast<int>(i), b, {}, -1, 0.0});
    }
  }

  // Backward sweep; J_{K+1} = 0, so leaves only contribute stage traces.
  for (auto it = tree.nodes.rbegin(); it != tree.nodes.rend(); ++it) {
    MeasNode& node = *it;
    const double trf = f_map(node.cov, model).trace();
    double bv;
    int ba;
    if (node.depth == K - 1) {
      bv = beta * trf;
      ba = kNoTransmit;
      for (int m = 1; m <= M; ++m) {
        const double lam = sensors[m - 1].lambda;
        const double trg = g_map(node.cov, model, sensors[m - 1]).trace();
        const double c = beta * (lam * trg + (1.0 - lam) * trf) +
                         (1.0 - beta) * sensors[m - 1].energy_cost;
        if (c < bv) {
          bv = c;
          ba = m;
        }
      }
    } else {
      bv = beta * trf + tree.nodes[node.children[0]].value;
      ba = kNoTransmit;
      for (int m = 1; m <= M; ++m) {
        const double lam = sensors[m - 1].lambda;
        const double trg = tree.nodes[node.children[m]].cov.trace();
        const double c = beta * (lam * trg + (1.0 - lam) * trf) +
                         (1.0 - beta) * sensors[m - 1].energy_cost +
                         lam * tree.nodes[node.children[m]].value +
                         (1.0 - lam) * tree.nodes[node.children[0]].value;
        if (c < bv) {
          bv = c;
          ba = m;
        }
      }
    }
    node.value = bv;
    node.action = ba;
  }
  return tree;
}

namespace {

int meas_one_step_argmin(double P, const SystemModel& model,
                         const std::vector<SensorModel>& sensors, double beta) {
  const double A2 = model.A(0, 0) * model.A(0, 0);
  const double Q = model.Q(0, 0);
  const double fP = A2 * P + Q;
  double bv = beta * fP;
  int ba = kNoTransmit;
  for (std::size_t m = 0; m < sensors.size(); ++m) {
    const double C2 = sensors[m].C(0, 0) * sensors[m].C(0, 0);
    const double R = sensors[m].R(0, 0);
    const double gP = fP - A2 * C2 * P * P / (C2 * P + R);
    const double c = beta * (sensors[m].lambda * gP + (1.0 - sensors[m].lambda) * fP) +
                     (1.0 - beta) * sensors[m].energy_cost;
    if (c < bv) {
      bv = c;
      ba = static_cast<int>(m) + 1;
    }
  }
  return ba;
}

}  // namespace

std::vector<ActionRegion> meas_one_step_regions(const SystemModel& model,
                                                const std::vector<SensorModel>& sensors,
                                                double beta, double p_lo, double p_hi) {
  if (model.n != 1) throw ConfigError("meas_one_step_regions: scalar systems only");
  for (const auto& s : sensors)
    if (s.obs_dim() != 1) throw ConfigError("meas_one_step_regions: scalar sensors only");
  check_beta(beta);
  if (!(p_lo >= 0.0 && p_hi > p_lo))
    throw ConfigError("meas_one_step_regions: need 0 <= p_lo < p_hi");

  constexpr int kGrid = 200000;
  std::vector<ActionRegion> regions;
  double prev_p = p_lo;
  int prev_a = meas_one_step_argmin(p_lo, model, sensors, beta);
  double region_start = p_lo;
  for (int i = 1; i <= kGrid; ++i) {
    const double p = p_lo + (p_hi - p_lo) * i / kGrid;
    const int a = meas_one_step_argmin(p, model, sensors, beta);
    if (a != prev_a) {
      double lo = prev_p, hi = p;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (meas_one_step_argmin(mid, model, sensors, beta) == prev_a)
          lo = mid;
        else
          hi = mid;
      }
      const double boundary = 0.5 * (lo + hi);
      regions.push_back(ActionRegion{prev_a, region_start, boundary});
      region_start = boundary;
      prev_a = a;
    }
    prev_p = p;
  }
  regions.push_back(ActionRegion{prev_a, region_start, p_hi});
  return regions;
}

// ---------------------------------------------------------------------------
// Markovian packet drops
// ---------------------------------------------------------------------------

namespace {

void check_markov_inputs(const StateSpace& space, const ChannelModel& channel) {
  if (space.sensor_count() != 1)
    throw ConfigError("markov drops: single-sensor state spaces only");
  if (!(channel.p >= 0.0 && channel.p < 1.0 && channel.q > 0.0 && channel.q <= 1.0))
    throw ConfigError("markov drops: require p in [0,1) and q in (0,1]");
}

std::array<int, 2> slice_thresholds(const std::vector<std::array<int, 2>>& action) {
  std::array<int, 2> th{-1, -1};
  for (int g = 0; g < 2; ++g)
    for (std::size_t s = 0; s < action.size(); ++s)
      if (action[s][g] != kNoTransmit) {
        th[g] = static_cast<int>(s);
        break;
      }
  return th;
}

}  // namespace

MarkovSolution solve_markov_drops_infinite(const StateSpace& space,
                                           const ChannelModel& channel, double beta,
                                           double epsilon, long max_iterations) {
  check_beta(beta);
  check_markov_inputs(space, channel);
  const Stage st(space);
  const double lambda_eff = channel.q / (channel.p + channel.q);
  const double bound = stability_bound(space.model());
  if (bound > 0.0 && lambda_eff <= bound)
    throw PreconditionError(
        "markov drops: heuristic guard failed, lambda_eff = q/(p+q) = " +
        std::to_string(lambda_eff) + " below the i.i.d. stability bound " +
        std::to_string(bound));

  const double E = st.energy[0];
  const double tr_bar = st.tr_bar[0];
  const int S = st.S;
  // Flat index: state * 2 + gamma_prev; reference (state 0, gamma_prev = 1).
  auto cost = [&](int s, int g, int nu, const std::vector<double>& next) {
    if (nu == 0) return beta * st.tr_f[s] + next[st.f_succ[s] * 2 + 0];
    const double succ = channel.success_prob(g);
    return beta * (succ * tr_bar + (1.0 - succ) * st.tr_f[s]) + (1.0 - beta) * E +
           succ * next[st.reset[0] * 2 + 1] + (1.0 - succ) * next[st.f_succ[s] * 2 + 0];
  };

  std::vector<double> h(S * 2, 0.0), v(S * 2, 0.0);
  MarkovSolution sol;
  sol.lambda_eff = lambda_eff;
  sol.action.assign(S, {kNoTransmit, kNoTransmit});
  const int ref = 0 * 2 + 1;
  bool converged = false;
  for (long l = 0; l < max_iterations; ++l) {
    for (int s = 0; s < S; ++s)
      for (int g = 0; g < 2; ++g) {
        const double c0 = cost(s, g, 0, h);
        const double c1 = cost(s, g, 1, h);
        v[s * 2 + g] = std::min(c0, c1);
        sol.action[s][g] = c1 < c0 ? 1 : kNoTransmit;
      }
    const double rho = v[ref];
    double delta = 0.0;
    for (int i = 0; i < S * 2; ++i) {
      const double hn = v[i] - rho;
      delta = std::max(delta, std::abs(hn - h[i]));
      h[i] = hn;
    }
    sol.rho = rho;
    sol.iterations = l + 1;
    if (delta < epsilon) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw PreconditionError("markov drops: relative value iteration did not converge");

  double residual = 0.0;
  for (int s = 0; s < S; ++s)
    for (int g = 0; g < 2; ++g) {
      const double c = std::min(cost(s, g, 0, h), cost(s, g, 1, h));
      residual = std::max(residual, std::abs(c - sol.rho - h[s * 2 + g]));
    }
  sol.bellman_residual = residual;
  sol.h.assign(S, {0.0, 0.0});
  for (int s = 0; s < S; ++s) sol.h[s] = {h[s * 2 + 0], h[s * 2 + 1]};
  sol.threshold = slice_thresholds(sol.action);
  return sol;
}

MarkovFiniteSolution solve_markov_drops_finite(const StateSpace& space,
                                               const ChannelModel& channel, double beta,
                                               int K) {
  check_beta(beta);
  check_markov_inputs(space, channel);
  if (K < 1) throw ConfigError("solve_markov_drops_finite: K must be >= 1");
  const Stage st(space);
  const int S = st.S;
  const double E = st.energy[0];
  const double tr_bar = st.tr_bar[0];

  MarkovFiniteSolution sol;
  sol.action.assign(K, std::vector<std::array<int, 2>>(S, {kNoTransmit, kNoTransmit}));
  std::vector<double> J(S * 2, 0.0), Jn(S * 2, 0.0);
  for (int k = K; k >= 1; --k) {
    for (int s = 0; s < S; ++s)
      for (int g = 0; g < 2; ++g) {
        const double c0 = beta * st.tr_f[s] + J[st.f_succ[s] * 2 + 0];
        const double succ = channel.success_prob(g);
        const double c1 = beta * (succ * tr_bar + (1.0 - succ) * st.tr_f[s]) +
                          (1.0 - beta) * E + succ * J[st.reset[0] * 2 + 1] +
                          (1.0 - succ) * J[st.f_succ[s] * 2 + 0];
        Jn[s * 2 + g] = std::min(c0, c1);
        sol.action[k - 1][s][g] = c1 < c0 ? 1 : kNoTransmit;
      }
    J.swap(Jn);
  }
  sol.threshold.resize(K);
  for (int k = 0; k < K; ++k) sol.threshold[k] = slice_thresholds(sol.action[k]);
  return sol;
}

// ---------------------------------------------------------------------------
// Structure analysis
// ---------------------------------------------------------------------------

ThresholdReport extract_thresholds(const std::vector<int>& actions,
                                   const StateSpace& space) {
  ThresholdReport report;
  if (!space.totally_ordered()) {
    report.applicable = false;
    report.violation = "state space is not totally ordered";
    return report;
  }
  report.applicable = true;
  const std::vector<int> chain = space.sorted_chain();

  // Compress the action sequence along the chain into bands.
  std::vector<std::pair<int, int>> bands;  // (action, first chain position)
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const int a = actions[chain[i]];
    if (bands.empty() || bands.back().first != a)
      bands.emplace_back(a, static_cast<int>(i));
  }
  auto push_boundaries = [&] {
    for (const auto& [a, pos] : bands) {
      if (a == kNoTransmit && pos == 0) continue;
      report.boundaries.push_back(ThresholdBoundary{
          a, pos, chain[pos], space.at(chain[pos]).trace});
    }
  };

  const int M = space.sensor_count();
  if (M == 1) {
    report.threshold_form =
        bands.size() == 1 || (bands.size() == 2 && bands[0].first == kNoTransmit &&
                              bands[1].first == 1);
    if (!report.threshold_form) {
      report.violation = "policy is not of threshold form along the chain";
      return report;
    }
    if (bands.size() == 1)
      report.threshold_hops = bands[0].first == kNoTransmit ? -1 : 0;
    else
      report.threshold_hops = space.at(chain[bands[1].second]).hops;
    push_boundaries();
    return report;
  }

  // Two-sensor scenario classification per the four banded patterns; an
  // optional silent prefix is common to all of them.
  std::vector<int> body;
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (i == 0 && bands[i].first == kNoTransmit) continue;
    if (i > 0 && bands[i].first == kNoTransmit) {
      report.threshold_form = false;
      report.violation = "silent band above a transmitting band";
      return report;
    }
    body.push_back(bands[i].first);
  }
  if (M == 2) {
    if (body.empty() || body == std::vector<int>{1})
      report.scenario = 1;
    else if (body == std::vector<int>{2})
      report.scenario = 2;
    else if (body == std::vector<int>{2, 1})
      report.scenario = 3;
    else if (body == std::vector<int>{1, 2})
      report.scenario = 4;
    if (report.scenario == 0) {
      report.threshold_form = false;
      report.violation = "band pattern matches no two-sensor scenario";
      return report;
    }
    report.threshold_form = true;
    push_boundaries();
    return report;
  }

  // M > 2: banded form is all we certify.
  report.threshold_form = true;
  push_boundaries();
  return report;
}

StructureReport verify_structure(const std::vector<std::vector<double>>& values,
                                 bool infinite_horizon, const StateSpace& space,
                                 double beta) {
  constexpr double kSlack = 1e-9;
  const Stage st(space);
  StructureReport report;
  auto violation = [&report](const std::string& text) {
    ++report.violation_count;
    if (report.violations.size() < 50) report.violations.push_back(text);
  };

  // Comparable pairs i <= j, precomputed once.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < st.S; ++i)
    for (int j = 0; j < st.S; ++j)
      if (i != j && space.leq(i, j)) pairs.emplace_back(i, j);

  const int levels = infinite_horizon ? 1 : static_cast<int>(values.size()) - 1;
  for (int level = 0; level < levels; ++level) {
    const std::vector<double>& cur = values[level];
    const std::vector<double>& next = infinite_horizon ? values[0] : values[level + 1];
    const std::string tag =
        infinite_horizon ? "h" : "J_" + std::to_string(level + 1);

    auto psi = [&](int m, int s) { return st.cost(s, m + 1, next, beta); };
    auto c0 = [&](int s) { return st.cost(s, kNoTransmit, next, beta); };

    // (a) monotone value function along comparable pairs
    for (const auto& [i, j] : pairs)
      if (cur[i] > cur[j] + kSlack) {
        std::ostringstream os;
        os << tag << " not monotone: " << tag << "(" << i << ")=" << cur[i] << " > "
           << tag << "(" << j << ")=" << cur[j];
        violation(os.str());
      }

    // (b) each phi_m monotone along comparable pairs
    for (int m = 0; m < st.M; ++m)
      for (const auto& [i, j] : pairs) {
        const double pi = c0(i) - psi(m, i);
        const double pj = c0(j) - psi(m, j);
        if (pi > pj + kSlack) {
          std::ostringstream os;
          os << "phi_" << m + 1 << " at level " << tag << " not monotone between states "
             << i << " and " << j;
          violation(os.str());
        }
      }

    // (c) psi-crossing persistence: a strict crossing of psi_m above psi_n
    // must persist upward along every comparable continuation.
    for (int m = 0; m < st.M; ++m)
      for (int n = 0; n < st.M; ++n) {
        if (m == n) continue;
        std::vector<double> d(st.S);
        for (int s = 0; s < st.S; ++s) d[s] = psi(m, s) - psi(n, s);
        for (int j = 0; j < st.S; ++j) {
          if (d[j] <= kSlack) continue;  // no strict crossing at j
          bool reversal_below = false;
          for (int i = 0; i < st.S && !reversal_below; ++i)
            if (i != j && space.leq(i, j) && d[i] < -kSlack) reversal_below = true;
          if (!reversal_below) continue;
          for (int l = 0; l < st.S; ++l)
            if (l != j && space.leq(j, l) && d[l] < -kSlack) {
              std::ostringstream os;
              os << "psi crossing of sensors " << m + 1 << "/" << n + 1
                 << " at level " << tag << " does not persist from state " << j
                 << " to " << l;
              violation(os.str());
            }
        }
      }
  }

  // Theorem-3(i) expectation: unstable A should transmit at the clamped tail.
  if (stability_bound(space.model()) > 0.0) {
    const std::vector<double>& next = values[infinite_horizon ? 0 : 1];
    for (int m = 0; m < space.sensor_count(); ++m) {
      const int top = space.index(m, space.depth() - 1);
      auto [v, a] = st.best(top, next, beta);
      (void)v;
      if (a == kNoTransmit) {
        report.top_states_transmit = false;
        report.notes.push_back(
            "greedy action at the truncated tail of sensor " + std::to_string(m + 1) +
            " is silent; consider raising N");
      }
    }
  }
  return report;
}

}  // namespace covsched
