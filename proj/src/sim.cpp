#include "covsched/sim.hpp"

#include <algorithm>
#include <cmath>

#include "covsched/errors.hpp"

namespace covsched {

namespace {

// Symmetric PSD square root via the eigendecomposition; tiny negative
// eigenvalues from roundoff are clamped.
Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

Vector sample_gaussian(const Matrix& sqrt_cov, RngStream& rng) {
  Vector z(sqrt_cov.rows());
  for (int i = 0; i < z.size(); ++i) z(i) = rng.gaussian();
  return sqrt_cov * z;
}

// Batch-means accumulator: the mean is exact; the standard error comes from
// up to 100 equal batches of the post-burn-in samples.
class Series {
 public:
  explicit Series(long expected_samples)
      : batch_size_(std::max<long>(1, expected_samples / 100)) {}

  void add(double x) {
    sum_ += x;
    ++count_;
    batch_sum_ += x;
    if (++batch_count_ == batch_size_) flush_batch();
  }

  double mean() const { return count_ ? sum_ / count_ : 0.0; }

  double standard_error() const {
    if (batches_.size() < 2) return 0.0;
    double m = 0.0;
    for (double b : batches_) m += b;
    m /= batches_.size();
    double var = 0.0;
    for (double b : batches_) var += (b - m) * (b - m);
    var /= (batches_.size() - 1);
    return std::sqrt(var / batches_.size());
  }

 private:
  void flush_batch() {
    batches_.push_back(batch_sum_ / batch_count_);
    batch_sum_ = 0.0;
    batch_count_ = 0;
  }

  long batch_size_;
  double sum_ = 0.0;
  long count_ = 0;
  double batch_sum_ = 0.0;
  long batch_count_ = 0;
  std::vector<double> batches_;
};

}  // namespace

int channel_step(const ChannelModel& channel, int& gamma_prev, RngStream& rng) {
  const int gamma = rng.bernoulli(channel.success_prob(gamma_prev)) ? 1 : 0;
  gamma_prev = gamma;
  return gamma;
}

SimResult run_simulation(const StateSpace& space, const ChannelModel& channel,
                         const SimConfig& config) {
  const SystemModel& model = space.model();
  const std::vector<SensorModel>& sensors = space.sensors();
  const std::vector<SteadyStateFilter>& filters = space.filters();
  const int M = space.sensor_count();
  const int n = model.n;

  if (config.steps < 1 || config.replications < 1)
    throw ConfigError("run_simulation: steps and replications must be positive");
  if (config.policy_kind == PolicyKind::Solved &&
      static_cast<int>(config.policy_actions.size()) != space.size())
    throw ConfigError("run_simulation: solved policy is not total on the state space");
  if (config.policy_kind == PolicyKind::Threshold && M != 1)
    throw ConfigError("run_simulation: threshold policies need a single sensor");
  if (config.policy_kind == PolicyKind::Baseline &&
      static_cast<int>(config.baseline_thresholds.size()) != M)
    throw ConfigError("run_simulation: baseline needs one threshold per sensor");
  for (int a : config.policy_actions)
    if (a < 0 || a > M)
      throw ConfigError("run_simulation: policy action out of range");

  // Initial remote covariance: an element of S, extended past the stored
  // depth if the configured hop count requires it.
  Matrix P_init = config.initial_hops < space.depth()
                      ? space.at(space.index(config.initial_sensor, config.initial_hops)).matrix
                      : f_map_pow(filters[config.initial_sensor].post_cov, model,
                                  config.initial_hops);

  const Matrix sqrt_q = psd_sqrt(model.Q);
  const Matrix sqrt_x0 = psd_sqrt(config.x0_cov ? *config.x0_cov : P_init);
  std::vector<Matrix> sqrt_r;
  for (const auto& s : sensors) sqrt_r.push_back(psd_sqrt(s.R));

  const long burn = static_cast<long>(config.steps * config.burn_in_fraction);
  const long kept = config.steps - burn;

  SimResult result;
  Series energy_series(kept * config.replications);
  Series cov_series[3] = {Series(kept * config.replications),
                          Series(kept * config.replications),
                          Series(kept * config.replications)};
  double sq_error_sum[3] = {0.0, 0.0, 0.0};
  long sq_error_count = 0;
  result.hop_occupancy.assign(space.depth() + 64, 0.0);
  long occupancy_total = 0;

  const bool active[3] = {config.run_optimal, config.run_suboptimal,
                          config.run_measurement};

  for (int rep = 0; rep < config.replications; ++rep) {
    RngStream plant_rng(config.seeds.plant, rep, RngStream::kPlant);
    RngStream init_rng(config.seeds.plant, rep, RngStream::kInit);
    RngStream policy_rng(config.seeds.channel, rep, RngStream::kPolicy);
    std::vector<RngStream> meas_rng, chan_rng, fb_rng;
    for (int m = 0; m < M; ++m) {
      meas_rng.emplace_back(config.seeds.measurement, rep, RngStream::kMeasurement, m);
      chan_rng.emplace_back(config.seeds.channel, rep, RngStream::kChannel, m);
      fb_rng.emplace_back(config.seeds.channel, rep, RngStream::kFeedback, m);
    }

    Vector x = sample_gaussian(sqrt_x0, init_rng);
    std::vector<LocalFilterState> locals;
    for (int m = 0; m < M; ++m)
      locals.push_back(kf_init(model, sensors[m], filters[m].prior_cov, Vector::Zero(n)));

    ConstantGainState subopt = suboptimal_init(
        model, Vector::Zero(n),
        CovState{config.initial_sensor, config.initial_hops, P_init, P_init.trace()});
    OptimalRemoteState opt;
    if (active[0]) opt = optimal_init(model, sensors, locals, P_init, config.cross_init);
    MeasRemoteState meas{Vector::Zero(n), P_init};

    // Baseline bookkeeping: previous local posteriors and the remote estimate.
    Vector baseline_remote = Vector::Zero(n);
    std::vector<Vector> prev_local_post(M, Vector::Zero(n));
    // Channel memory = previous reception indicator, starting in the good
    // state; a step without a reception leaves 0 behind.
    std::vector<int> channel_memory(M, 1);

    for (long k = 0; k < config.steps; ++k) {
      // Decisions depend only on the estimator state at k-1.
      std::vector<char> scheduled(M, 0);
      switch (config.policy_kind) {
        case PolicyKind::Solved: {
          int hops = subopt.cov.hops;
          if (hops >= space.depth()) {
            hops = space.depth() - 1;
            ++result.boundary_visits;
          }
          const int a = config.policy_actions[space.index(subopt.cov.sensor, hops)];
          if (a != kNoTransmit) scheduled[a - 1] = 1;
          break;
        }
        case PolicyKind::Threshold:
          if (subopt.cov.hops >= config.threshold_hops) scheduled[0] = 1;
          break;
        case PolicyKind::Baseline: {
          // Strict inequality per the decision rule; right after a success
          // the difference is exactly zero, so the sensor skips that slot.
          const int slot = static_cast<int>(k % M);
          if ((prev_local_post[slot] - baseline_remote).norm() >
              config.baseline_thresholds[slot])
            scheduled[slot] = 1;
          break;
        }
        case PolicyKind::Always:
          scheduled[M == 1 ? 0 : static_cast<int>(k % M)] = 1;
          break;
        case PolicyKind::Never:
          break;
        case PolicyKind::Random:
          scheduled[std::min<int>(M - 1, static_cast<int>(policy_rng.uniform01() * M))] = 1;
          break;
        case PolicyKind::All:
          std::fill(scheduled.begin(), scheduled.end(), 1);
          break;
      }

      // Measurements and local filters at time k.
      std::vector<Vector> y(M);
      for (int m = 0; m < M; ++m) {
        y[m] = sensors[m].C * x + sample_gaussian(sqrt_r[m], meas_rng[m]);
        locals[m] = kf_step(locals[m], y[m], model, sensors[m]);
      }

      // Feedback losses suppress the scheduled transmission entirely; energy
      // is spent by sensors that actually transmit.
      std::vector<char> transmitting(M, 0);
      int tx_count = 0;
      double energy = 0.0;
      for (int m = 0; m < M; ++m) {
        if (!scheduled[m]) continue;
        if (sensors[m].feedback_lambda >= 1.0 ||
            fb_rng[m].bernoulli(sensors[m].feedback_lambda)) {
          transmitting[m] = 1;
          ++tx_count;
          energy += sensors[m].energy_cost;
        }
      }

      // Shared channel: simultaneous transmissions collide deterministically.
      // I.i.d. drops use each sensor's own lambda; Markov drops share (p, q)
      // with per-sensor reception memory.
      std::vector<int> gamma(M, 0);
      if (tx_count >= 2) {
        ++result.collisions;
        for (int m = 0; m < M; ++m) channel_memory[m] = 0;
      } else if (tx_count == 1) {
        for (int m = 0; m < M; ++m) {
          if (transmitting[m]) {
            if (channel.kind == ChannelModel::Kind::Iid) {
              gamma[m] = chan_rng[m].bernoulli(sensors[m].lambda) ? 1 : 0;
              channel_memory[m] = gamma[m];
            } else {
              gamma[m] = channel_step(channel, channel_memory[m], chan_rng[m]);
            }
          } else {
            channel_memory[m] = 0;
          }
        }
      } else {
        for (int m = 0; m < M; ++m) channel_memory[m] = 0;
      }

      int received_from = 0;  // 1-based, 0 = nothing received
      for (int m = 0; m < M; ++m)
        if (transmitting[m] && gamma[m]) received_from = m + 1;
      const int tx_sensor =
          tx_count == 1
              ? 1 + static_cast<int>(std::find(transmitting.begin(), transmitting.end(), 1) -
                                     transmitting.begin())
              : 0;

      // Estimator updates for time k.
      double meas_post_trace = 0.0;
      Vector meas_post_estimate;
      if (active[2]) {
        const Matrix& P = meas.cov;
        if (received_from) {
          const SensorModel& s = sensors[received_from - 1];
          const Matrix innov = s.C * P * s.C.transpose() + s.R;
          const Matrix gain = innov.ldlt().solve(s.C * P).transpose();
          meas_post_estimate =
              meas.estimate + gain * (y[received_from - 1] - s.C * meas.estimate);
          meas_post_trace = (P - gain * s.C * P).trace();
          meas = meas_step(meas, received_from, 1, y[received_from - 1], model, sensors);
        } else {
          meas_post_estimate = meas.estimate;
          meas_post_trace = P.trace();
          meas = meas_step(meas, kNoTransmit, 0, std::nullopt, model, sensors);
        }
      }

      if (active[0]) {
        if (received_from)
          opt = optimal_step(opt, received_from, 1,
                             locals[received_from - 1].estimate_post, locals, model,
                             sensors);
        else
          opt = optimal_step(opt, tx_sensor, 0, std::nullopt, locals, model, sensors);
      }

      if (received_from) {
        const int m = received_from - 1;
        subopt = suboptimal_step(
            subopt, received_from, 1,
            std::make_pair(locals[m].estimate_post,
                           CovState{m, 0, locals[m].post_cov, locals[m].post_cov.trace()}),
            model);
      } else {
        subopt = suboptimal_step(subopt, tx_sensor, 0, std::nullopt, model);
      }

      if (config.policy_kind == PolicyKind::Baseline)
        baseline_remote = received_from
                              ? locals[received_from - 1].estimate_post
                              : Vector(model.A * baseline_remote);

      if (config.trace_sink) {
        const int idx = space.index(subopt.cov.sensor,
                                    std::min(subopt.cov.hops, space.depth() - 1));
        config.trace_sink(k, idx, tx_sensor, received_from ? 1 : 0, subopt.cov.trace);
      }

      if (k >= burn) {
        energy_series.add(energy);
        if (active[1]) cov_series[1].add(subopt.cov.trace);
        if (active[0]) cov_series[0].add(opt.post_cov.trace());
        if (active[2]) cov_series[2].add(meas_post_trace);
        ++sq_error_count;
        if (active[1]) {
          const Vector& est = config.policy_kind == PolicyKind::Baseline
                                  ? baseline_remote
                                  : subopt.estimate;
          sq_error_sum[1] += (x - est).squaredNorm();
        }
        if (active[0]) sq_error_sum[0] += (x - opt.estimate_post).squaredNorm();
        if (active[2]) sq_error_sum[2] += (x - meas_post_estimate).squaredNorm();
        const int hop = std::min<int>(subopt.cov.hops,
                                      static_cast<int>(result.hop_occupancy.size()) - 1);
        result.hop_occupancy[hop] += 1.0;
        ++occupancy_total;
      }

      for (int m = 0; m < M; ++m) prev_local_post[m] = locals[m].estimate_post;
      x = model.A * x + sample_gaussian(sqrt_q, plant_rng);
    }
  }

  result.steps_used = kept * config.replications;
  result.avg_energy = energy_series.mean();
  result.se_energy = energy_series.standard_error();
  for (int e = 0; e < 3; ++e) {
    if (!active[e]) continue;
    result.estimator[e].avg_cov_trace = cov_series[e].mean();
    result.estimator[e].se_cov_trace = cov_series[e].standard_error();
    result.estimator[e].avg_sq_error =
        sq_error_count ? sq_error_sum[e] / sq_error_count : 0.0;
  }
  if (occupancy_total)
    for (double& v : result.hop_occupancy) v /= occupancy_total;
  return result;
}

}  // namespace covsched
