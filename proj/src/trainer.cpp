#include "xorlab/trainer.hpp"

#include <algorithm>
#include <cmath>

namespace xorlab {

namespace {

constexpr std::uint64_t kDataStreamTag = 0x64617461ULL;  // "data"

// phi'(z) under the network's subgradient convention.
inline double relu_deriv(double z, double subgrad_at_zero) {
  return z > 0.0 ? 1.0 : (z < 0.0 ? 0.0 : subgrad_at_zero);
}

// Reusable per-iteration buffers; nothing here is allocated inside the loop.
struct BatchWorkspace {
  Matrix pre;      // n x m preactivations
  Matrix scratch;  // n x m, activations then weighted derivatives
  Vector outputs;  // n
  Vector margins;  // y_i f(x_i)
  Vector labels;   // cached as doubles
  Matrix grad;     // m x d

  void init(const NetworkParams& params, const Dataset& dataset) {
    const auto n = static_cast<Eigen::Index>(dataset.n());
    pre.resize(n, params.m());
    scratch.resize(n, params.m());
    outputs.resize(n);
    margins.resize(n);
    grad.resize(params.m(), params.dim());
    labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
      labels(i) = static_cast<double>(dataset.labels[static_cast<std::size_t>(i)]);
  }

  void evaluate(const NetworkParams& params, const Dataset& dataset) {
    pre.noalias() = dataset.points * params.W.transpose();
    scratch = pre.cwiseMax(0.0);
    outputs.noalias() = scratch * params.a;
    margins = labels.cwiseProduct(outputs);
  }

  // Gradient of the empirical risk at the state last passed to evaluate().
  const Matrix& gradient(const NetworkParams& params, const Dataset& dataset) {
    const auto n = static_cast<Eigen::Index>(dataset.n());
    scratch = (pre.array() > 0.0).cast<double>();
    if (params.subgrad_at_zero != 0.0)
      scratch.array() += params.subgrad_at_zero * (pre.array() == 0.0).cast<double>();
    Vector weight(n);
    for (Eigen::Index i = 0; i < n; ++i)
      weight(i) = logistic_loss_deriv(margins(i)) * labels(i) / static_cast<double>(n);
    scratch.array().colwise() *= weight.array();
    grad.noalias() = scratch.transpose() * dataset.points;
    grad.array().colwise() *= params.a.array();
    return grad;
  }
};

BatchWorkspace evaluate_batch(const NetworkParams& params, const Dataset& dataset) {
  if (dataset.dim() != params.dim())
    throw ShapeError("dataset dimension does not match network");
  BatchWorkspace ws;
  ws.init(params, dataset);
  ws.evaluate(params, dataset);
  return ws;
}

double risk_from_margins(const Vector& margins) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) acc += logistic_loss(margins(i));
  return acc / static_cast<double>(margins.size());
}

IterationStats stats_from(int t, const NetworkParams& params, const Dataset& dataset,
                          const Vector& margins) {
  IterationStats st;
  st.t = t;
  st.risk = risk_from_margins(margins);
  std::size_t clean_hit = 0, noisy_hit = 0;
  for (std::size_t i : dataset.clean_set)
    if (margins(static_cast<Eigen::Index>(i)) > 0.0) ++clean_hit;
  for (std::size_t i : dataset.noisy_set)
    if (margins(static_cast<Eigen::Index>(i)) > 0.0) ++noisy_hit;
  st.clean_acc = dataset.clean_set.empty()
                     ? 1.0
                     : static_cast<double>(clean_hit) / static_cast<double>(dataset.clean_set.size());
  st.noisy_acc = dataset.noisy_set.empty()
                     ? 0.0
                     : static_cast<double>(noisy_hit) / static_cast<double>(dataset.noisy_set.size());
  st.train_acc = static_cast<double>(clean_hit + noisy_hit) / static_cast<double>(dataset.n());
  st.frob_norm = params.W.norm();
  // Max over live neurons; the odd-m dead neuron (a_j = 0) never moves and is
  // excluded from diagnostics counts.
  double max_norm = 0.0;
  for (int j = 0; j < params.m(); ++j)
    if (params.a(j) != 0.0) max_norm = std::max(max_norm, params.W.row(j).norm());
  st.max_neuron_norm = max_norm;
  return st;
}

}  // namespace

bool snapshot_planned(const TrainConfig& config, int t) {
  if (t == 0 || t == config.T) return true;
  switch (config.snapshot_policy) {
    case SnapshotPolicy::all: return true;
    case SnapshotPolicy::endpoints: return false;
    case SnapshotPolicy::every_k: return config.snapshot_stride > 0 && t % config.snapshot_stride == 0;
  }
  return false;
}

double logistic_loss(double z) {
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

double logistic_loss_deriv(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(z));
}

double empirical_risk(const NetworkParams& params, const Dataset& dataset) {
  return risk_from_margins(evaluate_batch(params, dataset).margins);
}

Matrix gradient(const NetworkParams& params, const Dataset& dataset) {
  BatchWorkspace ws = evaluate_batch(params, dataset);
  return ws.gradient(params, dataset);
}

NetworkParams gd_step(const NetworkParams& params, const Dataset& dataset, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  NetworkParams next = params;
  next.W -= alpha * gradient(params, dataset);
  return next;
}

int theorem_schedule(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  const double r = 1.0 / (4.0 * alpha);
  const double nearest = std::round(r);
  // Tolerate roundoff when 1/(4 alpha) is integral (e.g. alpha = 0.05).
  const double steps = std::abs(r - nearest) < 1e-9 ? nearest : std::ceil(r);
  return 1 + static_cast<int>(steps);
}

void ProjectionSeries::record(int t, const NetworkParams& params, const DistributionSpec& spec) {
  Matrix proj(params.m(), 2);
  proj.col(0) = params.W * spec.mu1;
  proj.col(1) = params.W * spec.mu2;
  iterations.push_back(t);
  projections.push_back(std::move(proj));
}

bool ProjectionSeries::contiguous_through(int tau) const {
  if (static_cast<int>(iterations.size()) < tau + 1) return false;
  for (int t = 0; t <= tau; ++t)
    if (iterations[static_cast<std::size_t>(t)] != t) return false;
  return true;
}

const NetworkParams& TrainTrace::at(int t) const {
  for (const auto& [ti, params] : snapshots)
    if (ti == t) return params;
  throw IncompleteTraceError("no snapshot stored for iteration " + std::to_string(t));
}

bool TrainTrace::has_snapshot(int t) const {
  return std::any_of(snapshots.begin(), snapshots.end(),
                     [t](const auto& s) { return s.first == t; });
}

TrainTrace train(const Dataset& dataset, int m, const TrainConfig& config,
                 const TrainHook& hook) {
  if (!(config.alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (config.T < 1) throw std::invalid_argument("T must be >= 1");

  NetworkParams params = init_network(m, dataset.dim(), config.omega_init,
                                      config.subgrad_at_zero, Rng(config.seed));
  if (dataset.dim() != params.dim())
    throw ShapeError("dataset dimension does not match network");
  TrainTrace trace;
  trace.stats.reserve(static_cast<std::size_t>(config.T) + 1);

  BatchWorkspace ws;
  ws.init(params, dataset);
  for (int t = 0; t <= config.T; ++t) {
    ws.evaluate(params, dataset);
    IterationStats st = stats_from(t, params, dataset, ws.margins);
    if (!std::isfinite(st.risk) || !std::isfinite(st.frob_norm) || !params.W.allFinite())
      throw DivergenceError("training diverged at iteration " + std::to_string(t), t);
    trace.stats.push_back(st);
    if (snapshot_planned(config, t)) trace.snapshots.emplace_back(t, params);
    if (hook) hook(t, params);
    if (t == config.T) break;
    params.W -= config.alpha * ws.gradient(params, dataset);
  }
  return trace;
}

TrainTrace train(const DistributionSpec& spec, std::size_t n, int m,
                 const TrainConfig& config, const TrainHook& hook) {
  const Dataset dataset = sample_dataset(spec, n, Rng(config.seed).substream(kDataStreamTag));
  return train(dataset, m, config, hook);
}

}  // namespace xorlab
