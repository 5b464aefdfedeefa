#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "xorlab/distribution.hpp"
#include "xorlab/network.hpp"

namespace xorlab {

/// log(1 + exp(-z)), evaluated in a form that neither overflows nor loses
/// precision for large |z|.
double logistic_loss(double z);

/// d/dz log(1 + exp(-z)) = -1 / (1 + exp(z)); always in (-1, 0).
double logistic_loss_deriv(double z);

/// Mean logistic loss over the dataset in fixed index order.
double empirical_risk(const NetworkParams& params, const Dataset& dataset);

/// Full-batch gradient of the empirical risk with respect to W. Row j is
/// (1/n) sum_i l'(y_i f(x_i)) y_i a_j phi'(<w_j, x_i>) x_i, with phi' given
/// by the network's subgradient convention.
Matrix gradient(const NetworkParams& params, const Dataset& dataset);

/// One step W <- W - alpha * gradient; the second layer is untouched.
NetworkParams gd_step(const NetworkParams& params, const Dataset& dataset, double alpha);

/// Early-stopping horizon T = 1 + ceil(1/(4 alpha)); exact when 1/(4 alpha)
/// is integral.
int theorem_schedule(double alpha);

enum class SnapshotPolicy { all, endpoints, every_k };

struct TrainConfig {
  double alpha = 0.1;
  int T = 1;
  double omega_init = 1e-4;
  SnapshotPolicy snapshot_policy = SnapshotPolicy::every_k;
  int snapshot_stride = 10;
  std::uint64_t seed = 0;
  double subgrad_at_zero = 0.0;
};

struct IterationStats {
  int t = 0;
  double risk = 0.0;
  double clean_acc = 0.0;  // fraction of clean samples with y f > 0
  double noisy_acc = 0.0;  // fraction of noisy samples with y f > 0
  double train_acc = 0.0;  // over all samples, observed labels
  double frob_norm = 0.0;
  double max_neuron_norm = 0.0;  // over neurons with a_j != 0
};

namespace stream_tags {
// Dataset substream used by train(spec, ...); kept public so callers can
// sample the same dataset up front.
inline constexpr std::uint64_t train_data = 0x64617461ULL;
}  // namespace stream_tags

/// Per-iteration projections of every neuron onto mu1 and mu2, recorded by a
/// training hook. Keeps the per-step footprint at O(m) instead of O(m d).
struct ProjectionSeries {
  std::vector<int> iterations;          // expected contiguous from 0
  std::vector<Matrix> projections;      // each m x 2: col 0 <w_j, mu1>, col 1 <w_j, mu2>

  void record(int t, const NetworkParams& params, const DistributionSpec& spec);
  bool contiguous_through(int tau) const;
};

struct TrainTrace {
  std::vector<IterationStats> stats;                      // every t = 0..T
  std::vector<std::pair<int, NetworkParams>> snapshots;   // always includes t=0 and t=T
  std::optional<ProjectionSeries> projections;            // attached by hooks
  std::vector<std::pair<int, double>> val_accuracy;       // attached by the lab runner

  const NetworkParams& at(int t) const;
  bool has_snapshot(int t) const;
  const NetworkParams& initial() const { return at(0); }
  const NetworkParams& final_params() const { return snapshots.back().second; }
};

using TrainHook = std::function<void(int t, const NetworkParams& params)>;

/// Whether the snapshot policy will retain iteration t.
bool snapshot_planned(const TrainConfig& config, int t);

/// Full-batch gradient descent for config.T steps from a fresh seeded
/// initialization. The hook observes every iterate (including t=0) read-only.
/// Throws DivergenceError if the risk or weights become non-finite.
TrainTrace train(const Dataset& dataset, int m, const TrainConfig& config,
                 const TrainHook& hook = {});

/// Convenience overload: samples an n-point dataset from `spec` first, using
/// a substream of config.seed, then trains on it.
TrainTrace train(const DistributionSpec& spec, std::size_t n, int m,
                 const TrainConfig& config, const TrainHook& hook = {});

}  // namespace xorlab
