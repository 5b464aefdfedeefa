#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "xorlab/distribution.hpp"
#include "xorlab/network.hpp"
#include "xorlab/trainer.hpp"

namespace xorlab {

inline double default_candidate_constant() {
  // 4^5 * 1024^2 * e^4
  return 1024.0 * 1048576.0 * std::exp(4.0);
}

/// Thresholds for the runtime predicates. The candidate-set constant and the
/// margin constant come from the analysis; the edge constant stands in for an
/// unquantified universal constant and is an empirical default.
struct DiagnosticsConfig {
  double c0 = default_candidate_constant();
  double correlation_threshold_scale = 1.0 / (3.0 * default_candidate_constant());
  double edge_constant = 0.05;  // required min edge / n
  double gamma = std::exp(-2.0) / 16384.0;
  double delta = 0.01;
  double tolerance = 1e-9;
};

void validate(const DiagnosticsConfig& cfg);

/// Candidate neurons per cluster mean, from the t=0 snapshot: positive
/// neurons whose normalized correlation with +-mu1 clears
/// correlation_threshold_scale / sqrt(d), negative neurons likewise for
/// +-mu2. Zero-norm neurons are excluded.
struct CandidateSets {
  std::array<std::vector<std::size_t>, kNumClusters> sets;

  const std::vector<std::size_t>& for_cluster(Cluster c) const {
    return sets[static_cast<int>(c)];
  }
  std::vector<std::size_t>& for_cluster(Cluster c) { return sets[static_cast<int>(c)]; }
  std::vector<std::size_t> all() const;
  std::size_t total_size() const;
};

CandidateSets candidate_sets(const NetworkParams& params0, const DistributionSpec& spec,
                             const DiagnosticsConfig& cfg = {});

struct AlignmentSetReport {
  std::size_t set_size = 0;
  std::size_t satisfied = 0;
  double fraction = 1.0;   // 1 when the set is empty
  bool on_vacuous = false;   // no samples in the captured cluster
  bool off_vacuous = false;  // no samples in the opposing cluster
};

struct AlignmentReport {
  std::array<AlignmentSetReport, kNumClusters> sets;
  bool all_hold = false;
};

/// Condition: every candidate neuron fires on every sample of its cluster and
/// is silent on every sample of the opposing cluster.
AlignmentReport alignment_check(const NetworkParams& params, const Dataset& dataset,
                                const CandidateSets& sets);

struct AlmostOrthReport {
  bool holds = false;              // max ratio over t in [1, tau] is <= 1
  double max_violation_ratio = 0.0;
  double t0_ratio = 0.0;           // reported separately; not part of `holds`
};

/// Condition: |<w_j^t, mu_opposite>| <= 3 alpha |a_j| for every candidate
/// neuron and every t in [1, tau]. Requires projections for every iteration
/// 0..tau; throws IncompleteTraceError otherwise.
AlmostOrthReport almost_orth_check(const ProjectionSeries& series, const CandidateSets& sets,
                                   const Vector& a, double alpha, int tau);
/// Same check driven from trace snapshots (or the attached projection
/// series when present).
AlmostOrthReport almost_orth_check(const TrainTrace& trace, const DistributionSpec& spec,
                                   const CandidateSets& sets, double alpha, int tau);

struct NormalizedCorrelations {
  Vector value;                          // <w_j/||w_j||, mu>; 0 for zero-norm rows
  std::vector<std::size_t> zero_norm;    // flagged neurons
};

NormalizedCorrelations normalized_correlations(const NetworkParams& params, const Vector& mu);

/// Median of values over an index subset. NaN on an empty subset.
double median_over(const Vector& values, const std::vector<std::size_t>& idx);

struct EdgeReport {
  std::vector<std::size_t> neuron;
  std::vector<Cluster> captured;  // which J_mu the neuron belongs to
  std::vector<double> edge;       // N_mu(j) - N_{-mu}(j) over clean samples
  double min_edge_over_n = 0.0;
  bool pass = false;              // min edge / n >= cfg.edge_constant
};

/// Clean-sample activation edge at initialization for every candidate neuron.
EdgeReport edge_counts(const NetworkParams& params0, const Dataset& dataset,
                       const CandidateSets& sets, const DiagnosticsConfig& cfg = {});

struct MarginReport {
  Vector margins;  // y_i f(x_i), or y_i f^J(x_i) when a subnetwork is given
  double min_clean = 0.0;  // NaN when the clean set is empty
  double max_noisy = 0.0;  // NaN when the noisy set is empty
  bool clean_all_positive = false;
  bool noisy_all_negative = false;
  // sgn(0)-counts-as-error convention: a zero margin is incorrect.
  bool clean_all_correct = false;   // same as clean_all_positive
  bool noisy_all_incorrect = false; // max_noisy <= 0
};

MarginReport margin_report(const NetworkParams& params, const Dataset& dataset,
                           const std::vector<std::size_t>* subnetwork = nullptr);

struct ErrorEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Monte Carlo P(y != sgn(f(x; W))) over fresh draws from the distribution;
/// sgn(0) counts as an error.
ErrorEstimate test_error(const NetworkParams& params, const DistributionSpec& spec,
                         std::size_t n_test, const Rng& rng);

/// Monte Carlo error of the reference classifier
/// x -> sgn(|<mu1, x>| - |<mu2, x>|) against noisy labels.
ErrorEstimate reference_error(const DistributionSpec& spec, std::size_t n_test, const Rng& rng);

struct FeatureDisplacement {
  Vector ratio;  // ||phi(W_T x_i) - phi(W_0 x_i)|| / ||phi(W_0 x_i)||, inf when undefined
  std::vector<std::size_t> undefined;  // samples with a zero denominator
  double min_ratio = 0.0;
};

FeatureDisplacement feature_displacement(const NetworkParams& params0,
                                         const NetworkParams& paramsT,
                                         const Dataset& dataset);

/// empirical_ramp_risk + 4/(gamma sqrt(n)) + sqrt(2 log(4/delta) / n): the
/// margin-based bound chain with the Rademacher complexity of unit-Frobenius
/// two-layer ReLU networks under E||x||^2 <= 2. `alpha` is validated but
/// does not enter the bound.
double generalization_bound(double gamma, std::size_t n, double delta,
                            double empirical_ramp_risk, double alpha);

/// Mean of min(1, max(0, 1 - y_i f(x_i) / gamma)).
double ramp_risk(const NetworkParams& params, const Dataset& dataset, double gamma);

struct NormGrowthReport {
  bool holds = true;               // every live neuron and the Frobenius norm within bound, t >= 1
  double max_neuron_ratio = 0.0;   // max_t ||w_j^t|| / (2 |a_j| alpha t), live neurons
  double max_frob_ratio = 0.0;     // max_t ||W^t||_F / (2 alpha t)
};

/// Weight-growth bound check over a trace; neurons with a_j = 0 (odd-m
/// convention) are excluded.
NormGrowthReport norm_growth_report(const TrainTrace& trace, double alpha);

struct IterationDiagnostics {
  int t = 0;
  std::array<std::size_t, kNumClusters> J_sizes{};
  AlignmentReport alignment;
  AlmostOrthReport almost_orth;  // up to min(t, T-1's horizon); t0 ratio at t = 0
  double min_clean_margin = 0.0;
  double max_noisy_margin = 0.0;
  bool clean_all_correct = false;
  bool noisy_all_incorrect = false;
  double test_error = 0.0;
  double test_error_se = 0.0;
  double feature_displacement_min = 0.0;
  double gen_bound = 0.0;
};

/// Bundles every per-iteration predicate for the given snapshot time. The
/// trace must hold snapshots at 0 and t, and projections through t for the
/// almost-orthogonality part.
IterationDiagnostics evaluate_iteration(const TrainTrace& trace, int t, const Dataset& dataset,
                                        const DistributionSpec& spec, const CandidateSets& sets,
                                        const DiagnosticsConfig& cfg, double alpha,
                                        std::size_t n_test, const Rng& rng);

}  // namespace xorlab
