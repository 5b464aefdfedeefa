#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "xorlab/rng.hpp"
#include "xorlab/types.hpp"

namespace xorlab {

enum class MeanMode { canonical, random_orthonormal };
enum class NoiseMode { uniform_flip, none };
enum class ClusterFamily { gaussian };

/// The noisy 2-XOR cluster distribution: a uniform mixture of four Gaussian
/// clusters centred at +mu1, -mu1 (label +1) and +mu2, -mu2 (label -1),
/// with covariance sigma^2 I within each cluster and labels flipped
/// independently with probability eta.
struct DistributionSpec {
  int d = 0;
  Vector mu1;
  Vector mu2;
  double sigma = 0.0;
  double eta = 0.0;
  NoiseMode noise_mode = NoiseMode::uniform_flip;
  ClusterFamily cluster_family = ClusterFamily::gaussian;

  Vector mean_of(Cluster c) const;
};

/// Throws std::invalid_argument unless mu1, mu2 are unit-norm and orthogonal
/// (both to 1e-12) and 0 <= eta < 1/2.
void validate(const DistributionSpec& spec);

/// Builds a spec with means either at the first two coordinate axes
/// (canonical) or at a random orthonormal pair drawn from `rng`
/// (two Gaussian vectors, Gram-Schmidt).
DistributionSpec make_spec(int d, double sigma, double eta, MeanMode mean_mode,
                           const Rng& rng,
                           NoiseMode noise_mode = NoiseMode::uniform_flip);

/// A sampled training set. `labels` are the observed (possibly flipped)
/// labels; `clean_labels` follow the XOR rule exactly. `noisy_set` holds
/// precisely the flipped indices, `clean_set` the rest.
struct Dataset {
  Matrix points;  // n x d, one sample per row
  std::vector<int> clean_labels;
  std::vector<int> labels;
  std::vector<Cluster> cluster_of;
  std::vector<std::size_t> noisy_set;
  std::vector<std::size_t> clean_set;

  std::size_t n() const { return static_cast<std::size_t>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  bool is_noisy(std::size_t i) const { return labels[i] != clean_labels[i]; }
  std::vector<std::size_t> cluster_indices(Cluster c) const;
};

/// Draws n i.i.d. samples. Each sample i uses two counter-based substreams of
/// `rng` (one for the point, one for the label flip), so the point cloud is
/// unchanged when only eta changes and generation order is immaterial.
/// Bit-identical output for identical (spec, n, seed).
Dataset sample_dataset(const DistributionSpec& spec, std::size_t n, const Rng& rng);

struct Sample {
  Vector x;
  Cluster cluster;
  int clean_label;
  int label;
};

/// The i-th sample of the stream defined by (spec, rng), without
/// materializing the rest: sample_dataset(spec, n, rng) row i equals this for
/// every i < n. Lets Monte Carlo estimators draw in chunks or in parallel.
Sample sample_point(const DistributionSpec& spec, const Rng& rng, std::size_t i);

struct SampleThresholds {
  double c1 = 2.0;     // stand-in for the concentration constant
  double delta = 0.01; // failure probability in the concentration widths
};

struct ClusterStats {
  bool present = false;
  std::size_t count = 0;
  double fraction = 0.0;       // |I_mu| / n
  double min_dot_mu = 0.0;     // min_i <x_i, mu>
  double max_abs_dot_perp = 0.0;  // max_i |<x_i, mu_perp>|, mu_perp the opposing mean
  double max_sqdist = 0.0;     // max_i ||x_i - mu||^2
  bool within_ok = false;      // min_dot >= 1 - c1*sigma*sqrt(d) and perp <= c1*sigma*sqrt(d)
  bool radius_ok = false;      // max_sqdist <= c1*sigma^2*d
  bool balance_ok = false;     // | |I_mu|/n - 1/4 | <= c1*sqrt(log(1/delta)/n)
};

struct SamplePropertyReport {
  std::array<ClusterStats, kNumClusters> clusters;
  double noisy_fraction = 0.0;
  bool noise_ok = false;  // |N|/n <= eta + c1*sqrt(log(1/delta)/n)
  bool all_ok = false;    // conjunction over present clusters and noise_ok
};

/// Per-cluster geometry and count statistics with pass flags against the
/// configured thresholds. Empty clusters are marked absent and skipped.
SamplePropertyReport check_sample_properties(const Dataset& dataset,
                                             const DistributionSpec& spec,
                                             const SampleThresholds& thresholds = {});

/// CSV export with header x_0,...,x_{d-1},clean_label,label,cluster,is_noisy.
/// Floats are written with 17 significant digits, so a round-trip is
/// value-exact for binary64.
void write_dataset_csv(const Dataset& dataset, std::ostream& out);
Dataset read_dataset_csv(std::istream& in);

}  // namespace xorlab
