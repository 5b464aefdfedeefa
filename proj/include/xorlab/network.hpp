#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "xorlab/distribution.hpp"
#include "xorlab/rng.hpp"
#include "xorlab/types.hpp"

namespace xorlab {

/// Two-layer ReLU network x -> sum_j a_j * max(0, <w_j, x>) with the second
/// layer frozen: for even m half of the a_j equal +1/sqrt(m) and half equal
/// -1/sqrt(m); for odd m the last entry is 0. Only W is ever trained.
struct NetworkParams {
  Matrix W;  // m x d, row j is neuron j
  Vector a;  // frozen second layer
  double subgrad_at_zero = 0.0;

  int m() const { return static_cast<int>(W.rows()); }
  int dim() const { return static_cast<int>(W.cols()); }
};

/// W entries i.i.d. N(0, omega_init^2); a laid out as the first half
/// +1/sqrt(m), the second half -1/sqrt(m) (a_m = 0 for odd m).
NetworkParams init_network(int m, int d, double omega_init, double subgrad_at_zero,
                           const Rng& rng);

/// Fixed ascending-j summation so evaluations are reproducible.
double forward(const NetworkParams& params, const Eigen::Ref<const Vector>& x);

/// Row-wise forward over an n x d batch via one matrix product; agrees with
/// per-row forward() to well under 1e-12 at desk scale.
Vector forward_batch(const NetworkParams& params, const Eigen::Ref<const Matrix>& points);

/// Sum restricted to the index set J; f^J + f^{J^c} recovers forward().
double subnetwork_forward(const NetworkParams& params, const std::vector<std::size_t>& J,
                          const Eigen::Ref<const Vector>& x);

/// j-th entry max(0, <w_j, x>).
Vector hidden_features(const NetworkParams& params, const Eigen::Ref<const Vector>& x);

/// j-th entry is 1 when <w_j, x> > 0, 0 when < 0, and subgrad_at_zero at
/// exactly 0.
Vector activation_pattern(const NetworkParams& params, const Eigen::Ref<const Vector>& x);

/// The four-neuron reference classifier whose output is
/// (|<mu1, x>| - |<mu2, x>|) / 2: weights at the cluster means with matching
/// second-layer signs.
NetworkParams nu_oracle_network(const DistributionSpec& spec);

/// Checkpoint format: a one-line JSON header {m, d, subgrad_at_zero, a_signs,
/// provenance} followed by CSV rows of W at 17 significant digits, so a
/// reload reproduces forward outputs exactly.
void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path,
                     const std::string& provenance = {});
NetworkParams load_checkpoint(const std::filesystem::path& path);

}  // namespace xorlab
