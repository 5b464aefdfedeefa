#pragma once

// Brute-force reference implementations used to cross-check the library.
// Everything here is a plain loop over raw values, independent of the
// production code paths (no Eigen reductions, no shared helpers).

#include <cmath>
#include <cstddef>
#include <vector>

#include "xorlab/diagnostics.hpp"
#include "xorlab/distribution.hpp"
#include "xorlab/network.hpp"

namespace oracle {

inline double relu(double z) { return z > 0.0 ? z : 0.0; }

inline double relu_deriv(double z, double subgrad) {
  if (z > 0.0) return 1.0;
  if (z < 0.0) return 0.0;
  return subgrad;
}

inline double dot(const xorlab::Matrix& W, int row, const xorlab::Vector& x) {
  double acc = 0.0;
  for (int k = 0; k < W.cols(); ++k) acc += W(row, k) * x(k);
  return acc;
}

inline double forward(const xorlab::NetworkParams& p, const xorlab::Vector& x) {
  double out = 0.0;
  for (int j = 0; j < p.m(); ++j) out += p.a(j) * relu(dot(p.W, j, x));
  return out;
}

inline double margin(const xorlab::NetworkParams& p, const xorlab::Dataset& ds, std::size_t i) {
  xorlab::Vector x = ds.points.row(static_cast<Eigen::Index>(i)).transpose();
  return ds.labels[i] * forward(p, x);
}

inline double row_norm(const xorlab::Matrix& W, int row) {
  double acc = 0.0;
  for (int k = 0; k < W.cols(); ++k) acc += W(row, k) * W(row, k);
  return std::sqrt(acc);
}

// Candidate membership recomputed from the definition.
inline bool is_candidate(const xorlab::NetworkParams& p, const xorlab::DistributionSpec& spec,
                         xorlab::Cluster c, int j, double threshold_scale) {
  const double norm = row_norm(p.W, j);
  if (norm == 0.0) return false;
  const xorlab::Vector mu = spec.mean_of(c);
  const bool positive = c == xorlab::Cluster::pos_mu1 || c == xorlab::Cluster::neg_mu1;
  if (positive && !(p.a(j) > 0.0)) return false;
  if (!positive && !(p.a(j) < 0.0)) return false;
  double corr = 0.0;
  for (int k = 0; k < spec.d; ++k) corr += p.W(j, k) * mu(k);
  return corr / norm >= threshold_scale / std::sqrt(static_cast<double>(spec.d));
}

// Clean-sample activation edge for neuron j captured by cluster c.
inline double edge(const xorlab::NetworkParams& p, const xorlab::Dataset& ds,
                   const xorlab::DistributionSpec& spec, xorlab::Cluster c, int j) {
  const xorlab::Cluster opp =
      c == xorlab::Cluster::pos_mu1   ? xorlab::Cluster::neg_mu1
      : c == xorlab::Cluster::neg_mu1 ? xorlab::Cluster::pos_mu1
      : c == xorlab::Cluster::pos_mu2 ? xorlab::Cluster::neg_mu2
                                      : xorlab::Cluster::pos_mu2;
  (void)spec;
  double acc = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.is_noisy(i)) continue;
    xorlab::Vector x = ds.points.row(static_cast<Eigen::Index>(i)).transpose();
    if (ds.cluster_of[i] == c)
      acc += relu_deriv(dot(p.W, j, x), p.subgrad_at_zero);
    else if (ds.cluster_of[i] == opp)
      acc -= relu_deriv(dot(p.W, j, x), p.subgrad_at_zero);
  }
  return acc;
}

// Whether neuron j satisfies the alignment clauses for cluster c.
inline bool aligned(const xorlab::NetworkParams& p, const xorlab::Dataset& ds, xorlab::Cluster c,
                    int j) {
  const xorlab::Cluster opp =
      c == xorlab::Cluster::pos_mu1   ? xorlab::Cluster::neg_mu1
      : c == xorlab::Cluster::neg_mu1 ? xorlab::Cluster::pos_mu1
      : c == xorlab::Cluster::pos_mu2 ? xorlab::Cluster::neg_mu2
                                      : xorlab::Cluster::pos_mu2;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    xorlab::Vector x = ds.points.row(static_cast<Eigen::Index>(i)).transpose();
    const double deriv = relu_deriv(dot(p.W, j, x), p.subgrad_at_zero);
    if (ds.cluster_of[i] == c && deriv != 1.0) return false;
    if (ds.cluster_of[i] == opp && deriv != 0.0) return false;
  }
  return true;
}

inline double ramp(double z, double gamma) {
  const double v = 1.0 - z / gamma;
  return std::min(1.0, std::max(0.0, v));
}

}  // namespace oracle
