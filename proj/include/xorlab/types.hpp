#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace xorlab {

// Row-major so that row j of a weight matrix is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Cluster : int { pos_mu1 = 0, neg_mu1 = 1, pos_mu2 = 2, neg_mu2 = 3 };

constexpr int kNumClusters = 4;

// XOR labelling: the ±mu1 clusters carry +1, the ±mu2 clusters carry -1.
inline int clean_label_of(Cluster c) {
  return (c == Cluster::pos_mu1 || c == Cluster::neg_mu1) ? +1 : -1;
}

inline const char* to_string(Cluster c) {
  switch (c) {
    case Cluster::pos_mu1: return "+m1";
    case Cluster::neg_mu1: return "-m1";
    case Cluster::pos_mu2: return "+m2";
    case Cluster::neg_mu2: return "-m2";
  }
  throw std::logic_error("bad cluster value");
}

Cluster cluster_from_string(const std::string& s);

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, int iteration_)
      : std::runtime_error(what), iteration(iteration_) {}
  int iteration;
};

struct IncompleteTraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace xorlab
