#include "xorlab/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace xorlab {

namespace {

void require_dim(const NetworkParams& params, Eigen::Index got) {
  if (got != params.W.cols())
    throw ShapeError("input has dimension " + std::to_string(got) + ", network expects " +
                     std::to_string(params.W.cols()));
}

}  // namespace

NetworkParams init_network(int m, int d, double omega_init, double subgrad_at_zero,
                           const Rng& rng) {
  if (m < 1 || d < 1) throw std::invalid_argument("m and d must be >= 1");
  if (!(omega_init > 0.0)) throw std::invalid_argument("invalid init: omega_init must be > 0");
  if (!(subgrad_at_zero >= 0.0 && subgrad_at_zero <= 1.0))
    throw std::invalid_argument("subgrad_at_zero must lie in [0, 1]");

  NetworkParams params;
  params.subgrad_at_zero = subgrad_at_zero;
  params.W.resize(m, d);
  Rng stream = rng.substream(0x696e6974ULL);  // "init"
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < d; ++k) params.W(j, k) = omega_init * stream.normal();

  params.a.resize(m);
  const int half = m / 2;
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int j = 0; j < half; ++j) params.a(j) = scale;
  for (int j = half; j < 2 * half; ++j) params.a(j) = -scale;
  if (m % 2 == 1) params.a(m - 1) = 0.0;
  return params;
}

double forward(const NetworkParams& params, const Eigen::Ref<const Vector>& x) {
  require_dim(params, x.size());
  double out = 0.0;
  for (int j = 0; j < params.m(); ++j) {
    const double pre = params.W.row(j).dot(x.transpose());
    if (pre > 0.0) out += params.a(j) * pre;
  }
  return out;
}

Vector forward_batch(const NetworkParams& params, const Eigen::Ref<const Matrix>& points) {
  require_dim(params, points.cols());
  Matrix pre = points * params.W.transpose();  // n x m
  Vector out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < params.m(); ++j) {
      const double z = pre(i, j);
      if (z > 0.0) acc += params.a(j) * z;
    }
    out(i) = acc;
  }
  return out;
}

double subnetwork_forward(const NetworkParams& params, const std::vector<std::size_t>& J,
                          const Eigen::Ref<const Vector>& x) {
  require_dim(params, x.size());
  std::vector<std::size_t> idx = J;
  std::sort(idx.begin(), idx.end());
  double out = 0.0;
  for (std::size_t j : idx) {
    if (j >= static_cast<std::size_t>(params.m()))
      throw std::out_of_range("subnetwork index " + std::to_string(j) + " out of range");
    const double pre = params.W.row(static_cast<Eigen::Index>(j)).dot(x.transpose());
    if (pre > 0.0) out += params.a(static_cast<Eigen::Index>(j)) * pre;
  }
  return out;
}

Vector hidden_features(const NetworkParams& params, const Eigen::Ref<const Vector>& x) {
  require_dim(params, x.size());
  return (params.W * x).cwiseMax(0.0);
}

Vector activation_pattern(const NetworkParams& params, const Eigen::Ref<const Vector>& x) {
  require_dim(params, x.size());
  Vector pre = params.W * x;
  Vector out(params.m());
  for (int j = 0; j < params.m(); ++j)
    out(j) = pre(j) > 0.0 ? 1.0 : (pre(j) < 0.0 ? 0.0 : params.subgrad_at_zero);
  return out;
}

NetworkParams nu_oracle_network(const DistributionSpec& spec) {
  validate(spec);
  NetworkParams params;
  params.subgrad_at_zero = 0.0;
  params.W.resize(4, spec.d);
  params.W.row(0) = spec.mu1.transpose();
  params.W.row(1) = -spec.mu1.transpose();
  params.W.row(2) = spec.mu2.transpose();
  params.W.row(3) = -spec.mu2.transpose();
  params.a.resize(4);
  params.a << 0.5, 0.5, -0.5, -0.5;
  return params;
}

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path,
                     const std::string& provenance) {
  nlohmann::json header;
  header["m"] = params.m();
  header["d"] = params.dim();
  header["subgrad_at_zero"] = params.subgrad_at_zero;
  std::vector<int> signs(static_cast<std::size_t>(params.m()));
  for (int j = 0; j < params.m(); ++j)
    signs[static_cast<std::size_t>(j)] = params.a(j) > 0 ? 1 : (params.a(j) < 0 ? -1 : 0);
  header["a_signs"] = signs;
  header["provenance"] = provenance;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  out << header.dump() << "\n";
  char buf[32];
  for (int j = 0; j < params.m(); ++j) {
    for (int k = 0; k < params.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", params.W(j, k));
      out << buf << (k + 1 < params.dim() ? "," : "");
    }
    out << "\n";
  }
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint missing header");
  const nlohmann::json header = nlohmann::json::parse(line);
  const int m = header.at("m").get<int>();
  const int d = header.at("d").get<int>();

  NetworkParams params;
  params.subgrad_at_zero = header.at("subgrad_at_zero").get<double>();
  params.W.resize(m, d);
  for (int j = 0; j < m; ++j) {
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint body truncated");
    std::size_t pos = 0;
    for (int k = 0; k < d; ++k) {
      std::size_t used = 0;
      params.W(j, k) = std::stod(line.substr(pos), &used);
      pos += used;
      if (k + 1 < d) {
        if (pos >= line.size() || line[pos] != ',')
          throw std::runtime_error("checkpoint row malformed");
        ++pos;
      }
    }
  }
  const auto signs = header.at("a_signs").get<std::vector<int>>();
  if (signs.size() != static_cast<std::size_t>(m))
    throw std::runtime_error("checkpoint a_signs length mismatch");
  params.a.resize(m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int j = 0; j < m; ++j) params.a(j) = scale * signs[static_cast<std::size_t>(j)];
  return params;
}

}  // namespace xorlab
