#include "xorlab/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace xorlab {

namespace {

constexpr std::uint64_t kPointStreamTag = 0x706f696e74ULL;  // "point"
constexpr std::uint64_t kFlipStreamTag = 0x666c6970ULL;     // "flip"

void format_double(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

Cluster cluster_from_string(const std::string& s) {
  if (s == "+m1") return Cluster::pos_mu1;
  if (s == "-m1") return Cluster::neg_mu1;
  if (s == "+m2") return Cluster::pos_mu2;
  if (s == "-m2") return Cluster::neg_mu2;
  throw std::invalid_argument("unknown cluster token: " + s);
}

Vector DistributionSpec::mean_of(Cluster c) const {
  switch (c) {
    case Cluster::pos_mu1: return mu1;
    case Cluster::neg_mu1: return -mu1;
    case Cluster::pos_mu2: return mu2;
    case Cluster::neg_mu2: return -mu2;
  }
  throw std::logic_error("bad cluster value");
}

void validate(const DistributionSpec& spec) {
  if (spec.d < 2) throw std::invalid_argument("invalid dimension: d must be >= 2");
  if (spec.sigma < 0.0) throw std::invalid_argument("sigma must be nonnegative");
  if (!(spec.eta >= 0.0 && spec.eta < 0.5))
    throw std::invalid_argument("invalid noise rate: eta must lie in [0, 1/2)");
  if (spec.mu1.size() != spec.d || spec.mu2.size() != spec.d)
    throw std::invalid_argument("cluster means must have dimension d");
  constexpr double tol = 1e-12;
  if (std::abs(spec.mu1.norm() - 1.0) > tol || std::abs(spec.mu2.norm() - 1.0) > tol)
    throw std::invalid_argument("cluster means must be unit norm");
  if (std::abs(spec.mu1.dot(spec.mu2)) > tol)
    throw std::invalid_argument("cluster means must be orthogonal");
}

DistributionSpec make_spec(int d, double sigma, double eta, MeanMode mean_mode,
                           const Rng& rng, NoiseMode noise_mode) {
  if (d < 2) throw std::invalid_argument("invalid dimension: d must be >= 2");
  if (sigma < 0.0) throw std::invalid_argument("sigma must be nonnegative");
  if (!(eta >= 0.0 && eta < 0.5))
    throw std::invalid_argument("invalid noise rate: eta must lie in [0, 1/2)");

  DistributionSpec spec;
  spec.d = d;
  spec.sigma = sigma;
  spec.eta = eta;
  spec.noise_mode = noise_mode;

  if (mean_mode == MeanMode::canonical) {
    spec.mu1 = Vector::Zero(d);
    spec.mu2 = Vector::Zero(d);
    spec.mu1(0) = 1.0;
    spec.mu2(1) = 1.0;
  } else {
    Rng stream = rng.substream(0x6d65616eULL);  // "mean"
    Vector g1(d), g2(d);
    for (int i = 0; i < d; ++i) g1(i) = stream.normal();
    for (int i = 0; i < d; ++i) g2(i) = stream.normal();
    spec.mu1 = g1 / g1.norm();
    Vector residual = g2 - spec.mu1.dot(g2) * spec.mu1;
    // A second projection pass scrubs the rounding left by the first.
    residual -= spec.mu1.dot(residual) * spec.mu1;
    spec.mu2 = residual / residual.norm();
  }

  validate(spec);
  return spec;
}

std::vector<std::size_t> Dataset::cluster_indices(Cluster c) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cluster_of.size(); ++i)
    if (cluster_of[i] == c) out.push_back(i);
  return out;
}

Sample sample_point(const DistributionSpec& spec, const Rng& rng, std::size_t i) {
  Rng ps = rng.substream(kPointStreamTag).substream(i);
  const auto c = static_cast<Cluster>(ps.below(kNumClusters));
  Sample s;
  s.cluster = c;
  s.clean_label = clean_label_of(c);
  s.x = spec.mean_of(c);
  for (int k = 0; k < spec.d; ++k) s.x(k) += spec.sigma * ps.normal();

  bool flip = false;
  if (spec.noise_mode == NoiseMode::uniform_flip && spec.eta > 0.0) {
    Rng fs = rng.substream(kFlipStreamTag).substream(i);
    flip = fs.bernoulli(spec.eta);
  }
  s.label = flip ? -s.clean_label : s.clean_label;
  return s;
}

Dataset sample_dataset(const DistributionSpec& spec, std::size_t n, const Rng& rng) {
  validate(spec);
  if (n < 1) throw std::invalid_argument("n must be >= 1");

  Dataset ds;
  ds.points.resize(static_cast<Eigen::Index>(n), spec.d);
  ds.clean_labels.resize(n);
  ds.labels.resize(n);
  ds.cluster_of.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const Sample s = sample_point(spec, rng, i);
    ds.points.row(static_cast<Eigen::Index>(i)) = s.x.transpose();
    ds.cluster_of[i] = s.cluster;
    ds.clean_labels[i] = s.clean_label;
    ds.labels[i] = s.label;
    (s.label != s.clean_label ? ds.noisy_set : ds.clean_set).push_back(i);
  }
  return ds;
}

SamplePropertyReport check_sample_properties(const Dataset& dataset,
                                             const DistributionSpec& spec,
                                             const SampleThresholds& thresholds) {
  if (dataset.n() == 0) throw std::invalid_argument("dataset must be nonempty");
  const auto n = static_cast<double>(dataset.n());
  const double width = thresholds.c1 * std::sqrt(std::log(1.0 / thresholds.delta) / n);
  const double dot_floor = 1.0 - thresholds.c1 * spec.sigma * std::sqrt(spec.d);
  const double perp_cap = thresholds.c1 * spec.sigma * std::sqrt(spec.d);
  const double sqdist_cap = thresholds.c1 * spec.sigma * spec.sigma * spec.d;

  SamplePropertyReport report;
  bool all_ok = true;
  for (int ci = 0; ci < kNumClusters; ++ci) {
    const auto c = static_cast<Cluster>(ci);
    ClusterStats& st = report.clusters[ci];
    const Vector mu = spec.mean_of(c);
    // The opposing mean direction plays the role of mu_perp.
    const Vector perp = (c == Cluster::pos_mu1 || c == Cluster::neg_mu1) ? spec.mu2 : spec.mu1;

    double min_dot = std::numeric_limits<double>::infinity();
    double max_perp = 0.0, max_sq = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < dataset.n(); ++i) {
      if (dataset.cluster_of[i] != c) continue;
      ++count;
      const auto row = dataset.points.row(static_cast<Eigen::Index>(i));
      min_dot = std::min(min_dot, row.dot(mu.transpose()));
      max_perp = std::max(max_perp, std::abs(row.dot(perp.transpose())));
      max_sq = std::max(max_sq, (row.transpose() - mu).squaredNorm());
    }
    st.count = count;
    st.present = count > 0;
    st.fraction = static_cast<double>(count) / n;
    if (!st.present) continue;  // statistics stay absent
    st.min_dot_mu = min_dot;
    st.max_abs_dot_perp = max_perp;
    st.max_sqdist = max_sq;
    st.within_ok = min_dot >= dot_floor && max_perp <= perp_cap;
    st.radius_ok = max_sq <= sqdist_cap;
    st.balance_ok = std::abs(st.fraction - 0.25) <= width;
    all_ok = all_ok && st.within_ok && st.radius_ok && st.balance_ok;
  }
  report.noisy_fraction = static_cast<double>(dataset.noisy_set.size()) / n;
  report.noise_ok = report.noisy_fraction <= spec.eta + width;
  report.all_ok = all_ok && report.noise_ok;
  return report;
}

void write_dataset_csv(const Dataset& dataset, std::ostream& out) {
  const int d = dataset.dim();
  for (int k = 0; k < d; ++k) out << "x_" << k << ",";
  out << "clean_label,label,cluster,is_noisy\n";
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    for (int k = 0; k < d; ++k) {
      format_double(out, dataset.points(static_cast<Eigen::Index>(i), k));
      out << ",";
    }
    out << dataset.clean_labels[i] << "," << dataset.labels[i] << ","
        << to_string(dataset.cluster_of[i]) << "," << (dataset.is_noisy(i) ? 1 : 0) << "\n";
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty dataset CSV");
  int d = 0;
  {
    std::stringstream hs(header);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.rfind("x_", 0) == 0) ++d;
    }
    if (d == 0) throw std::runtime_error("dataset CSV header has no coordinate columns");
  }

  std::vector<std::array<std::string, 4>> tail;
  std::vector<double> coords;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    for (int k = 0; k < d; ++k) {
      if (!std::getline(ls, cell, ',')) throw std::runtime_error("short dataset CSV row");
      coords.push_back(std::stod(cell));
    }
    std::array<std::string, 4> rest;
    for (int k = 0; k < 4; ++k) {
      if (!std::getline(ls, rest[k], ',')) throw std::runtime_error("short dataset CSV row");
    }
    tail.push_back(rest);
    ++n;
  }

  Dataset ds;
  ds.points.resize(static_cast<Eigen::Index>(n), d);
  ds.clean_labels.resize(n);
  ds.labels.resize(n);
  ds.cluster_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k)
      ds.points(static_cast<Eigen::Index>(i), k) = coords[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)];
    ds.clean_labels[i] = std::stoi(tail[i][0]);
    ds.labels[i] = std::stoi(tail[i][1]);
    ds.cluster_of[i] = cluster_from_string(tail[i][2]);
    const bool noisy = tail[i][3] == "1";
    if (noisy != (ds.labels[i] != ds.clean_labels[i]))
      throw std::runtime_error("dataset CSV is_noisy flag inconsistent with labels");
    (noisy ? ds.noisy_set : ds.clean_set).push_back(i);
  }
  return ds;
}

}  // namespace xorlab
