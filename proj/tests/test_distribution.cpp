#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "xorlab/distribution.hpp"

using namespace xorlab;

TEST_CASE("canonical spec pins means to the first two axes") {
  const auto spec = make_spec(2, std::sqrt(1.0 / 50.0), 0.15, MeanMode::canonical, Rng(0));
  CHECK(spec.mu1(0) == 1.0);
  CHECK(spec.mu1(1) == 0.0);
  CHECK(spec.mu2(0) == 0.0);
  CHECK(spec.mu2(1) == 1.0);
}

TEST_CASE("random orthonormal means are unit and orthogonal") {
  const auto spec = make_spec(50, 0.1, 0.1, MeanMode::random_orthonormal, Rng(7));
  double n1 = 0, n2 = 0, ip = 0;
  for (int k = 0; k < 50; ++k) {
    n1 += spec.mu1(k) * spec.mu1(k);
    n2 += spec.mu2(k) * spec.mu2(k);
    ip += spec.mu1(k) * spec.mu2(k);
  }
  CHECK(std::abs(std::sqrt(n1) - 1.0) < 1e-12);
  CHECK(std::abs(std::sqrt(n2) - 1.0) < 1e-12);
  CHECK(std::abs(ip) < 1e-12);
}

TEST_CASE("spec preconditions") {
  CHECK_THROWS_AS(make_spec(1, 0.1, 0.0, MeanMode::canonical, Rng(0)), std::invalid_argument);
  CHECK_THROWS_AS(make_spec(4, 0.1, 0.5, MeanMode::canonical, Rng(0)), std::invalid_argument);
  CHECK_THROWS_AS(make_spec(4, 0.1, -0.1, MeanMode::canonical, Rng(0)), std::invalid_argument);
  CHECK_THROWS_AS(make_spec(4, -1.0, 0.1, MeanMode::canonical, Rng(0)), std::invalid_argument);
}

TEST_CASE("zero noise gives empty noisy set") {
  const auto spec = make_spec(3, 0.2, 0.0, MeanMode::canonical, Rng(0));
  const auto ds = sample_dataset(spec, 100, Rng(1));
  CHECK(ds.noisy_set.empty());
  CHECK(ds.clean_set.size() == 100);
  for (std::size_t i = 0; i < ds.n(); ++i) CHECK(ds.labels[i] == ds.clean_labels[i]);
}

TEST_CASE("zero variance samples sit exactly on the means") {
  const auto spec = make_spec(3, 0.0, 0.0, MeanMode::canonical, Rng(0));
  const auto ds = sample_dataset(spec, 8, Rng(2));
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const Vector mu = spec.mean_of(ds.cluster_of[i]);
    CHECK((ds.points.row(static_cast<Eigen::Index>(i)).transpose() - mu).norm() == 0.0);
  }
}

TEST_CASE("labels follow the XOR rule and noisy bookkeeping is exact") {
  const auto spec = make_spec(5, 0.3, 0.25, MeanMode::canonical, Rng(0));
  const auto ds = sample_dataset(spec, 500, Rng(3));
  std::size_t noisy_seen = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const int expect = (ds.cluster_of[i] == Cluster::pos_mu1 || ds.cluster_of[i] == Cluster::neg_mu1)
                           ? 1
                           : -1;
    CHECK(ds.clean_labels[i] == expect);
    if (ds.labels[i] != ds.clean_labels[i]) ++noisy_seen;
    CHECK((ds.labels[i] * ds.clean_labels[i] == -1) == ds.is_noisy(i));
  }
  CHECK(noisy_seen == ds.noisy_set.size());
  CHECK(ds.noisy_set.size() + ds.clean_set.size() == ds.n());
}

TEST_CASE("noisy fraction concentrates at the configured rate") {
  // Binomial(5000, 0.15): the observed fraction should land well inside
  // [0.13, 0.17] for a fixed seed.
  const auto spec = make_spec(2, std::sqrt(1.0 / 50.0), 0.15, MeanMode::canonical, Rng(0));
  const auto ds = sample_dataset(spec, 5000, Rng(42));
  const double frac = static_cast<double>(ds.noisy_set.size()) / 5000.0;
  CHECK(frac > 0.13);
  CHECK(frac < 0.17);
}

TEST_CASE("identical seed reproduces the dataset bit for bit") {
  const auto spec = make_spec(10, 0.2, 0.3, MeanMode::canonical, Rng(0));
  const auto a = sample_dataset(spec, 200, Rng(9));
  const auto b = sample_dataset(spec, 200, Rng(9));
  CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.labels == b.labels);
  CHECK(a.noisy_set == b.noisy_set);
}

TEST_CASE("point cloud is unchanged when only eta changes") {
  const auto lo = make_spec(6, 0.2, 0.0, MeanMode::canonical, Rng(0));
  auto hi = lo;
  hi.eta = 0.4;
  const auto a = sample_dataset(lo, 300, Rng(11));
  const auto b = sample_dataset(hi, 300, Rng(11));
  CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < a.n(); ++i) CHECK(a.cluster_of[i] == b.cluster_of[i]);
  CHECK(b.noisy_set.size() > 0);
}

TEST_CASE("sample_point matches the materialized dataset row by row") {
  const auto spec = make_spec(4, 0.5, 0.2, MeanMode::canonical, Rng(0));
  const Rng rng(17);
  const auto ds = sample_dataset(spec, 64, rng);
  for (std::size_t i = 0; i < 64; i += 7) {
    const Sample s = sample_point(spec, rng, i);
    CHECK((ds.points.row(static_cast<Eigen::Index>(i)).transpose() - s.x).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(ds.labels[i] == s.label);
    CHECK(ds.cluster_of[i] == s.cluster);
  }
}

TEST_CASE("cluster mean converges componentwise over many draws") {
  const auto spec = make_spec(3, 0.5, 0.0, MeanMode::canonical, Rng(0));
  const auto ds = sample_dataset(spec, 20000, Rng(5));
  const auto idx = ds.cluster_indices(Cluster::pos_mu1);
  Vector mean = Vector::Zero(3);
  for (std::size_t i : idx) mean += ds.points.row(static_cast<Eigen::Index>(i)).transpose();
  mean /= static_cast<double>(idx.size());
  const double tol = 5.0 * spec.sigma / std::sqrt(static_cast<double>(idx.size()));
  for (int k = 0; k < 3; ++k) CHECK(std::abs(mean(k) - spec.mu1(k)) <= tol);
}

TEST_CASE("sample property report: zero variance case") {
  const auto spec = make_spec(4, 0.0, 0.0, MeanMode::canonical, Rng(0));
  const auto ds = sample_dataset(spec, 400, Rng(6));
  const auto report = check_sample_properties(ds, spec);
  for (const auto& st : report.clusters) {
    REQUIRE(st.present);
    CHECK(st.min_dot_mu == 1.0);
    CHECK(st.max_abs_dot_perp == 0.0);
    CHECK(st.max_sqdist == 0.0);
    CHECK(st.within_ok);
    CHECK(st.radius_ok);
  }
  CHECK(report.noisy_fraction == 0.0);
  CHECK(report.noise_ok);
}

TEST_CASE("sample property report matches brute-force recomputation") {
  const auto spec = make_spec(400, std::sqrt(1.0 / (16.0 * 400.0)), 0.1, MeanMode::canonical, Rng(0));
  const auto ds = sample_dataset(spec, 2000, Rng(8));
  const auto report = check_sample_properties(ds, spec);
  for (int ci = 0; ci < kNumClusters; ++ci) {
    const auto c = static_cast<Cluster>(ci);
    const Vector mu = spec.mean_of(c);
    const Vector perp = (ci < 2) ? spec.mu2 : spec.mu1;
    double min_dot = 1e300, max_perp = 0, max_sq = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (ds.cluster_of[i] != c) continue;
      ++count;
      double dot = 0, pd = 0, sq = 0;
      for (int k = 0; k < spec.d; ++k) {
        dot += ds.points(static_cast<Eigen::Index>(i), k) * mu(k);
        pd += ds.points(static_cast<Eigen::Index>(i), k) * perp(k);
        const double diff = ds.points(static_cast<Eigen::Index>(i), k) - mu(k);
        sq += diff * diff;
      }
      min_dot = std::min(min_dot, dot);
      max_perp = std::max(max_perp, std::abs(pd));
      max_sq = std::max(max_sq, sq);
    }
    const auto& st = report.clusters[ci];
    CHECK(st.count == count);
    CHECK(st.min_dot_mu == doctest::Approx(min_dot).epsilon(1e-12));
    CHECK(st.max_abs_dot_perp == doctest::Approx(max_perp).epsilon(1e-12));
    CHECK(st.max_sqdist == doctest::Approx(max_sq).epsilon(1e-12));
  }
}

TEST_CASE("cluster balance concentration over many seeds") {
  // |I_mu|/n within 2 sqrt(log(1/delta)/n) of 1/4 at delta = 0.01, for at
  // least 95% of 100 seeds.
  const auto spec = make_spec(3, 0.2, 0.0, MeanMode::canonical, Rng(0));
  const double width = 2.0 * std::sqrt(std::log(100.0) / 4000.0);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ds = sample_dataset(spec, 4000, Rng(seed));
    bool ok = true;
    for (int ci = 0; ci < kNumClusters; ++ci) {
      const double frac =
          static_cast<double>(ds.cluster_indices(static_cast<Cluster>(ci)).size()) / 4000.0;
      ok = ok && std::abs(frac - 0.25) <= width;
    }
    hits += ok ? 1 : 0;
  }
  CHECK(hits >= 95);
}

TEST_CASE("empty dataset is rejected, empty cluster flagged absent") {
  const auto spec = make_spec(2, 0.0, 0.0, MeanMode::canonical, Rng(0));
  auto ds = sample_dataset(spec, 3, Rng(1));
  // Tiny sample: some cluster is necessarily empty.
  const auto report = check_sample_properties(ds, spec);
  bool any_absent = false;
  for (const auto& st : report.clusters) any_absent = any_absent || !st.present;
  CHECK(any_absent);
}

TEST_CASE("CSV round-trip is lossless") {
  const auto spec = make_spec(5, 0.37, 0.2, MeanMode::random_orthonormal, Rng(4));
  const auto ds = sample_dataset(spec, 50, Rng(12));
  std::stringstream buf;
  write_dataset_csv(ds, buf);
  const auto back = read_dataset_csv(buf);
  REQUIRE(back.n() == ds.n());
  REQUIRE(back.dim() == ds.dim());
  CHECK((back.points - ds.points).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.labels == ds.labels);
  CHECK(back.clean_labels == ds.clean_labels);
  CHECK(back.noisy_set == ds.noisy_set);
  for (std::size_t i = 0; i < ds.n(); ++i) CHECK(back.cluster_of[i] == ds.cluster_of[i]);
}
