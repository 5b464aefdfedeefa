#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "xorlab/network.hpp"

using namespace xorlab;

namespace {

NetworkParams hand_network(std::initializer_list<std::initializer_list<double>> rows,
                           std::initializer_list<double> a, double subgrad = 0.0) {
  NetworkParams p;
  p.W.resize(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.begin()->size()));
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (double v : row) p.W(r, c++) = v;
    ++r;
  }
  p.a.resize(static_cast<Eigen::Index>(a.size()));
  int i = 0;
  for (double v : a) p.a(i++) = v;
  p.subgrad_at_zero = subgrad;
  return p;
}

}  // namespace

TEST_CASE("second layer layout: half +1/sqrt(m), half -1/sqrt(m)") {
  const auto p = init_network(2, 3, 0.5, 0.0, Rng(1));
  CHECK(p.a(0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(p.a(1) == doctest::Approx(-1.0 / std::sqrt(2.0)));

  const auto q = init_network(500, 2, std::sqrt(1.0 / (32.0 * 500.0)), 0.0, Rng(2));
  int pos = 0, neg = 0;
  for (int j = 0; j < q.m(); ++j) (q.a(j) > 0 ? pos : neg)++;
  CHECK(pos == 250);
  CHECK(neg == 250);

  const auto odd = init_network(5, 2, 0.1, 0.0, Rng(3));
  CHECK(odd.a(4) == 0.0);
  pos = neg = 0;
  for (int j = 0; j < 4; ++j) (odd.a(j) > 0 ? pos : neg)++;
  CHECK(pos == 2);
  CHECK(neg == 2);
}

TEST_CASE("init is deterministic and rejects bad arguments") {
  const auto a = init_network(8, 4, 1e-3, 0.0, Rng(7));
  const auto b = init_network(8, 4, 1e-3, 0.0, Rng(7));
  CHECK((a.W - b.W).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(init_network(8, 4, 0.0, 0.0, Rng(7)), std::invalid_argument);
  CHECK_THROWS_AS(init_network(8, 4, -1.0, 0.0, Rng(7)), std::invalid_argument);
  CHECK_THROWS_AS(init_network(0, 4, 1.0, 0.0, Rng(7)), std::invalid_argument);
}

TEST_CASE("init norms concentrate around omega sqrt(d)") {
  // Row norms within [omega sqrt(d)/2, 3 omega sqrt(d)/2] for all neurons on
  // at least 99 of 100 seeds.
  const int m = 64, d = 100;
  const double omega = 1e-4;
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto p = init_network(m, d, omega, 0.0, Rng(seed));
    bool all = true;
    for (int j = 0; j < m; ++j) {
      const double norm = p.W.row(j).norm();
      all = all && norm >= 0.5 * omega * std::sqrt(d) && norm <= 1.5 * omega * std::sqrt(d);
    }
    ok += all ? 1 : 0;
  }
  CHECK(ok >= 99);
}

TEST_CASE("forward: hand-computed values") {
  const auto p = hand_network({{1, 0}, {0, 1}}, {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)});
  Vector x(2);
  x << 2, 3;
  CHECK(forward(p, x) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));

  const auto zero = hand_network({{0, 0}, {0, 0}}, {0.5, -0.5});
  CHECK(forward(zero, x) == 0.0);
}

TEST_CASE("forward: positive homogeneity and weight-scaling") {
  const auto p = init_network(16, 5, 0.3, 0.0, Rng(5));
  Rng gen(6);
  for (int rep = 0; rep < 20; ++rep) {
    Vector x(5);
    for (int k = 0; k < 5; ++k) x(k) = gen.normal();
    const double c = std::exp(gen.normal());
    CHECK(forward(p, Vector(c * x)) ==
          doctest::Approx(c * forward(p, x)).epsilon(1e-12));
    auto scaled = p;
    scaled.W *= c;
    CHECK(forward(scaled, x) == doctest::Approx(c * forward(p, x)).epsilon(1e-12));
  }
}

TEST_CASE("forward output bound |f| <= ||W||_F ||x||") {
  const auto p = init_network(32, 7, 0.8, 0.0, Rng(8));
  Rng gen(9);
  for (int rep = 0; rep < 50; ++rep) {
    Vector x(7);
    for (int k = 0; k < 7; ++k) x(k) = 3.0 * gen.normal();
    CHECK(std::abs(forward(p, x)) <= p.W.norm() * x.norm() + 1e-12);
    CHECK(hidden_features(p, x).norm() <= p.W.norm() * x.norm() + 1e-12);
  }
}

TEST_CASE("forward rejects dimension mismatch") {
  const auto p = init_network(4, 3, 0.1, 0.0, Rng(1));
  Vector x(2);
  x << 1, 2;
  CHECK_THROWS_AS(forward(p, x), ShapeError);
  Matrix batch(2, 5);
  batch.setZero();
  CHECK_THROWS_AS(forward_batch(p, batch), ShapeError);
}

TEST_CASE("forward_batch equals per-row forward") {
  const auto p = init_network(24, 6, 0.4, 0.0, Rng(10));
  Rng gen(11);
  Matrix batch(100, 6);
  for (Eigen::Index i = 0; i < batch.size(); ++i) batch(i / 6, i % 6) = gen.normal();
  const Vector out = forward_batch(p, batch);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 100; ++i)
    worst = std::max(worst, std::abs(out(i) - forward(p, batch.row(i).transpose())));
  CHECK(worst < 1e-12);

  Matrix single = batch.topRows(1);
  CHECK(forward_batch(p, single)(0) ==
        doctest::Approx(forward(p, single.row(0).transpose())).epsilon(1e-12));
  const auto zero = hand_network({{0, 0}, {0, 0}}, {0.5, -0.5});
  Matrix zbatch(3, 2);
  zbatch.setRandom();
  CHECK(forward_batch(zero, zbatch).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("subnetwork decomposition f = f^J + f^{J^c}") {
  const auto p = init_network(17, 4, 0.6, 0.0, Rng(12));
  Rng gen(13);
  Vector x(4);
  for (int k = 0; k < 4; ++k) x(k) = gen.normal();

  CHECK(subnetwork_forward(p, {}, x) == 0.0);
  std::vector<std::size_t> all;
  for (std::size_t j = 0; j < 17; ++j) all.push_back(j);
  CHECK(subnetwork_forward(p, all, x) == doctest::Approx(forward(p, x)).epsilon(1e-12));

  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::size_t> J, Jc;
    for (std::size_t j = 0; j < 17; ++j) (gen.uniform01() < 0.5 ? J : Jc).push_back(j);
    const double whole = forward(p, x);
    const double split = subnetwork_forward(p, J, x) + subnetwork_forward(p, Jc, x);
    CHECK(std::abs(whole - split) < 1e-12);
  }
  CHECK_THROWS_AS(subnetwork_forward(p, {17}, x), std::out_of_range);
}

TEST_CASE("hidden features and activation pattern") {
  const auto p = hand_network({{1, 0}, {0, 1}}, {0.5, -0.5});
  Vector x(2);
  x << -1, 2;
  const Vector h = hidden_features(p, x);
  CHECK(h(0) == 0.0);
  CHECK(h(1) == 2.0);

  const auto zero = hand_network({{0, 0}, {0, 0}}, {0.5, -0.5}, 0.5);
  const Vector pat = activation_pattern(zero, x);
  CHECK(pat(0) == 0.5);
  CHECK(pat(1) == 0.5);

  auto zero0 = zero;
  zero0.subgrad_at_zero = 0.0;
  CHECK(activation_pattern(zero0, x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("activation pattern almost never hits the subgradient value") {
  const auto p = init_network(8, 3, 0.2, 0.5, Rng(20));
  Rng gen(21);
  int boundary = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    Vector x(3);
    for (int k = 0; k < 3; ++k) x(k) = gen.normal();
    const Vector pat = activation_pattern(p, x);
    for (int j = 0; j < 8; ++j)
      if (pat(j) == 0.5) ++boundary;
  }
  CHECK(boundary == 0);
}

TEST_CASE("nu-oracle network computes (|<mu1,x>| - |<mu2,x>|)/2") {
  const auto spec = make_spec(4, 0.1, 0.0, MeanMode::random_orthonormal, Rng(3));
  const auto p = nu_oracle_network(spec);
  Rng gen(14);
  for (int rep = 0; rep < 50; ++rep) {
    Vector x(4);
    for (int k = 0; k < 4; ++k) x(k) = gen.normal();
    const double nu = std::abs(spec.mu1.dot(x)) - std::abs(spec.mu2.dot(x));
    CHECK(forward(p, x) == doctest::Approx(0.5 * nu).epsilon(1e-12));
  }
}

TEST_CASE("checkpoint round-trip reproduces forward outputs") {
  namespace fs = std::filesystem;
  const auto p = init_network(13, 6, 0.123, 0.25, Rng(15));
  const fs::path path = fs::temp_directory_path() / "xorlab_ckpt_test.nn";
  save_checkpoint(p, path, "unit-test");
  const auto q = load_checkpoint(path);
  REQUIRE(q.m() == p.m());
  REQUIRE(q.dim() == p.dim());
  CHECK(q.subgrad_at_zero == p.subgrad_at_zero);
  CHECK((q.W - p.W).cwiseAbs().maxCoeff() == 0.0);
  CHECK((q.a - p.a).cwiseAbs().maxCoeff() == 0.0);
  Rng gen(16);
  for (int rep = 0; rep < 10; ++rep) {
    Vector x(6);
    for (int k = 0; k < 6; ++k) x(k) = gen.normal();
    CHECK(forward(q, x) == forward(p, x));
  }
  fs::remove(path);
}

TEST_CASE("forward agrees with the brute-force oracle") {
  const auto p = init_network(11, 5, 0.7, 0.0, Rng(17));
  Rng gen(18);
  for (int rep = 0; rep < 30; ++rep) {
    Vector x(5);
    for (int k = 0; k < 5; ++k) x(k) = gen.normal();
    CHECK(forward(p, x) == doctest::Approx(oracle::forward(p, x)).epsilon(1e-12));
  }
}
