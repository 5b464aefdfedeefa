#include "xorlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xorlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double relu_deriv(double z, double subgrad_at_zero) {
  return z > 0.0 ? 1.0 : (z < 0.0 ? 0.0 : subgrad_at_zero);
}

// Opposing cluster within the same class: +mu1 <-> -mu1, +mu2 <-> -mu2.
Cluster opposing(Cluster c) {
  switch (c) {
    case Cluster::pos_mu1: return Cluster::neg_mu1;
    case Cluster::neg_mu1: return Cluster::pos_mu1;
    case Cluster::pos_mu2: return Cluster::neg_mu2;
    case Cluster::neg_mu2: return Cluster::pos_mu2;
  }
  throw std::logic_error("bad cluster value");
}

bool in_mu1_class(Cluster c) {
  return c == Cluster::pos_mu1 || c == Cluster::neg_mu1;
}

}  // namespace

void validate(const DiagnosticsConfig& cfg) {
  if (!(cfg.c0 > 0 && cfg.correlation_threshold_scale > 0 && cfg.edge_constant > 0 &&
        cfg.gamma > 0 && cfg.delta > 0 && cfg.delta < 1 && cfg.tolerance > 0))
    throw std::invalid_argument("diagnostics constants must be strictly positive");
}

std::vector<std::size_t> CandidateSets::all() const {
  std::vector<std::size_t> out;
  for (const auto& s : sets) out.insert(out.end(), s.begin(), s.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t CandidateSets::total_size() const {
  std::size_t total = 0;
  for (const auto& s : sets) total += s.size();
  return total;
}

CandidateSets candidate_sets(const NetworkParams& params0, const DistributionSpec& spec,
                             const DiagnosticsConfig& cfg) {
  validate(cfg);
  if (params0.dim() != spec.d) throw ShapeError("network dimension does not match spec");
  const double threshold = cfg.correlation_threshold_scale / std::sqrt(spec.d);

  CandidateSets out;
  const Vector p1 = params0.W * spec.mu1;
  const Vector p2 = params0.W * spec.mu2;
  for (int j = 0; j < params0.m(); ++j) {
    const double norm = params0.W.row(j).norm();
    if (norm == 0.0) continue;
    if (params0.a(j) > 0.0) {
      const double nc = p1(j) / norm;
      if (nc >= threshold)
        out.for_cluster(Cluster::pos_mu1).push_back(static_cast<std::size_t>(j));
      else if (-nc >= threshold)
        out.for_cluster(Cluster::neg_mu1).push_back(static_cast<std::size_t>(j));
    } else if (params0.a(j) < 0.0) {
      const double nc = p2(j) / norm;
      if (nc >= threshold)
        out.for_cluster(Cluster::pos_mu2).push_back(static_cast<std::size_t>(j));
      else if (-nc >= threshold)
        out.for_cluster(Cluster::neg_mu2).push_back(static_cast<std::size_t>(j));
    }
  }
  return out;
}

AlignmentReport alignment_check(const NetworkParams& params, const Dataset& dataset,
                                const CandidateSets& sets) {
  if (dataset.dim() != params.dim()) throw ShapeError("dataset dimension does not match network");
  const Matrix pre = dataset.points * params.W.transpose();  // n x m

  std::array<std::vector<std::size_t>, kNumClusters> members;
  for (std::size_t i = 0; i < dataset.n(); ++i)
    members[static_cast<int>(dataset.cluster_of[i])].push_back(i);

  AlignmentReport report;
  bool all = true;
  for (int ci = 0; ci < kNumClusters; ++ci) {
    const auto c = static_cast<Cluster>(ci);
    const auto& J = sets.for_cluster(c);
    const auto& on = members[ci];
    const auto& off = members[static_cast<int>(opposing(c))];
    AlignmentSetReport& sr = report.sets[ci];
    sr.set_size = J.size();
    sr.on_vacuous = on.empty();
    sr.off_vacuous = off.empty();
    sr.satisfied = 0;
    for (std::size_t j : J) {
      bool ok = true;
      for (std::size_t k : on) {
        if (relu_deriv(pre(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)),
                       params.subgrad_at_zero) != 1.0) {
          ok = false;
          break;
        }
      }
      if (ok) {
        for (std::size_t k : off) {
          if (relu_deriv(pre(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)),
                         params.subgrad_at_zero) != 0.0) {
            ok = false;
            break;
          }
        }
      }
      if (ok) ++sr.satisfied;
    }
    sr.fraction = J.empty() ? 1.0 : static_cast<double>(sr.satisfied) / static_cast<double>(J.size());
    all = all && sr.fraction == 1.0;
  }
  report.all_hold = all;
  return report;
}

AlmostOrthReport almost_orth_check(const ProjectionSeries& series, const CandidateSets& sets,
                                   const Vector& a, double alpha, int tau) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (tau < 0) throw std::invalid_argument("tau must be >= 0");
  if (!series.contiguous_through(tau))
    throw IncompleteTraceError("projection series is missing iterations through tau");

  auto ratio_at = [&](int t) {
    double worst = 0.0;
    for (int ci = 0; ci < kNumClusters; ++ci) {
      const auto c = static_cast<Cluster>(ci);
      // J_{+-mu1} neurons are constrained against mu2 and vice versa.
      const int col = in_mu1_class(c) ? 1 : 0;
      for (std::size_t j : sets.for_cluster(c)) {
        const double cap = 3.0 * alpha * std::abs(a(static_cast<Eigen::Index>(j)));
        const double value =
            std::abs(series.projections[static_cast<std::size_t>(t)](static_cast<Eigen::Index>(j), col));
        worst = std::max(worst, cap > 0.0 ? value / cap : (value > 0.0 ? kInf : 0.0));
      }
    }
    return worst;
  };

  AlmostOrthReport report;
  report.t0_ratio = ratio_at(0);
  double worst = 0.0;
  for (int t = 1; t <= tau; ++t) worst = std::max(worst, ratio_at(t));
  report.max_violation_ratio = worst;
  report.holds = worst <= 1.0;
  return report;
}

AlmostOrthReport almost_orth_check(const TrainTrace& trace, const DistributionSpec& spec,
                                   const CandidateSets& sets, double alpha, int tau) {
  const Vector& a = trace.snapshots.front().second.a;
  if (trace.projections && trace.projections->contiguous_through(tau))
    return almost_orth_check(*trace.projections, sets, a, alpha, tau);
  ProjectionSeries series;
  for (int t = 0; t <= tau; ++t) {
    if (!trace.has_snapshot(t))
      throw IncompleteTraceError("trace has neither projections nor snapshots through tau");
    series.record(t, trace.at(t), spec);
  }
  return almost_orth_check(series, sets, a, alpha, tau);
}

NormalizedCorrelations normalized_correlations(const NetworkParams& params, const Vector& mu) {
  if (mu.size() != params.dim()) throw ShapeError("mu dimension does not match network");
  NormalizedCorrelations out;
  out.value.resize(params.m());
  const Vector proj = params.W * mu;
  for (int j = 0; j < params.m(); ++j) {
    const double norm = params.W.row(j).norm();
    if (norm == 0.0) {
      out.value(j) = 0.0;
      out.zero_norm.push_back(static_cast<std::size_t>(j));
    } else {
      out.value(j) = proj(j) / norm;
    }
  }
  return out;
}

double median_over(const Vector& values, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return kNaN;
  std::vector<double> v;
  v.reserve(idx.size());
  for (std::size_t j : idx) v.push_back(values(static_cast<Eigen::Index>(j)));
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

EdgeReport edge_counts(const NetworkParams& params0, const Dataset& dataset,
                       const CandidateSets& sets, const DiagnosticsConfig& cfg) {
  validate(cfg);
  const Matrix pre = dataset.points * params0.W.transpose();

  std::array<std::vector<std::size_t>, kNumClusters> clean_members;
  for (std::size_t i : dataset.clean_set)
    clean_members[static_cast<int>(dataset.cluster_of[i])].push_back(i);

  EdgeReport report;
  double min_edge = kInf;
  for (int ci = 0; ci < kNumClusters; ++ci) {
    const auto c = static_cast<Cluster>(ci);
    const auto& on = clean_members[ci];
    const auto& off = clean_members[static_cast<int>(opposing(c))];
    for (std::size_t j : sets.for_cluster(c)) {
      double edge = 0.0;
      for (std::size_t i : on)
        edge += relu_deriv(pre(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                           params0.subgrad_at_zero);
      for (std::size_t i : off)
        edge -= relu_deriv(pre(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                           params0.subgrad_at_zero);
      report.neuron.push_back(j);
      report.captured.push_back(c);
      report.edge.push_back(edge);
      min_edge = std::min(min_edge, edge / static_cast<double>(dataset.n()));
    }
  }
  report.min_edge_over_n = report.edge.empty() ? kNaN : min_edge;
  report.pass = !report.edge.empty() && min_edge >= cfg.edge_constant;
  return report;
}

MarginReport margin_report(const NetworkParams& params, const Dataset& dataset,
                           const std::vector<std::size_t>* subnetwork) {
  if (dataset.dim() != params.dim()) throw ShapeError("dataset dimension does not match network");

  MarginReport report;
  const auto n = static_cast<Eigen::Index>(dataset.n());
  report.margins.resize(n);
  if (subnetwork == nullptr) {
    const Vector outputs = forward_batch(params, dataset.points);
    for (Eigen::Index i = 0; i < n; ++i)
      report.margins(i) = dataset.labels[static_cast<std::size_t>(i)] * outputs(i);
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      report.margins(i) =
          dataset.labels[static_cast<std::size_t>(i)] *
          subnetwork_forward(params, *subnetwork, dataset.points.row(i).transpose());
  }

  double min_clean = kInf, max_noisy = -kInf;
  for (std::size_t i : dataset.clean_set)
    min_clean = std::min(min_clean, report.margins(static_cast<Eigen::Index>(i)));
  for (std::size_t i : dataset.noisy_set)
    max_noisy = std::max(max_noisy, report.margins(static_cast<Eigen::Index>(i)));
  report.min_clean = dataset.clean_set.empty() ? kNaN : min_clean;
  report.max_noisy = dataset.noisy_set.empty() ? kNaN : max_noisy;
  report.clean_all_positive = !dataset.clean_set.empty() && min_clean > 0.0;
  report.noisy_all_negative = !dataset.noisy_set.empty() && max_noisy < 0.0;
  report.clean_all_correct = dataset.clean_set.empty() || min_clean > 0.0;
  report.noisy_all_incorrect = dataset.noisy_set.empty() || max_noisy <= 0.0;
  return report;
}

namespace {

constexpr std::size_t kMonteCarloChunk = 4096;

template <typename Classify>
ErrorEstimate monte_carlo_error(const DistributionSpec& spec, std::size_t n_test, const Rng& rng,
                                Classify&& value_of) {
  if (n_test < 1) throw std::invalid_argument("n_test must be >= 1");
  validate(spec);
  std::size_t errors = 0;
  Matrix chunk;
  std::vector<int> labels;
  for (std::size_t begin = 0; begin < n_test; begin += kMonteCarloChunk) {
    const std::size_t count = std::min(kMonteCarloChunk, n_test - begin);
    chunk.resize(static_cast<Eigen::Index>(count), spec.d);
    labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const Sample s = sample_point(spec, rng, begin + i);
      chunk.row(static_cast<Eigen::Index>(i)) = s.x.transpose();
      labels[i] = s.label;
    }
    const Vector values = value_of(chunk);
    for (std::size_t i = 0; i < count; ++i)
      if (labels[i] * values(static_cast<Eigen::Index>(i)) <= 0.0) ++errors;
  }
  ErrorEstimate est;
  est.n = n_test;
  est.value = static_cast<double>(errors) / static_cast<double>(n_test);
  est.std_error = std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(n_test));
  return est;
}

}  // namespace

ErrorEstimate test_error(const NetworkParams& params, const DistributionSpec& spec,
                         std::size_t n_test, const Rng& rng) {
  if (params.dim() != spec.d) throw ShapeError("network dimension does not match spec");
  return monte_carlo_error(spec, n_test, rng,
                           [&](const Matrix& chunk) { return forward_batch(params, chunk); });
}

ErrorEstimate reference_error(const DistributionSpec& spec, std::size_t n_test, const Rng& rng) {
  return monte_carlo_error(spec, n_test, rng, [&](const Matrix& chunk) {
    return Vector((chunk * spec.mu1).cwiseAbs() - (chunk * spec.mu2).cwiseAbs());
  });
}

FeatureDisplacement feature_displacement(const NetworkParams& params0,
                                         const NetworkParams& paramsT,
                                         const Dataset& dataset) {
  if (params0.m() != paramsT.m() || params0.dim() != paramsT.dim())
    throw ShapeError("snapshots disagree on network shape");
  if (dataset.dim() != params0.dim()) throw ShapeError("dataset dimension does not match network");

  const Matrix phi0 = (dataset.points * params0.W.transpose()).cwiseMax(0.0);
  const Matrix phiT = (dataset.points * paramsT.W.transpose()).cwiseMax(0.0);

  FeatureDisplacement out;
  const auto n = static_cast<Eigen::Index>(dataset.n());
  out.ratio.resize(n);
  double min_ratio = kInf;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = phi0.row(i).norm();
    const double num = (phiT.row(i) - phi0.row(i)).norm();
    if (denom == 0.0) {
      out.ratio(i) = kInf;
      out.undefined.push_back(static_cast<std::size_t>(i));
    } else {
      out.ratio(i) = num / denom;
    }
    min_ratio = std::min(min_ratio, out.ratio(i));
  }
  out.min_ratio = min_ratio;
  return out;
}

double generalization_bound(double gamma, std::size_t n, double delta,
                            double empirical_ramp_risk, double alpha) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  const double nd = static_cast<double>(n);
  return empirical_ramp_risk + 4.0 / (gamma * std::sqrt(nd)) +
         std::sqrt(2.0 * std::log(4.0 / delta) / nd);
}

double ramp_risk(const NetworkParams& params, const Dataset& dataset, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  const MarginReport mr = margin_report(params, dataset);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < mr.margins.size(); ++i)
    acc += std::min(1.0, std::max(0.0, 1.0 - mr.margins(i) / gamma));
  return acc / static_cast<double>(mr.margins.size());
}

NormGrowthReport norm_growth_report(const TrainTrace& trace, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (trace.snapshots.empty()) throw IncompleteTraceError("trace has no snapshots");
  const NetworkParams& p0 = trace.snapshots.front().second;
  double max_abs_a = 0.0;
  for (int j = 0; j < p0.m(); ++j) max_abs_a = std::max(max_abs_a, std::abs(p0.a(j)));

  NormGrowthReport report;
  for (const IterationStats& st : trace.stats) {
    if (st.t < 1) continue;
    const double cap = 2.0 * alpha * st.t;
    report.max_neuron_ratio = std::max(report.max_neuron_ratio,
                                       st.max_neuron_norm / (cap * max_abs_a));
    report.max_frob_ratio = std::max(report.max_frob_ratio, st.frob_norm / cap);
  }
  report.holds = report.max_neuron_ratio <= 1.0 && report.max_frob_ratio <= 1.0;
  return report;
}

IterationDiagnostics evaluate_iteration(const TrainTrace& trace, int t, const Dataset& dataset,
                                        const DistributionSpec& spec, const CandidateSets& sets,
                                        const DiagnosticsConfig& cfg, double alpha,
                                        std::size_t n_test, const Rng& rng) {
  validate(cfg);
  const NetworkParams& params = trace.at(t);

  IterationDiagnostics diag;
  diag.t = t;
  for (int ci = 0; ci < kNumClusters; ++ci)
    diag.J_sizes[ci] = sets.sets[ci].size();
  diag.alignment = alignment_check(params, dataset, sets);
  diag.almost_orth = almost_orth_check(trace, spec, sets, alpha, t);

  const MarginReport mr = margin_report(params, dataset);
  diag.min_clean_margin = mr.min_clean;
  diag.max_noisy_margin = mr.max_noisy;
  diag.clean_all_correct = mr.clean_all_correct;
  diag.noisy_all_incorrect = mr.noisy_all_incorrect;

  const ErrorEstimate err = test_error(params, spec, n_test, rng.substream(static_cast<std::uint64_t>(t)));
  diag.test_error = err.value;
  diag.test_error_se = err.std_error;

  diag.feature_displacement_min = feature_displacement(trace.initial(), params, dataset).min_ratio;
  diag.gen_bound = generalization_bound(cfg.gamma, dataset.n(), cfg.delta,
                                        ramp_risk(params, dataset, cfg.gamma), alpha);
  return diag;
}

}  // namespace xorlab
