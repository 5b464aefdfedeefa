#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "xorlab/diagnostics.hpp"
#include "xorlab/experiment.hpp"

namespace py = pybind11;
using namespace xorlab;

namespace {

MeanMode mean_mode_of(const std::string& s) {
  if (s == "canonical") return MeanMode::canonical;
  if (s == "random_orthonormal") return MeanMode::random_orthonormal;
  throw std::invalid_argument("mean_mode must be canonical or random_orthonormal");
}

NoiseMode noise_mode_of(const std::string& s) {
  if (s == "uniform_flip") return NoiseMode::uniform_flip;
  if (s == "none") return NoiseMode::none;
  throw std::invalid_argument("noise_mode must be uniform_flip or none");
}

SnapshotPolicy snapshot_policy_of(const std::string& s) {
  if (s == "all") return SnapshotPolicy::all;
  if (s == "endpoints") return SnapshotPolicy::endpoints;
  if (s == "every_k") return SnapshotPolicy::every_k;
  throw std::invalid_argument("snapshot_policy must be all, endpoints, or every_k");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Noisy 2-XOR cluster training and diagnostics lab";

  py::class_<DistributionSpec>(m, "DistributionSpec")
      .def_readonly("d", &DistributionSpec::d)
      .def_readonly("mu1", &DistributionSpec::mu1)
      .def_readonly("mu2", &DistributionSpec::mu2)
      .def_readonly("sigma", &DistributionSpec::sigma)
      .def_readonly("eta", &DistributionSpec::eta);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("points", &Dataset::points)
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("clean_labels", &Dataset::clean_labels)
      .def_readonly("noisy_set", &Dataset::noisy_set)
      .def_readonly("clean_set", &Dataset::clean_set)
      .def_property_readonly("clusters",
                             [](const Dataset& ds) {
                               std::vector<std::string> out;
                               out.reserve(ds.n());
                               for (auto c : ds.cluster_of) out.emplace_back(to_string(c));
                               return out;
                             })
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("d", &Dataset::dim);

  py::class_<NetworkParams>(m, "NetworkParams")
      .def_readwrite("W", &NetworkParams::W)
      .def_readonly("a", &NetworkParams::a)
      .def_readonly("subgrad_at_zero", &NetworkParams::subgrad_at_zero)
      .def_property_readonly("m", &NetworkParams::m)
      .def_property_readonly("d", &NetworkParams::dim);

  py::class_<IterationStats>(m, "IterationStats")
      .def_readonly("t", &IterationStats::t)
      .def_readonly("risk", &IterationStats::risk)
      .def_readonly("clean_acc", &IterationStats::clean_acc)
      .def_readonly("noisy_acc", &IterationStats::noisy_acc)
      .def_readonly("train_acc", &IterationStats::train_acc)
      .def_readonly("frob_norm", &IterationStats::frob_norm)
      .def_readonly("max_neuron_norm", &IterationStats::max_neuron_norm);

  py::class_<TrainTrace>(m, "TrainTrace")
      .def_readonly("stats", &TrainTrace::stats)
      .def("params_at", &TrainTrace::at, py::arg("t"), py::return_value_policy::copy)
      .def("has_snapshot", &TrainTrace::has_snapshot)
      .def_property_readonly("final_params",
                             [](const TrainTrace& tr) { return tr.final_params(); });

  py::class_<ErrorEstimate>(m, "ErrorEstimate")
      .def_readonly("value", &ErrorEstimate::value)
      .def_readonly("std_error", &ErrorEstimate::std_error)
      .def_readonly("n", &ErrorEstimate::n);

  py::class_<MarginReport>(m, "MarginReport")
      .def_readonly("margins", &MarginReport::margins)
      .def_readonly("min_clean", &MarginReport::min_clean)
      .def_readonly("max_noisy", &MarginReport::max_noisy)
      .def_readonly("clean_all_positive", &MarginReport::clean_all_positive)
      .def_readonly("noisy_all_negative", &MarginReport::noisy_all_negative)
      .def_readonly("clean_all_correct", &MarginReport::clean_all_correct)
      .def_readonly("noisy_all_incorrect", &MarginReport::noisy_all_incorrect);

  m.def(
      "make_spec",
      [](int d, double sigma, double eta, const std::string& mean_mode, std::uint64_t seed,
         const std::string& noise_mode) {
        return make_spec(d, sigma, eta, mean_mode_of(mean_mode), Rng(seed),
                         noise_mode_of(noise_mode));
      },
      py::arg("d"), py::arg("sigma"), py::arg("eta"), py::arg("mean_mode") = "canonical",
      py::arg("seed") = 0, py::arg("noise_mode") = "uniform_flip");

  m.def(
      "sample_dataset",
      [](const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
        return sample_dataset(spec, n, Rng(seed));
      },
      py::arg("spec"), py::arg("n"), py::arg("seed"));

  m.def(
      "init_network",
      [](int m_, int d, double omega_init, double subgrad_at_zero, std::uint64_t seed) {
        return init_network(m_, d, omega_init, subgrad_at_zero, Rng(seed));
      },
      py::arg("m"), py::arg("d"), py::arg("omega_init"), py::arg("subgrad_at_zero") = 0.0,
      py::arg("seed") = 0);

  m.def("forward", &forward, py::arg("params"), py::arg("x"));
  m.def("forward_batch", &forward_batch, py::arg("params"), py::arg("points"));
  m.def("subnetwork_forward", &subnetwork_forward, py::arg("params"), py::arg("J"), py::arg("x"));
  m.def("hidden_features", &hidden_features, py::arg("params"), py::arg("x"));
  m.def("activation_pattern", &activation_pattern, py::arg("params"), py::arg("x"));
  m.def("nu_oracle_network", &nu_oracle_network, py::arg("spec"));
  m.def("save_checkpoint", &save_checkpoint, py::arg("params"), py::arg("path"),
        py::arg("provenance") = std::string{});
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  m.def("logistic_loss", py::vectorize(logistic_loss), py::arg("z"));
  m.def("logistic_loss_deriv", py::vectorize(logistic_loss_deriv), py::arg("z"));
  m.def("empirical_risk", &empirical_risk, py::arg("params"), py::arg("dataset"));
  m.def("gradient", &gradient, py::arg("params"), py::arg("dataset"));
  m.def("gd_step", &gd_step, py::arg("params"), py::arg("dataset"), py::arg("alpha"));
  m.def("theorem_schedule", &theorem_schedule, py::arg("alpha"));

  m.def(
      "train",
      [](const Dataset& dataset, int m_, double alpha, int T, double omega_init,
         std::uint64_t seed, const std::string& snapshot_policy, int snapshot_stride,
         double subgrad_at_zero) {
        TrainConfig cfg;
        cfg.alpha = alpha;
        cfg.T = T;
        cfg.omega_init = omega_init;
        cfg.seed = seed;
        cfg.snapshot_policy = snapshot_policy_of(snapshot_policy);
        cfg.snapshot_stride = snapshot_stride;
        cfg.subgrad_at_zero = subgrad_at_zero;
        return train(dataset, m_, cfg);
      },
      py::arg("dataset"), py::arg("m"), py::arg("alpha"), py::arg("T"), py::arg("omega_init"),
      py::arg("seed") = 0, py::arg("snapshot_policy") = "all", py::arg("snapshot_stride") = 10,
      py::arg("subgrad_at_zero") = 0.0);

  m.def(
      "candidate_sets",
      [](const NetworkParams& params0, const DistributionSpec& spec, double threshold_scale) {
        DiagnosticsConfig cfg;
        if (threshold_scale > 0) cfg.correlation_threshold_scale = threshold_scale;
        const auto sets = candidate_sets(params0, spec, cfg);
        py::dict out;
        for (int ci = 0; ci < kNumClusters; ++ci)
          out[to_string(static_cast<Cluster>(ci))] = sets.sets[ci];
        return out;
      },
      py::arg("params0"), py::arg("spec"), py::arg("threshold_scale") = -1.0);

  m.def(
      "normalized_correlations",
      [](const NetworkParams& params, const Vector& mu) {
        return normalized_correlations(params, mu).value;
      },
      py::arg("params"), py::arg("mu"));

  m.def("margin_report", [](const NetworkParams& params,
                            const Dataset& ds) { return margin_report(params, ds); },
        py::arg("params"), py::arg("dataset"));

  m.def(
      "test_error",
      [](const NetworkParams& params, const DistributionSpec& spec, std::size_t n_test,
         std::uint64_t seed) { return test_error(params, spec, n_test, Rng(seed)); },
      py::arg("params"), py::arg("spec"), py::arg("n_test"), py::arg("seed"));

  m.def(
      "reference_error",
      [](const DistributionSpec& spec, std::size_t n_test, std::uint64_t seed) {
        return reference_error(spec, n_test, Rng(seed));
      },
      py::arg("spec"), py::arg("n_test"), py::arg("seed"));

  m.def(
      "feature_displacement",
      [](const NetworkParams& p0, const NetworkParams& pT, const Dataset& ds) {
        return feature_displacement(p0, pT, ds).ratio;
      },
      py::arg("params0"), py::arg("paramsT"), py::arg("dataset"));

  m.def("generalization_bound", &generalization_bound, py::arg("gamma"), py::arg("n"),
        py::arg("delta"), py::arg("empirical_ramp_risk"), py::arg("alpha"));
  m.def("ramp_risk", &ramp_risk, py::arg("params"), py::arg("dataset"), py::arg("gamma"));
  m.def("dataset_accuracy", &dataset_accuracy, py::arg("params"), py::arg("dataset"));

  m.def("preset_json", [](const std::string& name) { return to_json(preset(name)).dump(); },
        py::arg("name"));
  m.def(
      "run_config_json",
      [](const std::string& config_json) {
        const auto config = config_from_json(nlohmann::json::parse(config_json));
        return run(config).summary.dump();
      },
      py::arg("config_json"),
      "Runs the full pipeline for a JSON config and returns the summary as JSON.");
}
