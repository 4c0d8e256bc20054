#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <vector>

#include "batchmac/attempt.hpp"
#include "batchmac/chain.hpp"
#include "batchmac/error.hpp"
#include "batchmac/experiment.hpp"
#include "batchmac/protocol.hpp"
#include "batchmac/sim.hpp"

namespace py = pybind11;
using namespace batchmac;

namespace {

std::vector<double> to_vector(const Pmf& p) { return {p.probs().begin(), p.probs().end()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Batch-arrival IEEE 802.15.4 slotted CSMA/CA models: attempt profiles, "
              "transient Markov chains and a slot-accurate simulator.";

    auto base_error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<ModelError>(m, "ModelError", base_error.ptr());
    py::register_exception<IoError>(m, "IoError", base_error.ptr());

    // -- protocol -----------------------------------------------------------
    py::enum_<BackoffSemantics>(m, "BackoffSemantics")
        .value("Naive", BackoffSemantics::Naive)
        .value("Corrected", BackoffSemantics::Corrected);
    py::enum_<RetryPolicy>(m, "RetryPolicy")
        .value("NackDone", RetryPolicy::NackDone)
        .value("CollisionContinue", RetryPolicy::CollisionContinue);

    py::class_<ProtocolParams>(m, "ProtocolParams")
        .def_property_readonly("be_min", &ProtocolParams::be_min)
        .def_property_readonly("be_max", &ProtocolParams::be_max)
        .def_property_readonly("nb_max", &ProtocolParams::nb_max)
        .def_property_readonly("cw", &ProtocolParams::cw)
        .def_property_readonly("packet_len", &ProtocolParams::packet_len)
        .def_property_readonly("n_stations", &ProtocolParams::n_stations)
        .def("__eq__", [](const ProtocolParams& a, const ProtocolParams& b) { return a == b; })
        .def("__repr__", [](const ProtocolParams& p) {
            return "ProtocolParams(be_min=" + std::to_string(p.be_min()) +
                   ", be_max=" + std::to_string(p.be_max()) +
                   ", nb_max=" + std::to_string(p.nb_max()) + ", cw=" + std::to_string(p.cw()) +
                   ", packet_len=" + std::to_string(p.packet_len()) +
                   ", n_stations=" + std::to_string(p.n_stations()) + ")";
        });

    m.def(
        "validate",
        [](std::int64_t be_min, std::int64_t be_max, std::int64_t nb_max, std::int64_t cw,
           std::int64_t packet_len, std::int64_t n_stations) {
            return validate(RawParams{be_min, be_max, nb_max, cw, packet_len, n_stations});
        },
        py::arg("be_min") = 3, py::arg("be_max") = 5, py::arg("nb_max") = 4, py::arg("cw") = 1,
        py::arg("packet_len") = 1, py::arg("n_stations") = 1,
        "Validate a parameter record; raises InputError naming the first bad field.");
    m.def("window_size", &window_size, py::arg("params"), py::arg("k"));

    // -- attempt ------------------------------------------------------------
    m.def("uniform_backoff_pmf",
          [](const ProtocolParams& p, int k) { return to_vector(uniform_backoff_pmf(p, k)); },
          py::arg("params"), py::arg("k"));
    m.def("convolve",
          [](std::vector<double> p, std::vector<double> q) {
              return to_vector(convolve(Pmf(std::move(p)), Pmf(std::move(q))));
          },
          py::arg("p"), py::arg("q"));

    py::class_<AttemptProfile>(m, "AttemptProfile")
        .def_readonly("params", &AttemptProfile::params)
        .def_readonly("semantics", &AttemptProfile::semantics)
        .def_readonly("a", &AttemptProfile::a)
        .def_readonly("t_max", &AttemptProfile::t_max)
        .def_property_readonly("stage_pmfs", [](const AttemptProfile& p) {
            std::vector<std::vector<double>> out;
            for (const Pmf& d : p.stage_pmfs) out.push_back(to_vector(d));
            return out;
        });
    m.def(
        "attempt_profile",
        [](const ProtocolParams& p, BackoffSemantics s, std::int64_t cap) {
            return attempt_profile(p, s, AttemptOptions{cap});
        },
        py::arg("params"), py::arg("semantics") = BackoffSemantics::Corrected,
        py::arg("slot_cap") = AttemptOptions{}.slot_cap);
    m.def("max_reach_slot", &max_reach_slot, py::arg("params"),
          py::arg("semantics") = BackoffSemantics::Corrected);
    m.def("corrected_t_max_closed_form", &corrected_t_max_closed_form, py::arg("params"));

    // -- chain --------------------------------------------------------------
    py::enum_<chain::KernelKind>(m, "KernelKind")
        .value("Original", chain::KernelKind::Original)
        .value("Improved", chain::KernelKind::Improved);

    py::class_<chain::TransitionWeights>(m, "TransitionWeights")
        .def_readonly("s", &chain::TransitionWeights::s)
        .def_readonly("w", &chain::TransitionWeights::w)
        .def_readonly("c", &chain::TransitionWeights::c)
        .def_readonly("f", &chain::TransitionWeights::f)
        .def_readonly("eta", &chain::TransitionWeights::eta)
        .def_readonly("xi", &chain::TransitionWeights::xi);

    m.def("channel_busy_xi", &chain::channel_busy_xi, py::arg("params"),
          py::arg("mean_window") = py::none());
    m.def("transition_weights", &chain::transition_weights, py::arg("i"), py::arg("t"),
          py::arg("profile"), py::arg("xi"));

    py::class_<chain::TransientResult>(m, "TransientResult")
        .def_readonly("kind", &chain::TransientResult::kind)
        .def_readonly("success_renewal", &chain::TransientResult::success_renewal)
        .def_readonly("success_leibnitz", &chain::TransientResult::success_leibnitz)
        .def_readonly("residual_mass", &chain::TransientResult::residual_mass)
        .def_readonly("completion_cdf", &chain::TransientResult::completion_cdf)
        .def_property_readonly("horizon", &chain::TransientResult::horizon)
        .def_property_readonly("expected_remaining", [](const chain::TransientResult& r) {
            std::vector<double> out;
            for (const auto& x : r.per_slot) out.push_back(x.expected_remaining());
            return out;
        })
        .def_property_readonly("total_mass", [](const chain::TransientResult& r) {
            std::vector<double> out;
            for (const auto& x : r.per_slot) out.push_back(x.total());
            return out;
        });

    m.def(
        "propagate",
        [](const ProtocolParams& p, chain::KernelKind kind, BackoffSemantics semantics,
           std::optional<double> mean_window, std::optional<std::int64_t> horizon) {
            auto kernel = chain::build_kernel(p, attempt_profile(p, semantics), kind,
                                              chain::KernelOptions{mean_window});
            return chain::propagate(kernel, horizon);
        },
        py::arg("params"), py::arg("kind"), py::arg("semantics") = BackoffSemantics::Corrected,
        py::arg("mean_window") = py::none(), py::arg("horizon") = py::none(),
        "Build the kernel for `params` and propagate it from (N, 0).");

    // -- sim ----------------------------------------------------------------
    py::enum_<sim::Outcome>(m, "Outcome")
        .value("Success", sim::Outcome::Success)
        .value("Collided", sim::Outcome::Collided)
        .value("Failure", sim::Outcome::Failure);

    py::class_<sim::TrialOutcome>(m, "TrialOutcome")
        .def_readonly("successes", &sim::TrialOutcome::successes)
        .def_readonly("collided", &sim::TrialOutcome::collided)
        .def_readonly("failures", &sim::TrialOutcome::failures)
        .def_readonly("completion_slot", &sim::TrialOutcome::completion_slot)
        .def_property_readonly("outcomes", [](const sim::TrialOutcome& o) {
            std::vector<sim::Outcome> out;
            for (const auto& s : o.stations) out.push_back(s.outcome);
            return out;
        })
        .def_property_readonly("finish_slots", [](const sim::TrialOutcome& o) {
            std::vector<std::int64_t> out;
            for (const auto& s : o.stations) out.push_back(s.finish_slot);
            return out;
        })
        .def("__eq__", [](const sim::TrialOutcome& a, const sim::TrialOutcome& b) { return a == b; });

    py::class_<sim::BatchMetrics>(m, "BatchMetrics")
        .def_readonly("trials", &sim::BatchMetrics::trials)
        .def_readonly("mean_successes", &sim::BatchMetrics::mean_successes)
        .def_readonly("mean_collided", &sim::BatchMetrics::mean_collided)
        .def_readonly("mean_failures", &sim::BatchMetrics::mean_failures)
        .def_readonly("stderr_successes", &sim::BatchMetrics::stderr_successes)
        .def_readonly("stderr_collided", &sim::BatchMetrics::stderr_collided)
        .def_readonly("stderr_failures", &sim::BatchMetrics::stderr_failures)
        .def_readonly("completion_histogram", &sim::BatchMetrics::completion_histogram);

    py::class_<sim::ExactMetrics>(m, "ExactMetrics")
        .def_readonly("outcomes", &sim::ExactMetrics::outcomes)
        .def_readonly("expected_successes", &sim::ExactMetrics::expected_successes)
        .def_readonly("expected_collided", &sim::ExactMetrics::expected_collided)
        .def_readonly("expected_failures", &sim::ExactMetrics::expected_failures)
        .def_readonly("completion_pmf", &sim::ExactMetrics::completion_pmf);

    m.def("run_trial", &sim::run_trial, py::arg("params"), py::arg("policy"), py::arg("seed"));
    m.def("run_batch", &sim::run_batch, py::arg("params"), py::arg("policy"), py::arg("trials"),
          py::arg("seed"), py::arg("threads") = 0u, py::call_guard<py::gil_scoped_release>());
    m.def("enumerate_exact", &sim::enumerate_exact, py::arg("params"), py::arg("policy"),
          py::arg("limit") = sim::kDefaultEnumerationLimit);

    // -- experiment ---------------------------------------------------------
    namespace ex = experiment;
    py::enum_<ex::ReportFormat>(m, "ReportFormat")
        .value("Csv", ex::ReportFormat::Csv)
        .value("Json", ex::ReportFormat::Json);

    py::class_<ex::ExperimentConfig>(m, "ExperimentConfig")
        .def_readonly("n_values", &ex::ExperimentConfig::n_values)
        .def_readonly("l_values", &ex::ExperimentConfig::l_values)
        .def_readonly("semantics", &ex::ExperimentConfig::semantics)
        .def_readonly("kernels", &ex::ExperimentConfig::kernels)
        .def_readonly("policy", &ex::ExperimentConfig::policy)
        .def_readonly("trials", &ex::ExperimentConfig::trials)
        .def_readonly("seed", &ex::ExperimentConfig::seed)
        .def_readonly("format", &ex::ExperimentConfig::format);

    py::class_<ex::ComparisonReport>(m, "ComparisonReport")
        .def_property_readonly("rows", [](const ex::ComparisonReport& r) {
            py::list rows;
            for (const auto& row : r.rows) {
                py::dict d;
                d["N"] = row.n;
                d["L"] = row.l;
                d["method"] = row.method;
                d["S_N"] = row.s_n;
                d["S_N_leibnitz"] = row.s_n_leibnitz;
                d["residual_mass"] = row.residual_mass;
                d["p50"] = row.p50;
                d["p90"] = row.p90;
                d["max"] = row.max;
                d["stderr"] = row.stderr_;
                rows.append(d);
            }
            return rows;
        });

    m.def("parse_config", &ex::parse_config, py::arg("text"));
    m.def("run_experiment", &ex::run_experiment, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("format_report", &ex::format_report, py::arg("report"),
          py::arg("format") = ex::ReportFormat::Csv);
    m.def("write_report", &ex::write_report, py::arg("report"), py::arg("format"),
          py::arg("path"));
}
