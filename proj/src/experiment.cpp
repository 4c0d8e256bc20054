#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <string>
#include <tuple>

#include <json.hpp>

#include "batchmac/error.hpp"
#include "batchmac/experiment.hpp"

namespace batchmac::experiment {

namespace {

constexpr double kQuantileSlack = 1e-12;

std::vector<ReportRow> evaluate_point(const ExperimentConfig& cfg, const ProtocolParams& p) {
    std::vector<ReportRow> rows;
    const auto base_row = [&](std::string method) {
        ReportRow r;
        r.n = p.n_stations();
        r.l = p.packet_len();
        r.method = std::move(method);
        return r;
    };

    if (!cfg.kernels.empty()) {
        const AttemptProfile profile = attempt_profile(p, cfg.semantics);
        for (chain::KernelKind kind : cfg.kernels) {
            const chain::Kernel kernel =
                chain::build_kernel(p, profile, kind, chain::KernelOptions{cfg.mean_window});
            const chain::TransientResult result = chain::propagate(kernel);
            ReportRow r = base_row(std::string(chain::to_string(kind)) + "-chain");
            r.s_n = result.success_renewal;
            r.s_n_leibnitz = result.success_leibnitz;
            r.residual_mass = result.residual_mass;
            const Quantiles q = chain_quantiles(result.completion_cdf);
            r.p50 = q.p50;
            r.p90 = q.p90;
            r.max = q.max;
            rows.push_back(std::move(r));
        }
    }

    if (cfg.simulate) {
        const sim::BatchMetrics m = sim::run_batch(p, cfg.policy, cfg.trials, cfg.seed);
        ReportRow r = base_row("sim");
        r.s_n = m.mean_successes;
        r.stderr_ = m.stderr_successes;
        std::map<std::int64_t, double> pmf;
        for (const auto& [slot, count] : m.completion_histogram) {
            pmf[slot] = static_cast<double>(count) / static_cast<double>(m.trials);
        }
        const Quantiles q = pmf_quantiles(pmf);
        r.p50 = q.p50;
        r.p90 = q.p90;
        r.max = q.max;
        rows.push_back(std::move(r));
    }

    const auto space = sim::joint_draw_space(p);
    if (space && *space <= cfg.exact_limit) {
        const sim::ExactMetrics e = sim::enumerate_exact(p, cfg.policy, cfg.exact_limit);
        ReportRow r = base_row("exact");
        r.s_n = e.expected_successes;
        const Quantiles q = pmf_quantiles(e.completion_pmf);
        r.p50 = q.p50;
        r.p90 = q.p90;
        r.max = q.max;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

nlohmann::ordered_json json_cell(const std::optional<double>& v) {
    if (!v) return nullptr;
    // Round-trip through the CSV text so both formats carry identical values.
    return std::strtod(format_number(*v).c_str(), nullptr);
}

}  // namespace

Quantiles chain_quantiles(const std::vector<double>& completion_cdf) {
    Quantiles q;
    // Completion slot c is reached when F(c + 1) first covers the level.
    const auto level = [&](double p) -> std::optional<double> {
        for (std::size_t t = 1; t < completion_cdf.size(); ++t) {
            if (completion_cdf[t] >= p - kQuantileSlack) return static_cast<double>(t - 1);
        }
        return std::nullopt;
    };
    q.p50 = level(0.5);
    q.p90 = level(0.9);
    for (std::size_t t = completion_cdf.size(); t-- > 1;) {
        if (completion_cdf[t] > completion_cdf[t - 1]) {
            q.max = static_cast<double>(t - 1);
            break;
        }
    }
    return q;
}

Quantiles pmf_quantiles(const std::map<std::int64_t, double>& pmf) {
    Quantiles q;
    double cum = 0.0;
    for (const auto& [slot, p] : pmf) {
        cum += p;
        if (!q.p50 && cum >= 0.5 - kQuantileSlack) q.p50 = static_cast<double>(slot);
        if (!q.p90 && cum >= 0.9 - kQuantileSlack) q.p90 = static_cast<double>(slot);
        if (p > 0.0) q.max = static_cast<double>(slot);
    }
    return q;
}

ComparisonReport run_experiment(const ExperimentConfig& config) {
    const std::vector<ProtocolParams> points = config.points();
    if (!config.kernels.empty() && config.base.cw != 1) {
        throw InputError("chain models assume a single CCA (cw=1); got cw=" +
                         std::to_string(config.base.cw) + ", drop kernels or set cw=1");
    }
    if (config.simulate && config.trials < 1) throw InputError("trials must be >= 1");

    std::vector<std::future<std::vector<ReportRow>>> pending;
    pending.reserve(points.size());
    for (const ProtocolParams& p : points) {
        pending.push_back(std::async(std::launch::async,
                                     [&config, p] { return evaluate_point(config, p); }));
    }

    ComparisonReport report;
    for (auto& f : pending) {
        auto rows = f.get();
        report.rows.insert(report.rows.end(), std::make_move_iterator(rows.begin()),
                           std::make_move_iterator(rows.end()));
    }
    std::sort(report.rows.begin(), report.rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return std::tie(a.n, a.l, a.method) < std::tie(b.n, b.l, b.method);
    });
    return report;
}

std::string format_report(const ComparisonReport& report, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::string out(kCsvHeader);
        out += '\n';
        for (const ReportRow& r : report.rows) {
            out += std::to_string(r.n) + ',' + std::to_string(r.l) + ',' + r.method + ',' +
                   cell(r.s_n) + ',' + cell(r.s_n_leibnitz) + ',' + cell(r.residual_mass) + ',' +
                   cell(r.p50) + ',' + cell(r.p90) + ',' + cell(r.max) + ',' + cell(r.stderr_) +
                   '\n';
        }
        return out;
    }

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const ReportRow& r : report.rows) {
        nlohmann::ordered_json row;
        row["N"] = r.n;
        row["L"] = r.l;
        row["method"] = r.method;
        row["S_N"] = json_cell(r.s_n);
        row["S_N_leibnitz"] = json_cell(r.s_n_leibnitz);
        row["residual_mass"] = json_cell(r.residual_mass);
        row["p50"] = json_cell(r.p50);
        row["p90"] = json_cell(r.p90);
        row["max"] = json_cell(r.max);
        row["stderr"] = json_cell(r.stderr_);
        rows.push_back(std::move(row));
    }
    return rows.dump(2) + '\n';
}

void write_report(const ComparisonReport& report, ReportFormat format,
                  const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << format_report(report, format);
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

std::string profile_csv(const AttemptProfile& profile) {
    std::string out = "t,a";
    for (int k = 0; k <= profile.params.nb_max(); ++k) out += ",d" + std::to_string(k);
    out += '\n';
    for (std::int64_t t = 0; t <= profile.t_max; ++t) {
        out += std::to_string(t) + ',' + format_number(profile.attempt(t));
        for (int k = 0; k <= profile.params.nb_max(); ++k) {
            out += ',' + format_number(profile.stage(k, t));
        }
        out += '\n';
    }
    return out;
}

std::vector<std::string> tracking_summary(const ComparisonReport& report) {
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < report.rows.size();) {
        std::size_t j = i;
        const ReportRow* original = nullptr;
        const ReportRow* improved = nullptr;
        const ReportRow* simulated = nullptr;
        for (; j < report.rows.size() && report.rows[j].n == report.rows[i].n &&
               report.rows[j].l == report.rows[i].l;
             ++j) {
            const ReportRow& r = report.rows[j];
            if (r.method == "original-chain") original = &r;
            if (r.method == "improved-chain") improved = &r;
            if (r.method == "sim") simulated = &r;
        }
        if (original && improved && simulated && original->s_n && improved->s_n &&
            simulated->s_n) {
            const double eo = std::abs(*original->s_n - *simulated->s_n);
            const double ei = std::abs(*improved->s_n - *simulated->s_n);
            lines.push_back("N=" + std::to_string(report.rows[i].n) +
                            " L=" + std::to_string(report.rows[i].l) +
                            ": |original-sim|=" + format_number(eo) +
                            " |improved-sim|=" + format_number(ei) + " closer=" +
                            (ei < eo ? "improved-chain" : "original-chain"));
        }
        i = j;
    }
    return lines;
}

}  // namespace batchmac::experiment
