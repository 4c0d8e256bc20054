#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "batchmac/attempt.hpp"
#include "batchmac/chain.hpp"
#include "batchmac/protocol.hpp"
#include "batchmac/sim.hpp"

namespace batchmac::experiment {

enum class ReportFormat { Csv, Json };

/// A sweep over (N, L) with everything else fixed.
struct ExperimentConfig {
    RawParams base;  ///< n_stations / packet_len are taken from the sweep lists
    std::vector<std::int64_t> n_values;
    std::vector<std::int64_t> l_values;
    BackoffSemantics semantics = BackoffSemantics::Corrected;
    std::vector<chain::KernelKind> kernels{chain::KernelKind::Original,
                                           chain::KernelKind::Improved};
    RetryPolicy policy = RetryPolicy::CollisionContinue;
    bool simulate = true;
    std::int64_t trials = 10'000;
    std::uint64_t seed = 1;
    std::optional<double> mean_window;
    std::uint64_t exact_limit = sim::kDefaultEnumerationLimit;
    ReportFormat format = ReportFormat::Csv;
    std::optional<std::string> out;

    /// Every sweep point as validated parameters, N-major.
    std::vector<ProtocolParams> points() const;
};

/// Parses the flat `key=value` format: one key per line, `#` starts a comment,
/// lists are comma separated. Keys: be_min be_max nb_max cw L N semantics
/// kernels policy simulate trials seed mean_window exact_limit format out.
/// L and N are required. Unknown or repeated keys, malformed values and
/// invalid parameter points throw InputError.
ExperimentConfig parse_config(std::string_view text);

/// Reads and parses a config file; IoError if unreadable.
ExperimentConfig load_config(const std::filesystem::path& path);

/// One (config point x method) row. Empty optionals are non-applicable cells.
struct ReportRow {
    std::int64_t n = 0;
    std::int64_t l = 0;
    std::string method;  ///< original-chain | improved-chain | sim | exact
    std::optional<double> s_n;
    std::optional<double> s_n_leibnitz;
    std::optional<double> residual_mass;
    std::optional<double> p50;
    std::optional<double> p90;
    std::optional<double> max;
    std::optional<double> stderr_;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ComparisonReport {
    std::vector<ReportRow> rows;  ///< sorted by (N, L, method)

    friend bool operator==(const ComparisonReport&, const ComparisonReport&) = default;
};

/// Evaluates every requested method at every sweep point. Sweep points run
/// concurrently; the result is identical for identical configs. Throws
/// InputError when a chain is requested with cw != 1.
ComparisonReport run_experiment(const ExperimentConfig& config);

/// Completion-slot quantiles of a chain: slot c completes when the state at
/// c + 1 is (0, 0, Idle), matching the simulator's "last busy slot" finish
/// time. Quantiles the CDF never reaches are empty.
struct Quantiles {
    std::optional<double> p50;
    std::optional<double> p90;
    std::optional<double> max;
};
Quantiles chain_quantiles(const std::vector<double>& completion_cdf);
Quantiles pmf_quantiles(const std::map<std::int64_t, double>& pmf);

inline constexpr std::string_view kCsvHeader =
    "N,L,method,S_N,S_N_leibnitz,residual_mass,p50,p90,max,stderr";

/// CSV with kCsvHeader, or a JSON array of row objects with the same field
/// names. Numbers carry 9 significant digits; empty cells become empty CSV
/// fields / JSON null.
std::string format_report(const ComparisonReport& report, ReportFormat format);

/// Writes format_report() to `path`; IoError on failure.
void write_report(const ComparisonReport& report, ReportFormat format,
                  const std::filesystem::path& path);

/// `t,a,d0,...,d{nb_max}` for t = 0..t_max.
std::string profile_csv(const AttemptProfile& profile);

/// One line per sweep point naming the chain whose S_N is closer to the
/// simulated mean; empty when either side is missing.
std::vector<std::string> tracking_summary(const ComparisonReport& report);

std::optional<ReportFormat> parse_format(std::string_view s) noexcept;

}  // namespace batchmac::experiment
