#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "batchmac/error.hpp"
#include "batchmac/experiment.hpp"

namespace batchmac::experiment {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
    throw InputError("malformed value for \"" + std::string(key) + "\": \"" +
                     std::string(value) + "\" (expected " + std::string(want) + ")");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, std::string_view want) {
    T out{};
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (value.empty() || ec != std::errc{} || ptr != end) bad_value(key, value, want);
    return out;
}

std::vector<std::string_view> split_list(std::string_view value) {
    std::vector<std::string_view> items;
    while (true) {
        const auto comma = value.find(',');
        items.push_back(trim(value.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        value.remove_prefix(comma + 1);
    }
    return items;
}

std::vector<std::int64_t> parse_int_list(std::string_view key, std::string_view value) {
    std::vector<std::int64_t> out;
    for (auto item : split_list(value)) {
        out.push_back(parse_number<std::int64_t>(key, item, "comma-separated integers"));
    }
    return out;
}

std::vector<chain::KernelKind> parse_kernels(std::string_view value) {
    std::set<chain::KernelKind> kinds;
    if (value.empty() || value == "none") return {};
    for (auto item : split_list(value)) {
        if (item == "original") {
            kinds.insert(chain::KernelKind::Original);
        } else if (item == "improved") {
            kinds.insert(chain::KernelKind::Improved);
        } else {
            bad_value("kernels", value, "a list of original, improved");
        }
    }
    return {kinds.begin(), kinds.end()};
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "true or false");
}

}  // namespace

std::optional<ReportFormat> parse_format(std::string_view s) noexcept {
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    return std::nullopt;
}

std::vector<ProtocolParams> ExperimentConfig::points() const {
    std::vector<ProtocolParams> out;
    for (std::int64_t n : n_values) {
        for (std::int64_t l : l_values) {
            RawParams raw = base;
            raw.n_stations = n;
            raw.packet_len = l;
            out.push_back(validate(raw));
        }
    }
    return out;
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::set<std::string, std::less<>> seen;
    int line_no = 0;

    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw InputError("line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (!seen.insert(std::string(key)).second) {
            throw InputError("duplicate key \"" + std::string(key) + "\"");
        }

        if (key == "be_min") {
            cfg.base.be_min = parse_number<std::int64_t>(key, value, "an integer");
        } else if (key == "be_max") {
            cfg.base.be_max = parse_number<std::int64_t>(key, value, "an integer");
        } else if (key == "nb_max") {
            cfg.base.nb_max = parse_number<std::int64_t>(key, value, "an integer");
        } else if (key == "cw") {
            cfg.base.cw = parse_number<std::int64_t>(key, value, "an integer");
        } else if (key == "L") {
            cfg.l_values = parse_int_list(key, value);
        } else if (key == "N") {
            cfg.n_values = parse_int_list(key, value);
        } else if (key == "semantics") {
            if (value == "naive") {
                cfg.semantics = BackoffSemantics::Naive;
            } else if (value == "corrected") {
                cfg.semantics = BackoffSemantics::Corrected;
            } else {
                bad_value(key, value, "naive or corrected");
            }
        } else if (key == "kernels") {
            cfg.kernels = parse_kernels(value);
        } else if (key == "policy") {
            if (value == "nack_done") {
                cfg.policy = RetryPolicy::NackDone;
            } else if (value == "collision_continue") {
                cfg.policy = RetryPolicy::CollisionContinue;
            } else {
                bad_value(key, value, "nack_done or collision_continue");
            }
        } else if (key == "simulate") {
            cfg.simulate = parse_bool(key, value);
        } else if (key == "trials") {
            cfg.trials = parse_number<std::int64_t>(key, value, "an integer");
        } else if (key == "seed") {
            cfg.seed = parse_number<std::uint64_t>(key, value, "an unsigned integer");
        } else if (key == "mean_window") {
            cfg.mean_window = parse_number<double>(key, value, "a real number");
        } else if (key == "exact_limit") {
            cfg.exact_limit = parse_number<std::uint64_t>(key, value, "an unsigned integer");
        } else if (key == "format") {
            const auto f = parse_format(value);
            if (!f) bad_value(key, value, "csv or json");
            cfg.format = *f;
        } else if (key == "out") {
            if (value.empty()) bad_value(key, value, "a path");
            cfg.out = std::string(value);
        } else {
            throw InputError("unknown key \"" + std::string(key) + "\"");
        }
    }

    if (cfg.n_values.empty()) throw InputError("missing required key \"N\"");
    if (cfg.l_values.empty()) throw InputError("missing required key \"L\"");
    if (cfg.simulate && cfg.trials < 1) {
        throw InputError("trials must be >= 1 when simulating, got " + std::to_string(cfg.trials));
    }
    if (cfg.mean_window && !(*cfg.mean_window > 0.0)) {
        throw InputError("mean_window must be positive");
    }
    (void)cfg.points();  // validates every sweep point
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace batchmac::experiment
