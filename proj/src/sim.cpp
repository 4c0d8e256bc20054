#include "batchmac/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "batchmac/error.hpp"

namespace batchmac::sim {

namespace {

using Status = StationRecord::Status;

class SlotWalk {
public:
    SlotWalk(const ProtocolParams& params, RetryPolicy policy, const DrawSource& draws)
        : params_(params), policy_(policy), draws_(draws),
          stations_(static_cast<std::size_t>(params.n_stations())) {}

    TrialOutcome run() {
        for (int s = 0; s < params_.n_stations(); ++s) enter_stage(s, 0, 0);

        std::int64_t t = 0;
        while (active_ > 0) {
            const bool busy = busy_until_ >= t;
            for (int s = 0; s < params_.n_stations(); ++s) {
                StationRecord& st = at(s);
                if ((st.status == Status::Backing || st.status == Status::Sensing) &&
                    st.next_cca == t) {
                    sense(s, t, busy);
                }
            }
            for (int s = 0; s < params_.n_stations(); ++s) {
                if (at(s).status == Status::Transmitting && at(s).tx_end == t) end_transmission(s, t);
            }
            ++t;
        }
        return collect();
    }

private:
    StationRecord& at(int s) { return stations_[static_cast<std::size_t>(s)]; }

    // Draws the stage-k backoff; the next CCA is `from + draw`.
    void enter_stage(int s, int stage, std::int64_t from) {
        StationRecord& st = at(s);
        const std::int64_t window = window_size(params_, stage);
        const std::int64_t draw = draws_(s, stage, window);
        if (draw < 0 || draw >= window) {
            throw ModelError("backoff draw " + std::to_string(draw) + " outside [0, " +
                             std::to_string(window) + ")");
        }
        st.stage = stage;
        st.cca_progress = 0;
        st.next_cca = from + draw;
        st.status = draw == 0 ? Status::Sensing : Status::Backing;
        ++st.backoff_draws;
    }

    void finish(int s, Outcome outcome, std::int64_t t) {
        StationRecord& st = at(s);
        st.status = Status::Done;
        st.outcome = outcome;
        st.finish_slot = t;
        --active_;
    }

    void advance_stage(int s, std::int64_t t) {
        const int next = at(s).stage + 1;
        if (next > params_.nb_max()) {
            finish(s, Outcome::Failure, t);
        } else {
            enter_stage(s, next, t + 1);
        }
    }

    void sense(int s, std::int64_t t, bool busy) {
        StationRecord& st = at(s);
        ++st.cca_count;
        if (busy) {
            advance_stage(s, t);
            return;
        }
        ++st.cca_progress;
        if (st.cca_progress < params_.cw()) {
            st.status = Status::Sensing;
            st.next_cca = t + 1;
            return;
        }
        start_transmission(s, t + 1);
    }

    void start_transmission(int s, std::int64_t start) {
        StationRecord& st = at(s);
        const std::int64_t end = start + params_.packet_len() - 1;
        st.status = Status::Transmitting;
        st.tx_end = end;
        st.tx_collided = false;
        ++st.transmissions;

        Transmission tx{s, start, end, false};
        for (auto it = trace_.rbegin(); it != trace_.rend(); ++it) {
            if (it->end < start) continue;
            if (it->start > end) continue;
            it->collided = true;
            tx.collided = true;
            at(it->station).tx_collided = true;
        }
        st.tx_collided = tx.collided;
        trace_.push_back(tx);
        busy_until_ = std::max(busy_until_, end);
    }

    void end_transmission(int s, std::int64_t t) {
        StationRecord& st = at(s);
        if (!st.tx_collided) {
            finish(s, Outcome::Success, t);
        } else if (policy_ == RetryPolicy::NackDone) {
            finish(s, Outcome::Collided, t);
        } else {
            advance_stage(s, t);
        }
    }

    TrialOutcome collect() const {
        TrialOutcome out;
        out.stations.reserve(stations_.size());
        for (const StationRecord& st : stations_) {
            out.stations.push_back(StationResult{st.outcome, st.finish_slot, st.backoff_draws,
                                                 st.cca_count, st.transmissions});
            switch (st.outcome) {
                case Outcome::Success: ++out.successes; break;
                case Outcome::Collided: ++out.collided; break;
                case Outcome::Failure: ++out.failures; break;
            }
            out.completion_slot = std::max(out.completion_slot, st.finish_slot);
        }
        out.trace = trace_;
        return out;
    }

    const ProtocolParams& params_;
    RetryPolicy policy_;
    const DrawSource& draws_;
    std::vector<StationRecord> stations_;
    std::vector<Transmission> trace_;
    std::int64_t busy_until_ = -1;
    int active_ = static_cast<int>(stations_.size());
};

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct Accumulator {
    std::int64_t trials = 0;
    std::int64_t sum[3] = {0, 0, 0};
    std::int64_t sum_sq[3] = {0, 0, 0};
    std::map<std::int64_t, std::int64_t> histogram;

    void add(const TrialOutcome& o) {
        const std::int64_t v[3] = {o.successes, o.collided, o.failures};
        for (int k = 0; k < 3; ++k) {
            sum[k] += v[k];
            sum_sq[k] += v[k] * v[k];
        }
        ++histogram[o.completion_slot];
        ++trials;
    }

    void merge(const Accumulator& other) {
        trials += other.trials;
        for (int k = 0; k < 3; ++k) {
            sum[k] += other.sum[k];
            sum_sq[k] += other.sum_sq[k];
        }
        for (const auto& [slot, count] : other.histogram) histogram[slot] += count;
    }
};

double standard_error(std::int64_t n, std::int64_t sum, std::int64_t sum_sq) {
    if (n < 2) return 0.0;
    const double nd = static_cast<double>(n);
    const double mean = static_cast<double>(sum) / nd;
    const double var = std::max(0.0, (static_cast<double>(sum_sq) - nd * mean * mean) / (nd - 1.0));
    return std::sqrt(var / nd);
}

}  // namespace

std::string_view to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::Success: return "success";
        case Outcome::Collided: return "collided";
        case Outcome::Failure: return "failure";
    }
    return "?";
}

TrialOutcome run_trial_with_draws(const ProtocolParams& params, RetryPolicy policy,
                                  const DrawSource& draws) {
    return SlotWalk(params, policy, draws).run();
}

TrialOutcome run_trial(const ProtocolParams& params, RetryPolicy policy, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    // Windows are powers of two, so masking is exactly uniform.
    const DrawSource draws = [&rng](int, int, std::int64_t window) {
        return static_cast<std::int64_t>(rng() & static_cast<std::uint64_t>(window - 1));
    };
    return run_trial_with_draws(params, policy, draws);
}

std::uint64_t trial_seed(std::uint64_t root, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(root) ^ index);
}

BatchMetrics run_batch(const ProtocolParams& params, RetryPolicy policy, std::int64_t trials,
                       std::uint64_t seed, unsigned threads) {
    if (trials < 1) throw InputError("trials must be >= 1, got " + std::to_string(trials));
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const auto workers = static_cast<std::int64_t>(
        std::min<std::int64_t>(threads, std::max<std::int64_t>(1, trials / 256)));

    std::vector<Accumulator> partial(static_cast<std::size_t>(workers));
    auto work = [&](std::int64_t w) {
        const std::int64_t begin = trials * w / workers;
        const std::int64_t end = trials * (w + 1) / workers;
        Accumulator& acc = partial[static_cast<std::size_t>(w)];
        for (std::int64_t i = begin; i < end; ++i) {
            acc.add(run_trial(params, policy, trial_seed(seed, static_cast<std::uint64_t>(i))));
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (std::int64_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }

    Accumulator total;
    for (const Accumulator& acc : partial) total.merge(acc);

    BatchMetrics m;
    m.trials = total.trials;
    const double n = static_cast<double>(total.trials);
    m.mean_successes = static_cast<double>(total.sum[0]) / n;
    m.mean_collided = static_cast<double>(total.sum[1]) / n;
    m.mean_failures = static_cast<double>(total.sum[2]) / n;
    m.stderr_successes = standard_error(total.trials, total.sum[0], total.sum_sq[0]);
    m.stderr_collided = standard_error(total.trials, total.sum[1], total.sum_sq[1]);
    m.stderr_failures = standard_error(total.trials, total.sum[2], total.sum_sq[2]);
    m.completion_histogram = std::move(total.histogram);
    return m;
}

std::optional<std::uint64_t> joint_draw_space(const ProtocolParams& params) {
    std::uint64_t per_station = 1;
    for (int k = 0; k <= params.nb_max(); ++k) {
        const auto w = static_cast<std::uint64_t>(window_size(params, k));
        if (per_station > UINT64_MAX / w) return std::nullopt;
        per_station *= w;
    }
    std::uint64_t total = 1;
    for (int s = 0; s < params.n_stations(); ++s) {
        if (total > UINT64_MAX / per_station) return std::nullopt;
        total *= per_station;
    }
    return total;
}

ExactMetrics enumerate_exact(const ProtocolParams& params, RetryPolicy policy,
                             std::uint64_t limit) {
    // Depth-first over the draws a walk actually consumes. A path of draws
    // (w_1, c_1), ..., (w_m, c_m) stands for every full joint tuple that agrees
    // on those draws, so it carries weight prod 1/w_i (exact: windows are
    // powers of two).
    struct Choice {
        std::int64_t window;
        std::int64_t value;
    };
    std::vector<Choice> path;
    std::size_t cursor = 0;
    const DrawSource draws = [&](int, int, std::int64_t window) {
        if (cursor == path.size()) path.push_back(Choice{window, 0});
        return path[cursor++].value;
    };

    ExactMetrics m;
    std::map<std::int64_t, double> completion;
    while (true) {
        if (m.outcomes == limit) {
            const auto space = joint_draw_space(params);
            throw InputError("enumeration exceeds the limit of " + std::to_string(limit) +
                             " walks (full joint draw space: " +
                             (space ? std::to_string(*space) : std::string("more than 2^64")) +
                             ")");
        }
        cursor = 0;
        const TrialOutcome o = run_trial_with_draws(params, policy, draws);
        path.resize(cursor);
        double weight = 1.0;
        for (const Choice& c : path) weight /= static_cast<double>(c.window);

        m.expected_successes += weight * o.successes;
        m.expected_collided += weight * o.collided;
        m.expected_failures += weight * o.failures;
        completion[o.completion_slot] += weight;
        ++m.outcomes;

        while (!path.empty() && path.back().value + 1 == path.back().window) path.pop_back();
        if (path.empty()) break;
        ++path.back().value;
    }
    m.completion_pmf = std::move(completion);
    return m;
}

}  // namespace batchmac::sim
