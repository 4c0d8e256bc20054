#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "batchmac/protocol.hpp"

namespace batchmac::sim {

/// Terminal outcome of one station in one trial.
enum class Outcome {
    Success,   ///< sole occupant of every slot it transmitted on
    Collided,  ///< transmitted with overlap and stopped (NackDone)
    Failure,   ///< backoff stages exhausted
};

std::string_view to_string(Outcome o) noexcept;

/// Live per-station state during the slot walk.
struct StationRecord {
    enum class Status { Backing, Sensing, Transmitting, Done };

    int stage = 0;
    std::int64_t next_cca = 0;  ///< slot of the next CCA while Backing/Sensing
    int cca_progress = 0;       ///< consecutive clear CCAs toward cw
    Status status = Status::Backing;
    std::int64_t tx_end = -1;   ///< last occupied slot while Transmitting
    bool tx_collided = false;

    Outcome outcome = Outcome::Failure;  ///< valid once Done
    std::int64_t finish_slot = -1;

    int backoff_draws = 0;
    int cca_count = 0;
    int transmissions = 0;
};

/// One channel occupancy: slots [start, end] inclusive.
struct Transmission {
    int station = 0;
    std::int64_t start = 0;
    std::int64_t end = 0;
    bool collided = false;

    friend bool operator==(const Transmission&, const Transmission&) = default;
};

struct StationResult {
    Outcome outcome = Outcome::Failure;
    std::int64_t finish_slot = 0;
    int backoff_draws = 0;
    int cca_count = 0;
    int transmissions = 0;

    friend bool operator==(const StationResult&, const StationResult&) = default;
};

struct TrialOutcome {
    std::vector<StationResult> stations;
    int successes = 0;
    int collided = 0;
    int failures = 0;
    std::int64_t completion_slot = 0;  ///< latest finish slot
    std::vector<Transmission> trace;   ///< every transmission, in start order

    friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

/// Supplies the backoff draw of `station` entering `stage`; must return a value
/// in [0, window).
using DrawSource = std::function<std::int64_t(int station, int stage, std::int64_t window)>;

/// Deterministic slot walk; all randomness comes from `draws`.
///
/// Every station starts at stage 0 and senses slot b_0. A CCA on slot t is
/// busy iff a transmission occupies t. After cw consecutive clear CCAs the
/// station transmits on [t+1, t+L]. A busy CCA resets the clear streak and
/// moves to the next stage (Failure past nb_max); the new draw counts from
/// slot t+1. Overlapping transmissions are all collided. Under
/// CollisionContinue a collided station re-enters backoff at the next stage
/// when its transmission ends.
TrialOutcome run_trial_with_draws(const ProtocolParams& params, RetryPolicy policy,
                                  const DrawSource& draws);

/// run_trial_with_draws() fed by a mt19937_64 seeded with `seed`.
TrialOutcome run_trial(const ProtocolParams& params, RetryPolicy policy, std::uint64_t seed);

/// Seed of trial `index` within a batch rooted at `root` (splitmix64 mix).
std::uint64_t trial_seed(std::uint64_t root, std::uint64_t index) noexcept;

struct BatchMetrics {
    std::int64_t trials = 0;
    double mean_successes = 0.0;
    double mean_collided = 0.0;
    double mean_failures = 0.0;
    double stderr_successes = 0.0;
    double stderr_collided = 0.0;
    double stderr_failures = 0.0;
    std::map<std::int64_t, std::int64_t> completion_histogram;  ///< slot -> trials

    friend bool operator==(const BatchMetrics&, const BatchMetrics&) = default;
};

/// Runs `trials` independent trials (seeded by trial_seed) on up to `threads`
/// workers (0 = hardware concurrency). Results do not depend on the thread
/// count. Throws InputError when trials < 1.
BatchMetrics run_batch(const ProtocolParams& params, RetryPolicy policy, std::int64_t trials,
                       std::uint64_t seed, unsigned threads = 0);

struct ExactMetrics {
    std::uint64_t outcomes = 0;  ///< distinct draw paths walked
    double expected_successes = 0.0;
    double expected_collided = 0.0;
    double expected_failures = 0.0;
    std::map<std::int64_t, double> completion_pmf;  ///< slot -> probability
};

inline constexpr std::uint64_t kDefaultEnumerationLimit = 1'000'000;

/// Number of joint draw tuples, (prod_k W_k)^N; nullopt when it does not fit
/// in 64 bits.
std::optional<std::uint64_t> joint_draw_space(const ProtocolParams& params);

/// Exact expectations over every equiprobable joint draw tuple. Tuples that
/// agree on all draws the walk consumes are walked once, weighted by their
/// share, so a lone station costs W_0 walks rather than prod_k W_k. Throws
/// InputError once more than `limit` walks would be needed.
ExactMetrics enumerate_exact(const ProtocolParams& params, RetryPolicy policy,
                             std::uint64_t limit = kDefaultEnumerationLimit);

}  // namespace batchmac::sim
