#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "batchmac/attempt.hpp"
#include "batchmac/protocol.hpp"

namespace batchmac::chain {

enum class KernelKind { Original, Improved };

/// What keeps the channel busy in a chain state. Idle iff busy_left == 0.
enum class Occupancy : std::uint8_t { Idle = 0, SuccessTx = 1, CollisionTx = 2 };

/// Global state: `remaining` stations still contending, `busy_left` slots of
/// the current channel occupancy still to run.
struct ChainState {
    int remaining = 0;
    int busy_left = 0;
    Occupancy kind = Occupancy::Idle;

    friend bool operator==(const ChainState&, const ChainState&) = default;
};

/// Probability over every ChainState of an (N, L) chain at one slot. Stored
/// densely, indexed by (remaining, busy_left, kind).
class StateDistribution {
public:
    StateDistribution(int n_stations, int packet_len);

    /// Unit mass on (N, 0, Idle).
    static StateDistribution initial(int n_stations, int packet_len);

    int n_stations() const noexcept { return n_; }
    int packet_len() const noexcept { return l_; }

    /// Well-formed for this (N, L): ranges hold and busy_left == 0 iff Idle.
    bool contains(ChainState s) const noexcept;

    double operator[](ChainState s) const;
    void add(ChainState s, double p);

    double total() const noexcept;
    double expected_remaining() const noexcept;
    /// Mass on states with busy_left == 0 and the given remaining count.
    double idle_mass(int remaining) const;

    /// Calls f(state, probability) for every state carrying nonzero mass.
    template <typename F>
    void for_each(F&& f) const {
        for (std::size_t idx = 0; idx < mass_.size(); ++idx) {
            if (mass_[idx] != 0.0) f(state_at(idx), mass_[idx]);
        }
    }

private:
    std::size_t index(ChainState s) const;
    ChainState state_at(std::size_t idx) const noexcept;

    int n_;
    int l_;
    std::vector<double> mass_;
};

/// Per-(i, t) transition probabilities of the original model. f[j] is the
/// probability that a collision occurs and j of the i stations fail on their
/// last CCA; f[0] carries the collision mass in which nobody fails.
struct TransitionWeights {
    double s = 0.0;
    double w = 0.0;
    double c = 0.0;
    std::vector<double> f;
    double eta = 0.0;
    double xi = 0.0;
};

/// (2^be_min - 1) / 2, the mean of the first backoff window.
double default_mean_window(const ProtocolParams& params) noexcept;

/// xi = min(1, L (N - 1) / mean_window). Throws InputError unless
/// mean_window > 0. Uses default_mean_window() when none is given.
double channel_busy_xi(const ProtocolParams& params, std::optional<double> mean_window = {});

/// s = i a (1-a)^(i-1), w = (1-a)^i, c = 1 - s - w, eta = d_nb_max(t) xi,
/// f_j = c C(i,j) eta^j (1-eta)^(i-j). Requires 1 <= i <= N of the profile.
TransitionWeights transition_weights(int i, std::int64_t t, const AttemptProfile& profile,
                                     double xi);

/// Binomial(n, p) probabilities for k = 0..n.
std::vector<double> binomial_pmf(int n, double p);

struct Transition {
    ChainState to;
    double probability = 0.0;
};

struct KernelOptions {
    /// Overrides the mean backoff window used for xi.
    std::optional<double> mean_window;
};

/// Time-inhomogeneous transition kernel over ChainState.
///
/// Original: from (i,0) success moves to (i-1, L, SuccessTx), j failures move
/// to (i-j, 0), and idle slots plus non-failing collisions stay put. Busy
/// states drain deterministically.
///
/// Improved: from (i,0) a success moves to (i-1, L, SuccessTx), a collision
/// occupies the channel as (i, L, CollisionTx) keeping every station, and an
/// idle slot stays put. Failures happen only while the channel is busy: each
/// remaining station independently fails with probability d_nb_max(t).
class Kernel {
public:
    KernelKind kind() const noexcept { return kind_; }
    const ProtocolParams& params() const noexcept { return params_; }
    const AttemptProfile& profile() const noexcept { return profile_; }
    double xi() const noexcept { return xi_; }

    /// Outgoing arcs of `from` at slot t with nonzero probability; they sum to 1.
    std::vector<Transition> transitions(std::int64_t t, ChainState from) const;

    /// Distribution at t + 1 given the one at t.
    StateDistribution step(std::int64_t t, const StateDistribution& current) const;

private:
    friend Kernel build_kernel(const ProtocolParams&, AttemptProfile, KernelKind,
                               const KernelOptions&);
    Kernel(ProtocolParams params, AttemptProfile profile, KernelKind kind, double xi);

    ProtocolParams params_;
    AttemptProfile profile_;
    KernelKind kind_;
    double xi_;
};

/// Throws InputError when cw != 1 or the profile was built for a different
/// backoff law.
Kernel build_kernel(const ProtocolParams& params, AttemptProfile profile, KernelKind kind,
                    const KernelOptions& options = {});

struct TransientResult {
    KernelKind kind = KernelKind::Original;
    std::vector<StateDistribution> per_slot;  ///< slots 0..horizon
    double success_renewal = 0.0;
    /// Literal end-state formula; filled for the Original kernel only, where
    /// it is known to be incorrect.
    std::optional<double> success_leibnitz;
    double residual_mass = 0.0;
    std::vector<double> completion_cdf;

    std::int64_t horizon() const noexcept {
        return static_cast<std::int64_t>(per_slot.size()) - 1;
    }
};

/// t_max + L + 1: the state after the last slot of a transmission started on
/// t_max has fully drained back to Idle.
std::int64_t default_horizon(const Kernel& kernel) noexcept;

/// Starts from unit mass on (N, 0, Idle) and applies the kernel per slot up to
/// `horizon` (at least t_max + L). Throws ModelError if total mass drifts from
/// 1 by more than 1e-9.
TransientResult propagate(const Kernel& kernel, std::optional<std::int64_t> horizon = {});

/// Fills every metric from already-propagated per-slot distributions.
TransientResult summarize(KernelKind kind, std::vector<StateDistribution> per_slot);

/// Sum over t >= 1 and all i of x_{i,1,SuccessTx}(t): every success passes
/// through busy_left == 1 exactly once.
double success_count_renewal(const TransientResult& result);

/// sum_i (N - i) sum_j x_{i,j}(horizon). Counts failures as successes.
double success_count_leibnitz(const TransientResult& result);

/// Mass at the horizon on idle states with remaining >= 1.
double residual_mass(const TransientResult& result);

/// F(t) = mass on (0, 0, Idle) at slot t. This is x_{0,0}(t); it is a proper
/// completion CDF only if it reaches 1.
std::vector<double> completion_cdf(const TransientResult& result);

std::string_view to_string(KernelKind kind) noexcept;

}  // namespace batchmac::chain
