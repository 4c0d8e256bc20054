#pragma once

#include <cstdint>
#include <vector>

#include "batchmac/pmf.hpp"
#include "batchmac/protocol.hpp"

namespace batchmac {

/// Channel-independent attempt profile of one station.
///
/// stage_pmfs[k](t) is the probability that the station's k-th CCA lands on
/// slot t given every earlier CCA found the channel busy; a(t) sums these over
/// k = 0..nb_max. Under Corrected semantics the CCAs of one station are
/// strictly ordered in time, so the events are disjoint and a(t) <= 1 always.
struct AttemptProfile {
    ProtocolParams params;
    BackoffSemantics semantics;
    std::vector<Pmf> stage_pmfs;
    std::vector<double> a;  ///< indexed by slot 0..t_max
    std::int64_t t_max = 0;

    double attempt(std::int64_t t) const noexcept {
        return (t < 0 || t > t_max) ? 0.0 : a[static_cast<std::size_t>(t)];
    }
    double stage(int k, std::int64_t t) const noexcept {
        return stage_pmfs[static_cast<std::size_t>(k)][t];
    }
    /// d_{nb_max}(t): probability the last permitted CCA lands on t.
    double last_stage(std::int64_t t) const noexcept { return stage(params.nb_max(), t); }
};

struct AttemptOptions {
    /// Profiles reaching past this slot are rejected before any convolution.
    std::int64_t slot_cap = 1'000'000;
};

/// b_k: uniform mass 1/W_k on {0, ..., W_k - 1}.
Pmf uniform_backoff_pmf(const ProtocolParams& params, int k);

/// d_0..d_nb_max alone, without forming a(t). Always well defined, also where
/// the Naive sum a(t) would exceed 1.
std::vector<Pmf> stage_pmfs(const ProtocolParams& params, BackoffSemantics semantics);

/// d_k = b_0 * b_1 * ... * b_k (Naive) or b_0 * (delta_1 * b_1) * ... *
/// (delta_1 * b_k) (Corrected), and a(t) = sum_k d_k(t).
///
/// Throws InputError if t_max exceeds options.slot_cap, or if a Naive
/// profile puts more than unit mass on a slot (possible when be_min = 0,
/// where repeated zero draws all re-sense slot 0).
AttemptProfile attempt_profile(const ProtocolParams& params, BackoffSemantics semantics,
                               const AttemptOptions& options = {});

/// Largest slot a station can sense: sum_k (W_k - 1), plus nb_max under
/// Corrected semantics (one mandatory slot per retry).
std::int64_t max_reach_slot(const ProtocolParams& params, BackoffSemantics semantics);

/// Closed form (2 + nb_max - (be_max - be_min)) * 2^be_max - 2^be_min - 1 for
/// the corrected horizon. It assumes the window grows to 2^be_max, so it
/// agrees with max_reach_slot(Corrected) only when
/// nb_max + 1 >= be_max - be_min (see closed_form_applies()).
std::int64_t corrected_t_max_closed_form(const ProtocolParams& params);
bool closed_form_applies(const ProtocolParams& params) noexcept;

}  // namespace batchmac
