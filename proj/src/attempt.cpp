#include "batchmac/attempt.hpp"

#include <string>

#include "batchmac/error.hpp"

namespace batchmac {

namespace {

constexpr double kAttemptSlack = 1e-12;

}  // namespace

Pmf uniform_backoff_pmf(const ProtocolParams& params, int k) {
    return Pmf::uniform(window_size(params, k));
}

std::int64_t max_reach_slot(const ProtocolParams& params, BackoffSemantics semantics) {
    std::int64_t reach = 0;
    for (int k = 0; k <= params.nb_max(); ++k) reach += window_size(params, k) - 1;
    if (semantics == BackoffSemantics::Corrected) reach += params.nb_max();
    return reach;
}

std::int64_t corrected_t_max_closed_form(const ProtocolParams& params) {
    const std::int64_t nb = params.nb_max();
    const std::int64_t spread = params.be_max() - params.be_min();
    return (2 + nb - spread) * (std::int64_t{1} << params.be_max()) -
           (std::int64_t{1} << params.be_min()) - 1;
}

bool closed_form_applies(const ProtocolParams& params) noexcept {
    // With one stage short of be_max the extra terms cancel exactly.
    return params.nb_max() + 1 >= params.be_max() - params.be_min();
}

std::vector<Pmf> stage_pmfs(const ProtocolParams& params, BackoffSemantics semantics) {
    std::vector<Pmf> stages;
    stages.reserve(static_cast<std::size_t>(params.nb_max()) + 1);
    stages.push_back(uniform_backoff_pmf(params, 0));
    for (int k = 1; k <= params.nb_max(); ++k) {
        Pmf step = uniform_backoff_pmf(params, k);
        if (semantics == BackoffSemantics::Corrected) step = step.shifted(1);
        stages.push_back(convolve(stages.back(), step));
    }
    return stages;
}

AttemptProfile attempt_profile(const ProtocolParams& params, BackoffSemantics semantics,
                               const AttemptOptions& options) {
    const std::int64_t reach = max_reach_slot(params, semantics);
    if (reach > options.slot_cap) {
        throw InputError("attempt profile reaches slot " + std::to_string(reach) +
                         ", above the cap of " + std::to_string(options.slot_cap));
    }

    AttemptProfile profile{params, semantics, stage_pmfs(params, semantics), {}, reach};

    profile.a.assign(static_cast<std::size_t>(reach) + 1, 0.0);
    for (const Pmf& d : profile.stage_pmfs) {
        const auto probs = d.probs();
        for (std::size_t t = 0; t < probs.size(); ++t) profile.a[t] += probs[t];
    }
    for (std::size_t t = 0; t < profile.a.size(); ++t) {
        if (profile.a[t] > 1.0 + kAttemptSlack) {
            throw InputError("attempt probability at slot " + std::to_string(t) + " is " +
                             std::to_string(profile.a[t]) + " > 1 under " +
                             std::string(to_string(semantics)) + " semantics");
        }
        if (profile.a[t] > 1.0) profile.a[t] = 1.0;
    }
    return profile;
}

}  // namespace batchmac
