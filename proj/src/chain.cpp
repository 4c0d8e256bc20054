#include "batchmac/chain.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "batchmac/error.hpp"

namespace batchmac::chain {

namespace {

constexpr double kMassTolerance = 1e-9;
constexpr std::size_t kKinds = 3;

ChainState after_drain(ChainState s, int removed) {
    const int left = s.busy_left - 1;
    return ChainState{s.remaining - removed, left, left == 0 ? Occupancy::Idle : s.kind};
}

}  // namespace

// ---------------------------------------------------------------------------
// StateDistribution

StateDistribution::StateDistribution(int n_stations, int packet_len)
    : n_(n_stations), l_(packet_len) {
    if (n_ < 0 || l_ < 1) throw InputError("state space needs N >= 0 and L >= 1");
    mass_.assign(static_cast<std::size_t>(n_ + 1) * static_cast<std::size_t>(l_ + 1) * kKinds,
                 0.0);
}

StateDistribution StateDistribution::initial(int n_stations, int packet_len) {
    StateDistribution d(n_stations, packet_len);
    d.add(ChainState{n_stations, 0, Occupancy::Idle}, 1.0);
    return d;
}

bool StateDistribution::contains(ChainState s) const noexcept {
    if (s.remaining < 0 || s.remaining > n_ || s.busy_left < 0 || s.busy_left > l_) return false;
    return (s.busy_left == 0) == (s.kind == Occupancy::Idle);
}

std::size_t StateDistribution::index(ChainState s) const {
    if (!contains(s)) {
        throw InputError("invalid chain state (" + std::to_string(s.remaining) + ", " +
                         std::to_string(s.busy_left) + ")");
    }
    return (static_cast<std::size_t>(s.remaining) * static_cast<std::size_t>(l_ + 1) +
            static_cast<std::size_t>(s.busy_left)) *
               kKinds +
           static_cast<std::size_t>(s.kind);
}

ChainState StateDistribution::state_at(std::size_t idx) const noexcept {
    const auto kind = static_cast<Occupancy>(idx % kKinds);
    idx /= kKinds;
    const auto busy = static_cast<int>(idx % static_cast<std::size_t>(l_ + 1));
    const auto remaining = static_cast<int>(idx / static_cast<std::size_t>(l_ + 1));
    return ChainState{remaining, busy, kind};
}

double StateDistribution::operator[](ChainState s) const { return mass_[index(s)]; }

void StateDistribution::add(ChainState s, double p) { mass_[index(s)] += p; }

double StateDistribution::total() const noexcept {
    double sum = 0.0;
    for (double m : mass_) sum += m;
    return sum;
}

double StateDistribution::expected_remaining() const noexcept {
    double e = 0.0;
    for_each([&](ChainState s, double p) { e += s.remaining * p; });
    return e;
}

double StateDistribution::idle_mass(int remaining) const {
    return (*this)[ChainState{remaining, 0, Occupancy::Idle}];
}

// ---------------------------------------------------------------------------
// Weights

double default_mean_window(const ProtocolParams& params) noexcept {
    return (std::ldexp(1.0, params.be_min()) - 1.0) / 2.0;
}

double channel_busy_xi(const ProtocolParams& params, std::optional<double> mean_window) {
    const double ew = mean_window.value_or(default_mean_window(params));
    if (!(ew > 0.0) || !std::isfinite(ew)) {
        throw InputError("mean backoff window must be positive, got " + std::to_string(ew));
    }
    const double load =
        static_cast<double>(params.packet_len()) * (params.n_stations() - 1) / ew;
    return std::min(1.0, load);
}

std::vector<double> binomial_pmf(int n, double p) {
    std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
    if (p <= 0.0) {
        out.front() = 1.0;
        return out;
    }
    if (p >= 1.0) {
        out.back() = 1.0;
        return out;
    }
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const double log_n_fact = std::lgamma(n + 1.0);
    for (int k = 0; k <= n; ++k) {
        const double log_choose = log_n_fact - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
        out[static_cast<std::size_t>(k)] = std::exp(log_choose + k * log_p + (n - k) * log_q);
    }
    return out;
}

TransitionWeights transition_weights(int i, std::int64_t t, const AttemptProfile& profile,
                                     double xi) {
    const int n = profile.params.n_stations();
    if (i < 1 || i > n) {
        throw InputError("remaining-station count " + std::to_string(i) + " outside 1.." +
                         std::to_string(n));
    }
    const double a = profile.attempt(t);
    TransitionWeights tw;
    tw.xi = xi;
    tw.w = std::pow(1.0 - a, i);
    tw.s = i * a * std::pow(1.0 - a, i - 1);
    tw.c = std::max(0.0, 1.0 - tw.s - tw.w);
    tw.eta = profile.last_stage(t) * xi;
    tw.f = binomial_pmf(i, tw.eta);
    for (double& fj : tw.f) fj *= tw.c;
    return tw;
}

// ---------------------------------------------------------------------------
// Kernel

Kernel::Kernel(ProtocolParams params, AttemptProfile profile, KernelKind kind, double xi)
    : params_(params), profile_(std::move(profile)), kind_(kind), xi_(xi) {}

Kernel build_kernel(const ProtocolParams& params, AttemptProfile profile, KernelKind kind,
                    const KernelOptions& options) {
    if (params.cw() != 1) {
        throw InputError("chain models assume a single CCA (cw=1), got cw=" +
                         std::to_string(params.cw()));
    }
    if (!params.same_backoff(profile.params)) {
        throw InputError("attempt profile was built for a different backoff law");
    }
    // Weights read N from the profile; keep both views of the parameters identical.
    profile.params = params;
    const double xi = kind == KernelKind::Original ? channel_busy_xi(params, options.mean_window)
                                                   : 1.0;
    return Kernel(params, std::move(profile), kind, xi);
}

std::vector<Transition> Kernel::transitions(std::int64_t t, ChainState from) const {
    const int n = params_.n_stations();
    const int l = params_.packet_len();
    const int i = from.remaining;
    std::vector<Transition> out;
    auto emit = [&](ChainState to, double p) {
        if (p > 0.0) out.push_back(Transition{to, p});
    };

    if (i < 0 || i > n || from.busy_left < 0 || from.busy_left > l ||
        (from.busy_left == 0) != (from.kind == Occupancy::Idle) ||
        (kind_ == KernelKind::Original && from.kind == Occupancy::CollisionTx)) {
        throw InputError("state not in this kernel's state space");
    }

    if (from.busy_left > 0) {
        if (kind_ == KernelKind::Original || i == 0) {
            emit(after_drain(from, 0), 1.0);
            return out;
        }
        // Busy channel: any station whose last CCA falls here fails.
        const auto fails = binomial_pmf(i, profile_.last_stage(t));
        for (int m = 0; m <= i; ++m) emit(after_drain(from, m), fails[static_cast<std::size_t>(m)]);
        return out;
    }

    if (i == 0) {
        emit(from, 1.0);
        return out;
    }

    const TransitionWeights tw = transition_weights(i, t, profile_, xi_);
    emit(ChainState{i - 1, l, Occupancy::SuccessTx}, tw.s);
    if (kind_ == KernelKind::Original) {
        emit(from, tw.w + tw.f[0]);
        for (int j = 1; j <= i; ++j) {
            emit(ChainState{i - j, 0, Occupancy::Idle}, tw.f[static_cast<std::size_t>(j)]);
        }
    } else {
        emit(ChainState{i, l, Occupancy::CollisionTx}, tw.c);
        emit(from, tw.w);
    }
    return out;
}

StateDistribution Kernel::step(std::int64_t t, const StateDistribution& current) const {
    StateDistribution next(current.n_stations(), current.packet_len());
    current.for_each([&](ChainState s, double p) {
        for (const Transition& tr : transitions(t, s)) next.add(tr.to, p * tr.probability);
    });
    return next;
}

// ---------------------------------------------------------------------------
// Propagation and metrics

std::int64_t default_horizon(const Kernel& kernel) noexcept {
    return kernel.profile().t_max + kernel.params().packet_len() + 1;
}

TransientResult propagate(const Kernel& kernel, std::optional<std::int64_t> horizon) {
    const std::int64_t min_horizon = kernel.profile().t_max + kernel.params().packet_len();
    const std::int64_t h = horizon.value_or(default_horizon(kernel));
    if (h < min_horizon) {
        throw InputError("horizon " + std::to_string(h) + " is shorter than t_max + L = " +
                         std::to_string(min_horizon));
    }

    std::vector<StateDistribution> per_slot;
    per_slot.reserve(static_cast<std::size_t>(h) + 1);
    per_slot.push_back(
        StateDistribution::initial(kernel.params().n_stations(), kernel.params().packet_len()));
    for (std::int64_t t = 0; t < h; ++t) {
        StateDistribution next = kernel.step(t, per_slot.back());
        const double mass = next.total();
        if (!(std::abs(mass - 1.0) <= kMassTolerance)) {
            throw ModelError("kernel leaked mass at slot " + std::to_string(t + 1) +
                             ": total " + std::to_string(mass));
        }
        per_slot.push_back(std::move(next));
    }
    return summarize(kernel.kind(), std::move(per_slot));
}

TransientResult summarize(KernelKind kind, std::vector<StateDistribution> per_slot) {
    if (per_slot.empty()) throw InputError("transient result needs at least one slot");
    TransientResult r;
    r.kind = kind;
    r.per_slot = std::move(per_slot);
    r.success_renewal = success_count_renewal(r);
    if (kind == KernelKind::Original) r.success_leibnitz = success_count_leibnitz(r);
    r.residual_mass = residual_mass(r);
    r.completion_cdf = completion_cdf(r);
    return r;
}

double success_count_renewal(const TransientResult& result) {
    double total = 0.0;
    for (std::size_t t = 1; t < result.per_slot.size(); ++t) {
        const StateDistribution& x = result.per_slot[t];
        for (int i = 0; i <= x.n_stations(); ++i) {
            total += x[ChainState{i, 1, Occupancy::SuccessTx}];
        }
    }
    return total;
}

double success_count_leibnitz(const TransientResult& result) {
    const StateDistribution& x = result.per_slot.back();
    double total = 0.0;
    x.for_each([&](ChainState s, double p) { total += (x.n_stations() - s.remaining) * p; });
    return total;
}

double residual_mass(const TransientResult& result) {
    const StateDistribution& x = result.per_slot.back();
    double stuck = 0.0;
    for (int i = 1; i <= x.n_stations(); ++i) stuck += x.idle_mass(i);
    return std::clamp(stuck, 0.0, 1.0);
}

std::vector<double> completion_cdf(const TransientResult& result) {
    std::vector<double> cdf;
    cdf.reserve(result.per_slot.size());
    for (const StateDistribution& x : result.per_slot) cdf.push_back(x.idle_mass(0));
    return cdf;
}

std::string_view to_string(KernelKind kind) noexcept {
    return kind == KernelKind::Original ? "original" : "improved";
}

}  // namespace batchmac::chain
