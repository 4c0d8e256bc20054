#include "batchmac/protocol.hpp"

#include <algorithm>
#include <string>

#include "batchmac/error.hpp"

namespace batchmac {

namespace {

constexpr std::int64_t kMaxBackoffExponent = 15;
// Keeps every field representable as int.
constexpr std::int64_t kIntFieldLimit = 1'000'000'000;

void require(bool ok, const char* field, const std::string& what) {
    if (!ok) throw ValidationError(field, what);
}

}  // namespace

ProtocolParams validate(const RawParams& raw) {
    require(raw.be_min >= 0, "be_min", "must be >= 0, got " + std::to_string(raw.be_min));
    require(raw.be_max <= kMaxBackoffExponent, "be_max",
            "must be <= 15, got " + std::to_string(raw.be_max));
    require(raw.be_min <= raw.be_max, "be_min",
            "must not exceed be_max (" + std::to_string(raw.be_min) + " > " +
                std::to_string(raw.be_max) + ")");
    require(raw.nb_max >= 0 && raw.nb_max <= kIntFieldLimit, "nb_max",
            "must be >= 0, got " + std::to_string(raw.nb_max));
    require(raw.cw == 1 || raw.cw == 2, "cw", "must be 1 or 2, got " + std::to_string(raw.cw));
    require(raw.packet_len >= 1 && raw.packet_len <= kIntFieldLimit, "packet_len",
            "must be >= 1, got " + std::to_string(raw.packet_len));
    require(raw.n_stations >= 1 && raw.n_stations <= kIntFieldLimit, "n_stations",
            "must be >= 1, got " + std::to_string(raw.n_stations));

    ProtocolParams p;
    p.be_min_ = static_cast<int>(raw.be_min);
    p.be_max_ = static_cast<int>(raw.be_max);
    p.nb_max_ = static_cast<int>(raw.nb_max);
    p.cw_ = static_cast<int>(raw.cw);
    p.packet_len_ = static_cast<int>(raw.packet_len);
    p.n_stations_ = static_cast<int>(raw.n_stations);
    return p;
}

RawParams ProtocolParams::raw() const noexcept {
    return RawParams{be_min_, be_max_, nb_max_, cw_, packet_len_, n_stations_};
}

ProtocolParams ProtocolParams::with_stations(std::int64_t n) const {
    RawParams r = raw();
    r.n_stations = n;
    return validate(r);
}

ProtocolParams ProtocolParams::with_packet_len(std::int64_t l) const {
    RawParams r = raw();
    r.packet_len = l;
    return validate(r);
}

ProtocolParams default_params(std::int64_t n_stations, std::int64_t packet_len) {
    return validate(RawParams{3, 5, 4, 1, packet_len, n_stations});
}

std::int64_t window_size(const ProtocolParams& params, int k) {
    if (k < 0 || k > params.nb_max()) {
        throw InputError("backoff stage " + std::to_string(k) + " outside 0.." +
                         std::to_string(params.nb_max()));
    }
    const std::int64_t exponent =
        std::min<std::int64_t>(static_cast<std::int64_t>(params.be_min()) + k, params.be_max());
    return std::int64_t{1} << exponent;
}

std::string_view to_string(BackoffSemantics s) noexcept {
    return s == BackoffSemantics::Naive ? "naive" : "corrected";
}

std::string_view to_string(RetryPolicy p) noexcept {
    return p == RetryPolicy::NackDone ? "nack_done" : "collision_continue";
}

}  // namespace batchmac
