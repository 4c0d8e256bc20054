#pragma once

#include <cstdint>
#include <string_view>

namespace batchmac {

/// Unvalidated MAC/network parameter record, as read from a config or API.
struct RawParams {
    std::int64_t be_min = 3;
    std::int64_t be_max = 5;
    std::int64_t nb_max = 4;
    std::int64_t cw = 1;
    std::int64_t packet_len = 1;
    std::int64_t n_stations = 1;

    friend bool operator==(const RawParams&, const RawParams&) = default;
};

/// Validated slotted CSMA/CA parameters. Only obtainable through validate(),
/// so holding one means every invariant holds:
///   0 <= be_min <= be_max <= 15, nb_max >= 0, cw in {1,2},
///   packet_len >= 1, n_stations >= 1.
/// CCA attempts within one contention are indexed 0..nb_max.
class ProtocolParams {
public:
    int be_min() const noexcept { return be_min_; }
    int be_max() const noexcept { return be_max_; }
    int nb_max() const noexcept { return nb_max_; }
    int cw() const noexcept { return cw_; }
    int packet_len() const noexcept { return packet_len_; }
    int n_stations() const noexcept { return n_stations_; }

    RawParams raw() const noexcept;

    /// Copy with a different station count / packet length (re-validated).
    ProtocolParams with_stations(std::int64_t n) const;
    ProtocolParams with_packet_len(std::int64_t l) const;

    /// True when the backoff law (be_min, be_max, nb_max) matches.
    bool same_backoff(const ProtocolParams& other) const noexcept {
        return be_min_ == other.be_min_ && be_max_ == other.be_max_ && nb_max_ == other.nb_max_;
    }

    friend bool operator==(const ProtocolParams&, const ProtocolParams&) = default;

private:
    friend ProtocolParams validate(const RawParams& raw);
    ProtocolParams() = default;

    int be_min_ = 0;
    int be_max_ = 0;
    int nb_max_ = 0;
    int cw_ = 1;
    int packet_len_ = 1;
    int n_stations_ = 1;
};

/// Checks every invariant in field order and throws ValidationError naming
/// the first violated field.
ProtocolParams validate(const RawParams& raw);

/// IEEE 802.15.4 default backoff law in NACK mode: BE_min=3, BE_max=5,
/// NB_max=4, CW=1.
ProtocolParams default_params(std::int64_t n_stations = 1, std::int64_t packet_len = 1);

/// W_k = 2^min(be_min + k, be_max). Backoff draws at stage k are uniform on
/// {0, ..., W_k - 1}. Throws InputError unless 0 <= k <= nb_max.
std::int64_t window_size(const ProtocolParams& params, int k);

/// How a zero backoff draw after a busy CCA is interpreted.
enum class BackoffSemantics {
    Naive,      ///< re-senses the slot that was just found busy
    Corrected,  ///< senses the next slot; every retry costs at least one slot
};

/// What a station does after its transmission collides.
enum class RetryPolicy {
    NackDone,           ///< any transmitter is finished (no ACKs, no collision knowledge)
    CollisionContinue,  ///< collided stations resume backoff at the next stage, no reset
};

std::string_view to_string(BackoffSemantics s) noexcept;
std::string_view to_string(RetryPolicy p) noexcept;

}  // namespace batchmac
