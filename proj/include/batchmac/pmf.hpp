#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace batchmac {

/// Probability mass function over non-negative integer slot offsets.
///
/// Canonical form: entries are non-negative, sum to 1 within 1e-12, and the
/// last stored entry is nonzero, so `max_support()` is the largest offset
/// carrying mass. Lookups past the stored range return 0.
class Pmf {
public:
    static constexpr double kMassTolerance = 1e-12;

    /// Validates and canonicalizes (trailing zeros trimmed). Throws
    /// InputError on negative/non-finite entries or mass != 1.
    explicit Pmf(std::vector<double> probs);

    /// Point mass at `offset`.
    static Pmf delta(std::int64_t offset);
    /// Mass 1/width on each of {0, ..., width-1}.
    static Pmf uniform(std::int64_t width);

    double operator[](std::int64_t t) const noexcept {
        return (t < 0 || t >= size()) ? 0.0 : probs_[static_cast<std::size_t>(t)];
    }

    std::int64_t size() const noexcept { return static_cast<std::int64_t>(probs_.size()); }
    std::int64_t max_support() const noexcept { return size() - 1; }
    std::span<const double> probs() const noexcept { return probs_; }
    double total() const noexcept;

    /// Same distribution moved `k` slots later.
    Pmf shifted(std::int64_t k) const;

    friend bool operator==(const Pmf&, const Pmf&) = default;

private:
    friend Pmf convolve(const Pmf& p, const Pmf& q);

    struct Trusted {};
    Pmf(std::vector<double> probs, Trusted);

    std::vector<double> probs_;
};

/// Discrete convolution (p * q)(t) = sum_s p(s) q(t - s) by direct summation.
/// The result has support length |p| + |q| - 1.
Pmf convolve(const Pmf& p, const Pmf& q);

}  // namespace batchmac
