#include "batchmac/pmf.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "batchmac/error.hpp"

namespace batchmac {

namespace {

void trim_trailing_zeros(std::vector<double>& v) {
    while (!v.empty() && v.back() == 0.0) v.pop_back();
}

}  // namespace

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
    for (std::size_t t = 0; t < probs_.size(); ++t) {
        if (!std::isfinite(probs_[t]) || probs_[t] < 0.0) {
            throw InputError("pmf entry at offset " + std::to_string(t) +
                             " is negative or not finite");
        }
    }
    trim_trailing_zeros(probs_);
    const double mass = total();
    if (std::abs(mass - 1.0) > kMassTolerance) {
        throw InputError("pmf mass is " + std::to_string(mass) + ", expected 1");
    }
}

Pmf::Pmf(std::vector<double> probs, Trusted) : probs_(std::move(probs)) {
    trim_trailing_zeros(probs_);
}

Pmf Pmf::delta(std::int64_t offset) {
    if (offset < 0) throw InputError("delta offset must be >= 0");
    std::vector<double> v(static_cast<std::size_t>(offset) + 1, 0.0);
    v.back() = 1.0;
    return Pmf(std::move(v), Trusted{});
}

Pmf Pmf::uniform(std::int64_t width) {
    if (width < 1) throw InputError("uniform pmf width must be >= 1");
    return Pmf(std::vector<double>(static_cast<std::size_t>(width), 1.0 / static_cast<double>(width)),
               Trusted{});
}

double Pmf::total() const noexcept {
    return std::accumulate(probs_.begin(), probs_.end(), 0.0);
}

Pmf Pmf::shifted(std::int64_t k) const {
    if (k < 0) throw InputError("pmf shift must be >= 0");
    std::vector<double> v(static_cast<std::size_t>(k), 0.0);
    v.insert(v.end(), probs_.begin(), probs_.end());
    return Pmf(std::move(v), Trusted{});
}

Pmf convolve(const Pmf& p, const Pmf& q) {
    const auto a = p.probs();
    const auto b = q.probs();
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return Pmf(std::move(out), Pmf::Trusted{});
}

}  // namespace batchmac
