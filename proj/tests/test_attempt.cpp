#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "batchmac/attempt.hpp"
#include "batchmac/error.hpp"

using namespace batchmac;

namespace {

// Brute force: walk every tuple of backoff draws (x_0..x_k) and record when
// the k-th CCA happens. Naive: sum x_i. Corrected: sum x_i + k.
std::map<std::int64_t, double> oracle_stage_pmf(const ProtocolParams& p, int k,
                                                BackoffSemantics s) {
    std::vector<std::int64_t> w;
    std::int64_t total = 1;
    for (int i = 0; i <= k; ++i) {
        w.push_back(std::int64_t{1} << std::min(p.be_min() + i, p.be_max()));
        total *= w.back();
    }
    std::map<std::int64_t, std::int64_t> counts;
    std::vector<std::int64_t> x(w.size(), 0);
    for (std::int64_t n = 0; n < total; ++n) {
        std::int64_t t = std::accumulate(x.begin(), x.end(), std::int64_t{0});
        if (s == BackoffSemantics::Corrected) t += k;
        ++counts[t];
        for (std::size_t d = 0; d < x.size(); ++d) {
            if (++x[d] < w[d]) break;
            x[d] = 0;
        }
    }
    std::map<std::int64_t, double> out;
    for (auto [t, c] : counts) out[t] = static_cast<double>(c) / static_cast<double>(total);
    return out;
}

}  // namespace

TEST_CASE("Pmf canonicalizes and rejects bad mass") {
    const Pmf p(std::vector<double>{0.5, 0.5, 0.0, 0.0});
    CHECK(p.size() == 2);
    CHECK(p.max_support() == 1);
    CHECK(p[5] == 0.0);
    CHECK(p[-1] == 0.0);
    CHECK_THROWS_AS(Pmf(std::vector<double>{0.5, 0.4}), InputError);
    CHECK_THROWS_AS(Pmf(std::vector<double>{1.5, -0.5}), InputError);
    CHECK_THROWS_AS(Pmf(std::vector<double>{}), InputError);
    CHECK(Pmf::delta(3).max_support() == 3);
    CHECK(Pmf::delta(3)[3] == 1.0);
}

TEST_CASE("uniform_backoff_pmf") {
    const ProtocolParams p = default_params();
    const Pmf b0 = uniform_backoff_pmf(p, 0);
    CHECK(b0.size() == 8);
    for (std::int64_t t = 0; t < 8; ++t) CHECK(b0[t] == 0.125);
    const Pmf b2 = uniform_backoff_pmf(p, 2);
    CHECK(b2.size() == 32);
    CHECK(b2[31] == 1.0 / 32);

    const ProtocolParams tiny = validate(RawParams{1, 1, 0, 1, 1, 1});
    const Pmf b = uniform_backoff_pmf(tiny, 0);
    CHECK(b.size() == 2);
    CHECK(b[0] == 0.5);
    CHECK(b[1] == 0.5);
    CHECK_THROWS_AS(uniform_backoff_pmf(tiny, 1), InputError);
}

TEST_CASE("convolve") {
    const Pmf coin = Pmf::uniform(2);
    CHECK(convolve(Pmf::delta(0), coin) == coin);
    const Pmf two = convolve(coin, coin);
    REQUIRE(two.size() == 3);
    CHECK(two[0] == 0.25);
    CHECK(two[1] == 0.5);
    CHECK(two[2] == 0.25);

    const ProtocolParams p = default_params();
    const Pmf b01 = convolve(uniform_backoff_pmf(p, 0), uniform_backoff_pmf(p, 1));
    CHECK(b01.size() == 8 + 16 - 1);
    CHECK(std::abs(b01.total() - 1.0) < 1e-12);
}

TEST_CASE("attempt_profile at defaults") {
    const ProtocolParams p = default_params();
    const AttemptProfile naive = attempt_profile(p, BackoffSemantics::Naive);
    const AttemptProfile corrected = attempt_profile(p, BackoffSemantics::Corrected);

    // 1/8 + 1/128 + 1/4096 + 1/131072 + 1/4194304 as an exact rational.
    CHECK(naive.a[0] == doctest::Approx(558113.0 / 4194304.0).epsilon(1e-15));
    CHECK(std::abs(naive.a[0] - 0.1330643) < 1e-6);
    CHECK(corrected.a[0] == 0.125);

    CHECK(naive.t_max == 115);
    CHECK(corrected.t_max == 119);
    for (const auto* prof : {&naive, &corrected}) {
        REQUIRE(prof->stage_pmfs.size() == 5);
        for (const Pmf& d : prof->stage_pmfs) CHECK(std::abs(d.total() - 1.0) < 1e-12);
        const double sum = std::accumulate(prof->a.begin(), prof->a.end(), 0.0);
        CHECK(std::abs(sum - 5.0) < 1e-9);
        CHECK(prof->a.back() > 0.0);
        CHECK(prof->attempt(prof->t_max + 1) == 0.0);
    }
}

TEST_CASE("attempt_profile with nb_max = 0 is b_0 under both semantics") {
    const ProtocolParams p = validate(RawParams{3, 5, 0, 1, 1, 1});
    for (auto s : {BackoffSemantics::Naive, BackoffSemantics::Corrected}) {
        const AttemptProfile prof = attempt_profile(p, s);
        CHECK(prof.t_max == 7);
        for (std::int64_t t = 0; t < 8; ++t) CHECK(prof.attempt(t) == 0.125);
    }
}

TEST_CASE("attempt_profile matches brute-force draw enumeration") {
    for (auto [lo, hi, nb] : std::vector<std::tuple<int, int, int>>{
             {1, 1, 2}, {1, 3, 2}, {2, 3, 3}, {0, 2, 3}, {3, 5, 2}}) {
        const ProtocolParams p = validate(RawParams{lo, hi, nb, 1, 1, 1});
        for (auto s : {BackoffSemantics::Naive, BackoffSemantics::Corrected}) {
            const std::vector<Pmf> stages = stage_pmfs(p, s);
            for (int k = 0; k <= nb; ++k) {
                const auto oracle = oracle_stage_pmf(p, k, s);
                const Pmf& d = stages[static_cast<std::size_t>(k)];
                CHECK(d.max_support() == oracle.rbegin()->first);
                for (auto [t, prob] : oracle) CHECK(std::abs(d[t] - prob) < 1e-15);
            }
        }
    }
}

TEST_CASE("naive profile rejects slots with more than unit attempt mass") {
    // Re-sensing the same slot lets several stages land on one slot: with
    // W = 2 throughout, a(1) = 1/2 + 1/2 + 3/8.
    const ProtocolParams p = validate(RawParams{1, 1, 2, 1, 1, 1});
    CHECK_THROWS_AS(attempt_profile(p, BackoffSemantics::Naive), InputError);
    CHECK_NOTHROW(attempt_profile(p, BackoffSemantics::Corrected));
    const ProtocolParams zero = validate(RawParams{0, 1, 3, 1, 1, 1});
    CHECK_THROWS_AS(attempt_profile(zero, BackoffSemantics::Naive), InputError);
}

TEST_CASE("attempt_profile honours the slot cap") {
    const ProtocolParams p = validate(RawParams{15, 15, 40, 1, 1, 1});
    CHECK(max_reach_slot(p, BackoffSemantics::Corrected) == 41 * 32768 - 1);
    CHECK_THROWS_AS(attempt_profile(p, BackoffSemantics::Corrected), InputError);
    CHECK_THROWS_AS(attempt_profile(default_params(), BackoffSemantics::Corrected,
                                    AttemptOptions{100}),
                    InputError);
}

TEST_CASE("max_reach_slot") {
    const ProtocolParams p = default_params();
    CHECK(max_reach_slot(p, BackoffSemantics::Corrected) == 119);
    CHECK(corrected_t_max_closed_form(p) == 119);
    CHECK(max_reach_slot(p, BackoffSemantics::Naive) == 7 + 15 + 31 + 31 + 31);

    const ProtocolParams one = validate(RawParams{1, 1, 0, 1, 1, 1});
    CHECK(max_reach_slot(one, BackoffSemantics::Naive) == 1);
    CHECK(max_reach_slot(one, BackoffSemantics::Corrected) == 1);
}

TEST_CASE("property: exhaustive small sweep of the corrected horizon") {
    for (int hi = 0; hi <= 7; ++hi) {
        for (int lo = 0; lo <= hi; ++lo) {
            for (int nb = 0; nb <= 6; ++nb) {
                const ProtocolParams p = validate(RawParams{lo, hi, nb, 1, 1, 1});
                const AttemptProfile corrected = attempt_profile(p, BackoffSemantics::Corrected);
                const std::int64_t support = corrected.stage_pmfs.back().max_support();
                CHECK(corrected.t_max == support);
                CHECK(max_reach_slot(p, BackoffSemantics::Corrected) == support);
                CHECK(max_reach_slot(p, BackoffSemantics::Corrected) -
                          max_reach_slot(p, BackoffSemantics::Naive) ==
                      nb);
                if (closed_form_applies(p)) {
                    CHECK(corrected_t_max_closed_form(p) == support);
                } else {
                    // The window never reaches 2^be_max, so the closed form overshoots
                    // by the windows it assumes but never uses.
                    CHECK(corrected_t_max_closed_form(p) != support);
                }

                for (const Pmf& d : corrected.stage_pmfs) CHECK(std::abs(d.total() - 1.0) < 1e-12);
                for (double a : corrected.a) CHECK((a >= 0.0 && a <= 1.0));

                const std::vector<Pmf> naive = stage_pmfs(p, BackoffSemantics::Naive);
                std::vector<double> naive_a(static_cast<std::size_t>(support) + 1, 0.0);
                for (const Pmf& d : naive) {
                    for (std::int64_t t = 0; t < d.size(); ++t) {
                        naive_a[static_cast<std::size_t>(t)] += d[t];
                    }
                }
                if (*std::max_element(naive_a.begin(), naive_a.end()) > 1.0 + 1e-12) {
                    CHECK_THROWS_AS(attempt_profile(p, BackoffSemantics::Naive), InputError);
                } else {
                    for (double a : attempt_profile(p, BackoffSemantics::Naive).a) {
                        CHECK((a >= 0.0 && a <= 1.0));
                    }
                }
                for (int k = 0; k <= nb; ++k) {
                    const Pmf& dn = naive[static_cast<std::size_t>(k)];
                    const Pmf& dc = corrected.stage_pmfs[static_cast<std::size_t>(k)];
                    CHECK(dc.max_support() == dn.max_support() + k);
                    for (std::int64_t t = 0; t <= dc.max_support(); ++t) {
                        CHECK(dc[t] == doctest::Approx(dn[t - k]).epsilon(1e-12));
                    }
                }
            }
        }
    }
}
