#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <vector>

#include "knudsen/errors.hpp"
#include "knudsen/skew_rep.hpp"
#include "oracles.hpp"

using namespace knudsen;

namespace {

const MapParams kAlpha05(0.5);

std::vector<CylinderWord> all_words(std::size_t length) {
    std::vector<CylinderWord> out;
    std::size_t count = 1;
    for (std::size_t i = 0; i < length; ++i) count *= 4;
    for (std::size_t code = 0; code < count; ++code) {
        std::vector<Branch> w;
        std::size_t c = code;
        for (std::size_t i = 0; i < length; ++i, c /= 4) w.push_back(branch_from_int(int(c % 4) + 1));
        out.emplace_back(std::move(w));
    }
    return out;
}

}  // namespace

TEST_CASE("CylinderWord") {
    CHECK_THROWS_AS(CylinderWord({}), Error);
    const int bad[] = {1, 5};
    CHECK_THROWS_AS(CylinderWord::from_ints(bad), Error);
    const int good[] = {1, 3, 2};
    const auto w = CylinderWord::from_ints(good);
    CHECK(w.size() == 3);
    CHECK(w.indices()[2] == Branch::two);
}

TEST_CASE("locate_branch and skew_step") {
    CHECK(locate_branch({0.3, 0.2}, kAlpha05) == Branch::one);
    CHECK(locate_branch({0.3, pi / 2}, kAlpha05) == Branch::one);
    CHECK(locate_branch({0.7, pi / 2}, kAlpha05) == Branch::three);

    const auto a = skew_step({0.3, 0.2}, kAlpha05);
    CHECK(a.y == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(a.x == doctest::Approx(1.2).epsilon(1e-15));
    const auto b = skew_step({0.7, pi / 2}, kAlpha05);
    CHECK(b.y == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(b.x == doctest::Approx(pi / 2 - 1).epsilon(1e-15));

    CHECK_THROWS_AS(skew_step({1.0, 0.2}, kAlpha05), Error);
    CHECK_THROWS_AS(skew_step({-0.1, 0.2}, kAlpha05), Error);
    CHECK_THROWS_AS(skew_step({0.5, 3.5}, kAlpha05), Error);

    for (int i = 0; i < 1000; ++i) {
        const double y = std::nextafter(1.0, 0.0) * i / 999.0;
        for (double x : {0.3, 0.9, 1.4, 2.0, 2.2, 2.9}) {
            const auto q = skew_step({y, x}, kAlpha05);
            CHECK(q.y >= 0.0);
            CHECK(q.y < 1.0);
            CHECK(q.x >= 0.0);
            CHECK(q.x <= pi);
        }
    }
}

TEST_CASE("fiber of a single letter is its slab") {
    for (double x : {0.2, 0.7, 1.2, 2.0, 2.5, 3.0}) {
        double lo = 0;
        for (Branch k : kBranches) {
            const int word[] = {index_of(k)};
            const auto f = cylinder_fiber(x, CylinderWord::from_ints(word), kAlpha05);
            const double p = oracle::table_probs(x, 0.5)[index_of(k) - 1];
            CHECK(f.length() == doctest::Approx(std::max(p, 0.0)).epsilon(1e-13));
            if (!f.empty()) {
                CHECK(f.lo == doctest::Approx(lo).epsilon(1e-13));
                lo = f.hi;
            }
        }
        CHECK(lo == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("fiber length equals the product of branch probabilities") {
    double worst = 0;
    for (std::size_t n = 1; n <= 5; ++n) {
        for (const auto& w : all_words(n)) {
            for (int i = 0; i < 40; ++i) {
                const double x = pi * (i + 0.37) / 40;
                const auto f = cylinder_fiber(x, w, kAlpha05);
                worst = std::max(worst, std::abs(f.length() - fiber_measure(x, w, kAlpha05)));
            }
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("fiber_measure against the oracle table") {
    const int word[] = {3, 2, 1};
    const auto w = CylinderWord::from_ints(word);
    const double x = 0.9;
    // i_n = 1 first, then 2, then 3
    const auto taus = oracle::table_taus(0.5);
    double t = x, product = 1;
    for (int k : {0, 1, 2}) {
        product *= oracle::table_probs(t, 0.5)[k];
        t = taus[k].first * t + taus[k].second;
    }
    CHECK(fiber_measure(x, w, kAlpha05) == doctest::Approx(product).epsilon(1e-13));
}

TEST_CASE("fibers partition [0,1) and refine") {
    for (double x : {0.1, 0.8, 1.5, 2.05, 2.4, 3.1}) {
        for (std::size_t n = 1; n <= 4; ++n) {
            double sum = 0;
            for (const auto& w : all_words(n)) sum += cylinder_fiber(x, w, kAlpha05).length();
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
        // Extending a word on the left splits its fiber into the children.
        for (const auto& w : all_words(3)) {
            const auto parent = cylinder_fiber(x, w, kAlpha05);
            double child_sum = 0;
            for (Branch k : kBranches) {
                std::vector<Branch> longer = {k};
                longer.insert(longer.end(), w.indices().begin(), w.indices().end());
                const auto c = cylinder_fiber(x, CylinderWord(longer), kAlpha05);
                if (!c.empty()) {
                    CHECK(c.lo >= parent.lo - 1e-15);
                    CHECK(c.hi <= parent.hi + 1e-15);
                }
                child_sum += c.length();
            }
            CHECK(child_sum == doctest::Approx(parent.length()).epsilon(1e-12));
        }
    }
}

TEST_CASE("fiber membership agrees with iterating the skew map") {
    std::size_t compared = 0;
    for (double x : {0.15, 0.9, 1.3, 1.9, 2.1, 2.6}) {
        for (const auto& w : all_words(4)) {
            const auto f = cylinder_fiber(x, w, kAlpha05);
            for (int i = 0; i < 200; ++i) {
                const double y = (i + 0.5) / 200;
                if (std::abs(y - f.lo) < 1e-9 || std::abs(y - f.hi) < 1e-9) continue;
                SkewPoint p{y, x};
                bool follows = true;
                const auto idx = w.indices();
                for (std::size_t s = idx.size(); s-- > 0;) {
                    if (locate_branch(p, kAlpha05) != idx[s]) {
                        follows = false;
                        break;
                    }
                    p = skew_step(p, kAlpha05);
                }
                const bool inside = !f.empty() && y >= f.lo && y < f.hi;
                CHECK(follows == inside);
                ++compared;
            }
        }
    }
    CHECK(compared > 100000);
}

TEST_CASE("skew_consistency_check") {
    const auto nu = atomize_density(uniform_density(), 1, 45);
    const auto r = skew_consistency_check(nu, {0.0, pi / 2}, 3, 20000, 11, kAlpha05, 1);
    const auto exact = evolve(nu, 3, kAlpha05).back().mass({0.0, pi / 2});
    CHECK(r.exact == doctest::Approx(exact).epsilon(1e-14));
    CHECK(std::abs(r.estimate - r.exact) < 4 * r.standard_error);

    // Deterministic in (seed, samples) for any worker count.
    for (unsigned w : {2u, 5u, 0u}) {
        const auto again = skew_consistency_check(nu, {0.0, pi / 2}, 3, 20000, 11, kAlpha05, w);
        CHECK(again.estimate == r.estimate);
    }

    const auto dirac = skew_consistency_check(AtomicMeasure::dirac(0.2), {1.0, 1.3}, 1, 1000, 1, kAlpha05);
    CHECK(dirac.exact == 1.0);
    CHECK(dirac.estimate == 1.0);

    const auto empty = skew_consistency_check(nu, {1.0, 1.0}, 2, 100, 1, kAlpha05);
    CHECK(empty.exact == 0.0);
    CHECK_THROWS_AS(skew_consistency_check(nu, {0.0, 1.0}, -1, 100, 1, kAlpha05), Error);
    CHECK_THROWS_AS(skew_consistency_check(nu, {0.0, 1.0}, 1, 0, 1, kAlpha05), Error);
}

TEST_CASE("skew map preserves uniform x sine law") {
    const double n = 1e6;
    const auto r = skew_pushforward_check(std::size_t(n), 3, kAlpha05, 32);
    CHECK(r.first_bins == 32);
    CHECK(r.angle_bins == 32);
    CHECK(r.observed.size() == 1024);
    // A per-bin 4 sigma rule over 1024 bins alarms about 5% of the time under
    // the null, so judge the whole table with Pearson's chi-square instead.
    double chi2 = 0;
    for (std::size_t j = 0; j < r.observed.size(); ++j) {
        const double d = (r.observed[j] - r.expected[j]) * n;
        chi2 += d * d / (r.expected[j] * n);
    }
    const double p_value = boost::math::cdf(
        boost::math::complement(boost::math::chi_squared(1023), chi2));
    MESSAGE("chi2 = " << chi2 << ", p = " << p_value << ", max z = " << r.max_z);
    CHECK(p_value > 1e-3);
    CHECK(r.failed_bins <= 2);
    const auto again = skew_pushforward_check(1'000'000, 3, kAlpha05, 32, 3);
    CHECK(again.observed == r.observed);
}

TEST_CASE("summarize_invariance") {
    // 2 x 2 grid, angle bins split at pi/2 carry half the sine law each.
    const auto r = summarize_invariance(2, 2, {250, 250, 250, 250}, 1000);
    for (double e : r.expected) CHECK(e == doctest::Approx(0.25));
    CHECK(r.max_z == doctest::Approx(0.0));
    CHECK(r.passed);
    const auto bad = summarize_invariance(2, 2, {400, 100, 250, 250}, 1000);
    CHECK_FALSE(bad.passed);
    CHECK(bad.failed_bins == 2);
}
