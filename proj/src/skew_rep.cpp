#include "knudsen/skew_rep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "knudsen/errors.hpp"
#include "knudsen/rng.hpp"
#include "parallel.hpp"

namespace knudsen {

namespace {

void check_point(const SkewPoint& p) {
    if (!(p.y >= 0.0 && p.y < 1.0) || !(p.x >= 0.0 && p.x <= pi)) {
        fail(ErrorCode::domain, "skew point (" + std::to_string(p.y) + ", " +
                                    std::to_string(p.x) +
                                    ") outside [0,1) x [0,pi]");
    }
}

// Recursion over the word prefix indices[0..last].
FiberInterval pull_back(double x, std::span<const Branch> word,
                        const MapParams& params) {
    const Branch k = word.back();
    const Slab slab = branch_slab(k, x, params);
    if (slab.width == 0.0) return {0.0, 0.0};
    if (word.size() == 1) return {slab.lower, slab.lower + slab.width};

    const FiberInterval inner =
        pull_back(live_image(k, x, params), word.first(word.size() - 1), params);
    if (inner.empty()) return {0.0, 0.0};
    const FiberInterval out{slab.lower + slab.width * inner.lo,
                            slab.lower + slab.width * inner.hi};
    if (out.lo > out.hi) {
        fail(ErrorCode::invariant, "cylinder fiber lost its orientation");
    }
    return out;
}

// Inverse-CDF draw of an atom.
double draw_atom(std::span<const Atom> atoms, std::span<const double> cdf,
                 double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto i = std::min<std::size_t>(
        static_cast<std::size_t>(it - cdf.begin()), atoms.size() - 1);
    return atoms[i].theta;
}

}  // namespace

CylinderWord::CylinderWord(std::vector<Branch> indices)
    : indices_(std::move(indices)) {
    if (indices_.empty()) fail(ErrorCode::invalid_argument, "empty word");
}

CylinderWord CylinderWord::from_ints(std::span<const int> indices) {
    std::vector<Branch> out;
    out.reserve(indices.size());
    for (int k : indices) out.push_back(branch_from_int(k));
    return CylinderWord(std::move(out));
}

Branch locate_branch(const SkewPoint& p, const MapParams& params) {
    check_point(p);
    return sample_branch(p.x, p.y, params);
}

SkewPoint skew_step(const SkewPoint& p, const MapParams& params) {
    check_point(p);
    const Slab slab = locate_slab(p.x, p.y, params);
    double y = (p.y - slab.lower) / slab.width;
    if (y < -kRoundoff || y >= 1.0 + kRoundoff) {
        fail(ErrorCode::invariant,
             "skew update left [0,1): y' = " + std::to_string(y));
    }
    if (y >= 1.0) y = std::nextafter(1.0, 0.0);
    if (y < 0.0) y = 0.0;
    return {y, live_image(slab.branch, p.x, params)};
}

FiberInterval cylinder_fiber(double x, const CylinderWord& w,
                             const MapParams& params) {
    if (!(x >= 0.0 && x <= pi)) {
        fail(ErrorCode::domain, "angle outside [0, pi]");
    }
    return pull_back(x, w.indices(), params);
}

double fiber_measure(double x, const CylinderWord& w,
                     const MapParams& params) {
    const auto word = w.indices();
    double product = 1.0;
    // i_n acts first, so walk the stored word from the back.
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        const double p = prob(*it, x, params);
        if (p == 0.0) return 0.0;
        product *= p;
        x = live_image(*it, x, params);
    }
    return product;
}

SkewConsistency skew_consistency_check(const AtomicMeasure& nu, const Interval& a,
                               int steps, std::size_t samples,
                               std::uint64_t seed, const MapParams& params,
                               unsigned workers) {
    if (steps < 0) fail(ErrorCode::invalid_argument, "negative step count");
    if (samples == 0) fail(ErrorCode::invalid_argument, "zero samples");
    if (a.empty()) return {0.0, 0.0, 0.0};

    double exact = 0.0;
    for_each_step(nu, steps, params, [&](int s, const AtomicMeasure& m) {
        if (s == steps) exact = m.mass(a);
    });

    const auto atoms = nu.atoms();
    std::vector<double> cdf(atoms.size());
    double running = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        running += atoms[i].weight;
        cdf[i] = running;
    }

    const CounterRng rng(seed);
    const unsigned w = detail::resolve_workers(workers, samples);
    std::vector<std::size_t> hits(w, 0);
    detail::parallel_chunks(
        samples, w, [&](unsigned t, std::size_t begin, std::size_t end) {
            std::size_t local = 0;
            for (std::size_t i = begin; i < end; ++i) {
                const auto u = rng.uniform2(i, 0);
                SkewPoint p{u[0], draw_atom(atoms, cdf, u[1])};
                for (int s = 0; s < steps; ++s) p = skew_step(p, params);
                if (a.contains(p.x)) ++local;
            }
            hits[t] = local;
        });
    std::size_t total = 0;
    for (std::size_t h : hits) total += h;

    const double n = static_cast<double>(samples);
    const double estimate = static_cast<double>(total) / n;
    return {exact, estimate, std::sqrt(estimate * (1.0 - estimate) / n)};
}

InvarianceReport skew_pushforward_check(std::size_t samples,
                                        std::uint64_t seed,
                                        const MapParams& params,
                                        std::size_t bins, unsigned workers) {
    if (samples == 0 || bins == 0) {
        fail(ErrorCode::invalid_argument, "zero samples or bins");
    }
    const CounterRng rng(seed);
    const unsigned w = detail::resolve_workers(workers, samples);
    std::vector<std::vector<std::size_t>> counts(
        w, std::vector<std::size_t>(bins * bins, 0));
    detail::parallel_chunks(
        samples, w, [&](unsigned t, std::size_t begin, std::size_t end) {
            auto& c = counts[t];
            for (std::size_t i = begin; i < end; ++i) {
                const auto u = rng.uniform2(i, 0);
                const SkewPoint next =
                    skew_step({u[0], std::acos(1.0 - 2.0 * u[1])}, params);
                const auto iy = std::min(
                    static_cast<std::size_t>(next.y * static_cast<double>(bins)),
                    bins - 1);
                ++c[iy * bins + bin_index(next.x, bins)];
            }
        });
    std::vector<std::size_t> total(bins * bins, 0);
    for (const auto& c : counts) {
        for (std::size_t j = 0; j < c.size(); ++j) total[j] += c[j];
    }
    return summarize_invariance(bins, bins, total, samples);
}

}  // namespace knudsen
