#include "knudsen/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "knudsen/errors.hpp"
#include "knudsen/rng.hpp"
#include "parallel.hpp"

namespace knudsen {

namespace {

void check_angle(double theta) {
    if (!(theta >= 0.0 && theta <= pi)) {
        fail(ErrorCode::domain,
             "atom at " + std::to_string(theta) + " outside [0, pi]");
    }
}

std::vector<Atom> sort_and_merge(std::vector<Atom> atoms) {
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.theta < b.theta; });
    std::vector<Atom> merged;
    merged.reserve(atoms.size());
    for (const Atom& a : atoms) {
        if (!merged.empty() &&
            a.theta - merged.back().theta < AtomicMeasure::kMergeTolerance) {
            merged.back().weight += a.weight;
        } else {
            merged.push_back(a);
        }
    }
    return merged;
}

double total_weight(const std::vector<Atom>& atoms) {
    double total = 0.0;
    for (const Atom& a : atoms) total += a.weight;
    return total;
}

}  // namespace

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) {
    std::erase_if(atoms, [](const Atom& a) { return a.weight == 0.0; });
    if (atoms.empty()) {
        fail(ErrorCode::invalid_argument, "measure has no atoms");
    }
    for (const Atom& a : atoms) {
        check_angle(a.theta);
        if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
            fail(ErrorCode::invalid_argument,
                 "atom weight " + std::to_string(a.weight) + " not positive");
        }
    }
    const double total = total_weight(atoms);
    if (std::abs(total - 1.0) > kMassTolerance) {
        fail(ErrorCode::invalid_argument,
             "atom weights sum to " + std::to_string(total) + ", not 1");
    }
    for (Atom& a : atoms) a.weight /= total;
    atoms_ = sort_and_merge(std::move(atoms));
}

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms, Trusted) {
    const double total = total_weight(atoms);
    if (atoms.empty() || std::abs(total - 1.0) > kMassTolerance) {
        fail(ErrorCode::invariant,
             "mass drifted to " + std::to_string(total));
    }
    for (Atom& a : atoms) a.weight /= total;
    atoms_ = sort_and_merge(std::move(atoms));
}

AtomicMeasure AtomicMeasure::normalized(std::vector<Atom> atoms) {
    double total = 0.0;
    for (const Atom& a : atoms) {
        if (a.weight < 0.0 || !std::isfinite(a.weight)) {
            fail(ErrorCode::invalid_argument,
                 "atom weight " + std::to_string(a.weight) + " is negative");
        }
        total += a.weight;
    }
    if (!(total > 0.0)) {
        fail(ErrorCode::invalid_argument, "zero total mass");
    }
    for (Atom& a : atoms) a.weight /= total;
    return AtomicMeasure(std::move(atoms));
}

AtomicMeasure AtomicMeasure::dirac(double theta) {
    return AtomicMeasure({{theta, 1.0}});
}

double AtomicMeasure::mass(const Interval& a) const {
    if (a.empty()) return 0.0;
    double m = 0.0;
    auto it = std::lower_bound(
        atoms_.begin(), atoms_.end(), a.lo,
        [](const Atom& atom, double lo) { return atom.theta < lo; });
    for (; it != atoms_.end() && a.contains(it->theta); ++it) m += it->weight;
    return m;
}

double mu_cdf(double theta) {
    check_angle(theta);
    return 0.5 * (1.0 - std::cos(theta));
}

AtomicMeasure kernel_step(const AtomicMeasure& nu, const MapParams& params) {
    std::vector<Atom> next;
    next.reserve(3 * nu.size());
    for (const Atom& a : nu.atoms()) {
        for (const KernelEntry& e : kernel_row(a.theta, params)) {
            next.push_back({e.image, a.weight * e.weight});
        }
    }
    return AtomicMeasure(std::move(next), AtomicMeasure::Trusted{});
}

void for_each_step(const AtomicMeasure& nu, int steps, const MapParams& params,
                   const std::function<void(int, const AtomicMeasure&)>& visit,
                   std::size_t atom_cap) {
    if (steps < 0) fail(ErrorCode::invalid_argument, "negative step count");
    AtomicMeasure current = nu;
    visit(0, current);
    for (int s = 1; s <= steps; ++s) {
        if (current.size() * kBranches.size() > atom_cap) {
            fail(ErrorCode::atom_cap,
                 "step " + std::to_string(s) + " could need " +
                     std::to_string(current.size() * kBranches.size()) +
                     " atoms, cap is " + std::to_string(atom_cap));
        }
        current = kernel_step(current, params);
        visit(s, current);
    }
}

std::vector<AtomicMeasure> evolve(const AtomicMeasure& nu, int steps,
                                  const MapParams& params,
                                  std::size_t atom_cap) {
    std::vector<AtomicMeasure> out;
    for_each_step(
        nu, steps, params,
        [&](int, const AtomicMeasure& m) { out.push_back(m); }, atom_cap);
    return out;
}

AtomicMeasure cesaro(std::span<const AtomicMeasure> nus) {
    if (nus.empty()) fail(ErrorCode::invalid_argument, "no measures to average");
    const double share = 1.0 / static_cast<double>(nus.size());
    std::vector<Atom> all;
    for (const AtomicMeasure& m : nus) {
        for (const Atom& a : m.atoms()) all.push_back({a.theta, a.weight * share});
    }
    return AtomicMeasure(std::move(all), AtomicMeasure::Trusted{});
}

ParticleEnsemble::ParticleEnsemble(std::vector<double> thetas,
                                   std::uint64_t seed)
    : thetas_(std::move(thetas)), seed_(seed) {
    if (thetas_.empty()) fail(ErrorCode::invalid_argument, "empty ensemble");
    for (double t : thetas_) check_angle(t);
}

ParticleEnsemble ParticleEnsemble::from_measure(const AtomicMeasure& nu,
                                                std::size_t particles,
                                                std::uint64_t seed) {
    if (particles == 0) fail(ErrorCode::invalid_argument, "zero particles");
    const auto atoms = nu.atoms();
    std::vector<std::size_t> counts(atoms.size());
    std::vector<double> remainders(atoms.size());
    std::size_t placed = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const double exact = atoms[i].weight * static_cast<double>(particles);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        remainders[i] = exact - static_cast<double>(counts[i]);
        placed += counts[i];
    }
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        return remainders[a] > remainders[b];
    });
    for (std::size_t i = 0; placed < particles; i = (i + 1) % order.size()) {
        ++counts[order[i]];
        ++placed;
    }
    std::vector<double> thetas;
    thetas.reserve(particles);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        thetas.insert(thetas.end(), counts[i], atoms[i].theta);
    }
    return ParticleEnsemble(std::move(thetas), seed);
}

void ParticleEnsemble::step(const MapParams& params, unsigned workers) {
    const CounterRng rng(seed_);
    const std::uint64_t step = step_count_;
    detail::parallel_chunks(
        thetas_.size(), workers,
        [&](unsigned, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double u = rng.uniform(i, step);
                const Branch k = sample_branch(thetas_[i], u, params);
                thetas_[i] = live_image(k, thetas_[i], params);
            }
        });
    ++step_count_;
}

ParticleEnsemble ensemble_step(const ParticleEnsemble& e,
                               const MapParams& params, unsigned workers) {
    ParticleEnsemble next = e;
    next.step(params, workers);
    return next;
}

Histogram::Histogram(std::vector<double> masses) : masses_(std::move(masses)) {
    if (masses_.empty()) fail(ErrorCode::invalid_argument, "zero bins");
    double total = 0.0;
    for (double m : masses_) {
        if (m < 0.0) fail(ErrorCode::invalid_argument, "negative bin mass");
        total += m;
    }
    if (std::abs(total - 1.0) > AtomicMeasure::kMassTolerance) {
        fail(ErrorCode::invalid_argument,
             "bin masses sum to " + std::to_string(total));
    }
}

namespace {

double edge(std::size_t j, std::size_t bins) {
    return pi * static_cast<double>(j) / static_cast<double>(bins);
}

}  // namespace

double Histogram::bin_lo(std::size_t j) const noexcept {
    return edge(j, masses_.size());
}

double Histogram::bin_hi(std::size_t j) const noexcept {
    return edge(j + 1, masses_.size());
}

std::size_t bin_index(double theta, std::size_t bins) {
    if (bins == 0) fail(ErrorCode::invalid_argument, "zero bins");
    check_angle(theta);
    auto j = static_cast<std::size_t>(
        std::min(std::floor(theta / pi * static_cast<double>(bins)),
                 static_cast<double>(bins - 1)));
    while (j > 0 && theta < edge(j, bins)) --j;
    while (j + 1 < bins && theta >= edge(j + 1, bins)) ++j;
    return j;
}

Histogram binned_histogram(const AtomicMeasure& nu, std::size_t bins) {
    if (bins == 0) fail(ErrorCode::invalid_argument, "zero bins");
    std::vector<double> masses(bins, 0.0);
    for (const Atom& a : nu.atoms()) masses[bin_index(a.theta, bins)] += a.weight;
    return Histogram(std::move(masses));
}

Histogram binned_histogram(const ParticleEnsemble& e, std::size_t bins) {
    if (bins == 0) fail(ErrorCode::invalid_argument, "zero bins");
    std::vector<std::size_t> counts(bins, 0);
    for (double t : e.thetas()) ++counts[bin_index(t, bins)];
    std::vector<double> masses(bins);
    const double n = static_cast<double>(e.size());
    for (std::size_t j = 0; j < bins; ++j) {
        masses[j] = static_cast<double>(counts[j]) / n;
    }
    return Histogram(std::move(masses));
}

Histogram mu_histogram(std::size_t bins) {
    if (bins == 0) fail(ErrorCode::invalid_argument, "zero bins");
    std::vector<double> masses(bins);
    for (std::size_t j = 0; j < bins; ++j) {
        masses[j] = mu_cdf(edge(j + 1, bins)) - mu_cdf(edge(j, bins));
    }
    return Histogram(std::move(masses));
}

Distance distance_to_mu(const Histogram& h) {
    Distance d{0.0, 0.0};
    double cumulative = 0.0;
    const auto masses = h.masses();
    for (std::size_t j = 0; j < masses.size(); ++j) {
        const double mu_j = mu_cdf(h.bin_hi(j)) - mu_cdf(h.bin_lo(j));
        d.tv += std::abs(masses[j] - mu_j);
        cumulative += masses[j];
        d.ks = std::max(d.ks, std::abs(cumulative - mu_cdf(h.bin_hi(j))));
    }
    d.tv *= 0.5;
    return d;
}

BinMass uniform_density() {
    return [](double lo, double hi) { return (hi - lo) / pi; };
}

BinMass sine_law_density() {
    return [](double lo, double hi) { return mu_cdf(hi) - mu_cdf(lo); };
}

BinMass piecewise_constant_density(std::vector<DensityPiece> pieces) {
    for (const DensityPiece& p : pieces) {
        if (!(p.lo < p.hi) || p.lo < 0.0 || p.hi > pi || !(p.density >= 0.0)) {
            fail(ErrorCode::invalid_argument,
                 "density piece [" + std::to_string(p.lo) + ", " +
                     std::to_string(p.hi) + ") = " + std::to_string(p.density) +
                     " is malformed");
        }
    }
    return [pieces = std::move(pieces)](double lo, double hi) {
        double m = 0.0;
        for (const DensityPiece& p : pieces) {
            const double overlap = std::min(hi, p.hi) - std::max(lo, p.lo);
            if (overlap > 0.0) m += overlap * p.density;
        }
        return m;
    };
}

BinMass two_bump_density() {
    return piecewise_constant_density({{0.25, 0.85, 1.0}, {1.9, 2.5, 2.0}});
}

AtomicMeasure atomize_density(const BinMass& density,
                              std::size_t atoms_per_bin, std::size_t bins) {
    if (bins == 0 || atoms_per_bin == 0) {
        fail(ErrorCode::invalid_argument, "zero bins or atoms per bin");
    }
    const std::size_t cells = bins * atoms_per_bin;
    std::vector<Atom> atoms;
    atoms.reserve(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        const double lo = edge(c, cells);
        const double hi = edge(c + 1, cells);
        const double m = density(lo, hi);
        if (m < 0.0 || !std::isfinite(m)) {
            fail(ErrorCode::invalid_argument, "density mass is negative");
        }
        if (m > 0.0) atoms.push_back({0.5 * (lo + hi), m});
    }
    if (atoms.empty()) fail(ErrorCode::invalid_argument, "zero total mass");
    return AtomicMeasure::normalized(std::move(atoms));
}

}  // namespace knudsen
