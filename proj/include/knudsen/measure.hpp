#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "knudsen/core_map.hpp"

namespace knudsen {

struct Atom {
    double theta;
    double weight;
};

/// Half-open angular interval [lo, hi); an upper end at or beyond pi also
/// takes the point pi itself.
struct Interval {
    double lo;
    double hi;

    bool contains(double theta) const noexcept {
        return theta >= lo && (theta < hi || (hi >= pi && theta == pi));
    }
    bool empty() const noexcept { return !(hi > lo); }
};

/// Finitely supported probability measure on [0, pi].
///
/// Atoms are kept sorted by angle; atoms closer than kMergeTolerance are
/// merged. Weights are strictly positive and sum to one.
class AtomicMeasure {
  public:
    static constexpr double kMergeTolerance = 1e-12;
    static constexpr double kMassTolerance = 1e-9;

    /// Takes atoms whose weights already sum to one (within kMassTolerance)
    /// and removes the residual drift.
    explicit AtomicMeasure(std::vector<Atom> atoms);

    /// Rescales arbitrary non-negative weights to unit mass.
    static AtomicMeasure normalized(std::vector<Atom> atoms);

    static AtomicMeasure dirac(double theta);

    std::span<const Atom> atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }

    double mass(const Interval& a) const;

  private:
    struct Trusted {};
    AtomicMeasure(std::vector<Atom> atoms, Trusted);

    friend AtomicMeasure kernel_step(const AtomicMeasure&, const MapParams&);
    friend AtomicMeasure cesaro(std::span<const AtomicMeasure>);

    std::vector<Atom> atoms_;
};

/// Cumulative distribution of the sine law: (1 - cos theta) / 2.
double mu_cdf(double theta);

/// Exact push-forward of nu through the transition kernel.
AtomicMeasure kernel_step(const AtomicMeasure& nu, const MapParams& params);

inline constexpr std::size_t kDefaultAtomCap = 10'000'000;

/// Calls visit(step, measure) for step = 0..steps without retaining history.
/// Throws ErrorCode::atom_cap before a step whose worst-case support would
/// exceed atom_cap.
void for_each_step(const AtomicMeasure& nu, int steps, const MapParams& params,
                   const std::function<void(int, const AtomicMeasure&)>& visit,
                   std::size_t atom_cap = kDefaultAtomCap);

/// [nu^(0), ..., nu^(steps)].
std::vector<AtomicMeasure> evolve(const AtomicMeasure& nu, int steps,
                                  const MapParams& params,
                                  std::size_t atom_cap = kDefaultAtomCap);

/// Uniform mixture of the inputs.
AtomicMeasure cesaro(std::span<const AtomicMeasure> nus);

/// Finite particle cloud advanced by sampling one branch per particle.
///
/// The uniform that drives particle i at step s is a pure function of
/// (seed, i, s), so trajectories do not depend on the worker count.
class ParticleEnsemble {
  public:
    ParticleEnsemble(std::vector<double> thetas, std::uint64_t seed);

    /// Places `particles` particles on the atoms of nu in proportion to their
    /// weights (largest-remainder rounding).
    static ParticleEnsemble from_measure(const AtomicMeasure& nu,
                                        std::size_t particles,
                                        std::uint64_t seed);

    std::span<const double> thetas() const noexcept { return thetas_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t step_count() const noexcept { return step_count_; }
    std::size_t size() const noexcept { return thetas_.size(); }

    /// Advances every particle one step; workers == 0 picks the hardware
    /// concurrency.
    void step(const MapParams& params, unsigned workers = 0);

  private:
    std::vector<double> thetas_;
    std::uint64_t seed_;
    std::uint64_t step_count_ = 0;
};

ParticleEnsemble ensemble_step(const ParticleEnsemble& e,
                               const MapParams& params, unsigned workers = 0);

/// Equal-width bins [j pi/n, (j+1) pi/n); the last bin also holds pi.
class Histogram {
  public:
    Histogram(std::vector<double> masses);

    std::size_t bin_count() const noexcept { return masses_.size(); }
    std::span<const double> masses() const noexcept { return masses_; }
    double bin_lo(std::size_t j) const noexcept;
    double bin_hi(std::size_t j) const noexcept;

  private:
    std::vector<double> masses_;
};

/// Bin of theta among `bins` equal-width bins; an angle on an interior edge
/// goes to the bin on its right.
std::size_t bin_index(double theta, std::size_t bins);

Histogram binned_histogram(const AtomicMeasure& nu, std::size_t bins);
Histogram binned_histogram(const ParticleEnsemble& e, std::size_t bins);

/// Exact sine-law bin masses.
Histogram mu_histogram(std::size_t bins);

struct Distance {
    double tv;
    double ks;
};

/// Total variation and Kolmogorov-Smirnov distance of h to the binned sine law.
Distance distance_to_mu(const Histogram& h);

/// Mass a density assigns to [lo, hi).
using BinMass = std::function<double(double lo, double hi)>;

struct DensityPiece {
    double lo;
    double hi;
    double density;
};

BinMass uniform_density();
BinMass sine_law_density();
BinMass piecewise_constant_density(std::vector<DensityPiece> pieces);

/// Two separated plateaus; the stock non-symmetric starting distribution.
BinMass two_bump_density();

/// One atom at the midpoint of every sub-cell (bins * atoms_per_bin equal
/// cells), weighted by the density's mass on that cell, then normalised.
AtomicMeasure atomize_density(const BinMass& density,
                              std::size_t atoms_per_bin, std::size_t bins);

}  // namespace knudsen
