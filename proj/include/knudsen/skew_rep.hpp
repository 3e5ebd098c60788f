#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "knudsen/core_map.hpp"
#include "knudsen/invariance.hpp"
#include "knudsen/measure.hpp"

namespace knudsen {

/// State (y, x) of the skew map: y in [0, 1) picks the branch, x is the angle.
struct SkewPoint {
    double y;
    double x;
};

/// Branch sequence (i_1, ..., i_n). Stored in written order: i_n is the branch
/// taken first and i_1 the branch taken last.
class CylinderWord {
  public:
    explicit CylinderWord(std::vector<Branch> indices);

    /// Throws ErrorCode::invalid_argument on an empty word or an entry
    /// outside 1..4.
    static CylinderWord from_ints(std::span<const int> indices);

    std::span<const Branch> indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }

  private:
    std::vector<Branch> indices_;
};

/// Projection of a cylinder set onto the y axis at a fixed angle; empty when
/// hi <= lo.
struct FiberInterval {
    double lo;
    double hi;

    bool empty() const noexcept { return !(hi > lo); }
    double length() const noexcept { return empty() ? 0.0 : hi - lo; }
};

Branch locate_branch(const SkewPoint& p, const MapParams& params);

SkewPoint skew_step(const SkewPoint& p, const MapParams& params);

/// y-section at x of the set of points whose first n skew iterates visit the
/// slabs i_n, i_{n-1}, ..., i_1 in turn, built by pulling the shorter word's
/// fiber back through the affine y update.
FiberInterval cylinder_fiber(double x, const CylinderWord& w,
                             const MapParams& params);

/// Product of branch probabilities along the orbit of x driven by w.
double fiber_measure(double x, const CylinderWord& w, const MapParams& params);

struct SkewConsistency {
    double exact;
    double estimate;
    double standard_error;
};

/// Compares nu^(steps)(a) from exact kernel iteration with a Monte Carlo
/// estimate of P(x_steps in a) under the skew map started from
/// y ~ U[0,1), x ~ nu. Deterministic in (seed, samples).
SkewConsistency skew_consistency_check(const AtomicMeasure& nu, const Interval& a,
                               int steps, std::size_t samples,
                               std::uint64_t seed, const MapParams& params,
                               unsigned workers = 0);

/// Pushes `samples` draws of uniform(y) x sine-law(x) through one skew step
/// and bins the images on a bins x bins grid.
InvarianceReport skew_pushforward_check(std::size_t samples,
                                        std::uint64_t seed,
                                        const MapParams& params,
                                        std::size_t bins = 32,
                                        unsigned workers = 0);

}  // namespace knudsen
