#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "knudsen/core_map.hpp"
#include "knudsen/invariance.hpp"

namespace knudsen {

struct Vec2 {
    double x;
    double y;
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }

/// Isosceles triangle with the open side from (0,0) to (1,0) and the apex at
/// (1/2, tan(alpha)/2), so both base angles equal alpha.
class CellGeometry {
  public:
    explicit CellGeometry(double alpha);

    double alpha() const noexcept { return params_.alpha(); }
    const MapParams& params() const noexcept { return params_; }

    Vec2 left() const noexcept { return {0.0, 0.0}; }
    Vec2 right() const noexcept { return {1.0, 0.0}; }
    Vec2 apex() const noexcept { return apex_; }

    /// 10 * ceil(pi / alpha).
    int max_bounces() const noexcept { return max_bounces_; }

  private:
    MapParams params_;
    Vec2 apex_;
    int max_bounces_;
};

enum class Wall { left, right };

struct Bounce {
    Wall wall;
    Vec2 point;
    Vec2 incoming;
    Vec2 outgoing;
};

struct ReturnRecord {
    double exit_x;
    double theta_out;
    int bounce_count;
    /// Branch k with |theta_out - tau_k(theta_in)| < 1e-9, if any.
    std::optional<Branch> branch_matched;
};

struct Trajectory {
    std::vector<Bounce> bounces;
    ReturnRecord exit;
};

/// Vertex proximity that counts as a corner hit.
inline constexpr double kCornerTolerance = 1e-12;
/// Exit angles must equal a tau image to this precision to be classified.
inline constexpr double kBranchMatchTolerance = 1e-9;

/// Full elastic path of a particle entering at (x, 0) with direction
/// (cos theta_in, sin theta_in). The exit angle is read from the exit
/// velocity with its vertical component flipped, so it can be fed straight
/// back in as the next entry angle.
///
/// Throws ErrorCode::corner_hit when the path passes within kCornerTolerance
/// of a vertex and ErrorCode::tracer_stuck past max_bounces().
Trajectory trace(double x, double theta_in, const CellGeometry& geom);

ReturnRecord first_return(double x, double theta_in, const CellGeometry& geom);

struct BranchFrequencies {
    std::array<std::size_t, 4> counts{};
    std::size_t unclassified = 0;
    std::size_t corner_redraws = 0;
    std::size_t samples = 0;

    double frequency(Branch k) const noexcept {
        return static_cast<double>(counts[index_of(k) - 1]) /
               static_cast<double>(samples);
    }
};

/// Largest tolerated fraction of exits matching no tau image.
inline constexpr double kUnclassifiedAllowance = 1e-6;

/// Branch frequencies over `samples` uniform entry points. Corner hits are
/// redrawn. Throws ErrorCode::geometry_mismatch when the unclassified
/// fraction exceeds kUnclassifiedAllowance.
BranchFrequencies empirical_kernel(double theta_in, std::size_t samples,
                                   std::uint64_t seed,
                                   const CellGeometry& geom,
                                   unsigned workers = 0);

struct ValidationPoint {
    double theta;
    std::array<double, 4> expected;
    std::array<double, 4> observed;
    std::array<double, 4> z;
    double max_abs_deviation;
    double max_z;
    std::size_t unclassified;
};

struct ValidationReport {
    double alpha;
    std::size_t samples;
    std::vector<ValidationPoint> points;
    double max_z = 0.0;
    bool passed = false;

    static constexpr double kZThreshold = 4.0;
};

/// n angles at cell midpoints of [0, pi], nudged at least 1e-6 away from the
/// probability-table breakpoints.
std::vector<double> validation_grid(std::size_t n, const MapParams& params);

/// Compares empirical_kernel frequencies with the tabulated probabilities at
/// each grid angle. Passes when every z-score is below 4 and nothing is left
/// unclassified.
ValidationReport validate_branch_table(std::span<const double> grid,
                                std::size_t samples, std::uint64_t seed,
                                const CellGeometry& geom,
                                unsigned workers = 0);

/// Samples (x, theta) from uniform x sine law, applies the first-return map
/// and bins (exit_x, theta_out) on a 16 x 16 grid.
InvarianceReport liouville_pushforward_check(std::size_t samples,
                                             std::uint64_t seed,
                                             const CellGeometry& geom,
                                             unsigned workers = 0);

}  // namespace knudsen
