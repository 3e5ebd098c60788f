#include "knudsen/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "knudsen/errors.hpp"
#include "knudsen/measure.hpp"
#include "knudsen/rng.hpp"
#include "parallel.hpp"

namespace knudsen {

namespace {

enum class Edge { left, right, base, none };

struct Hit {
    Edge edge = Edge::none;
    double s = std::numeric_limits<double>::infinity();
};

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::optional<Branch> match_branch(double theta_in, double theta_out,
                                   const MapParams& params) {
    std::optional<Branch> best;
    double best_gap = kBranchMatchTolerance;
    for (Branch k : kBranches) {
        const double gap = std::abs(theta_out - tau(k, theta_in, params));
        if (gap < best_gap) {
            best_gap = gap;
            best = k;
        }
    }
    return best;
}

// Uniform in (0, 1): zero is rejected by the callers' redraw loop.
constexpr std::size_t kMaxRedraws = 64;

}  // namespace

CellGeometry::CellGeometry(double alpha)
    : params_(alpha),
      apex_{0.5, 0.5 * std::tan(alpha)},
      max_bounces_(10 * static_cast<int>(std::ceil(pi / alpha))) {}

Trajectory trace(double x, double theta_in, const CellGeometry& geom) {
    if (!(x > 0.0 && x < 1.0)) {
        fail(ErrorCode::domain, "entry point " + std::to_string(x) +
                                    " not inside the open side");
    }
    if (!(theta_in > 0.0 && theta_in < pi)) {
        fail(ErrorCode::domain, "entry angle " + std::to_string(theta_in) +
                                    " not inside (0, pi)");
    }
    const std::array<Vec2, 3> vertices = {geom.left(), geom.right(),
                                          geom.apex()};
    const Vec2 left_edge = geom.apex() - geom.left();
    const Vec2 right_edge = geom.apex() - geom.right();

    Trajectory out;
    Vec2 pos{x, 0.0};
    Vec2 dir{std::cos(theta_in), std::sin(theta_in)};
    Edge last = Edge::base;

    for (;;) {
        Hit hit;
        auto try_wall = [&](Edge edge, Vec2 origin, Vec2 along) {
            if (edge == last) return;
            const double den = cross(dir, along);
            if (den == 0.0) return;
            const Vec2 rel = origin - pos;
            const double s = cross(rel, along) / den;
            const double t = cross(rel, dir) / den;
            if (s > 0.0 && t >= -kCornerTolerance && t <= 1.0 + kCornerTolerance &&
                s < hit.s) {
                hit = {edge, s};
            }
        };
        try_wall(Edge::left, geom.left(), left_edge);
        try_wall(Edge::right, geom.right(), right_edge);
        if (dir.y < 0.0 && last != Edge::base) {
            const double s = -pos.y / dir.y;
            if (s > 0.0 && s < hit.s) hit = {Edge::base, s};
        }
        if (hit.edge == Edge::none) {
            fail(ErrorCode::invariant, "ray escaped the cell");
        }

        const Vec2 point = pos + hit.s * dir;
        for (const Vec2& v : vertices) {
            if (distance(point, v) < kCornerTolerance) {
                fail(ErrorCode::corner_hit, "trajectory hits a corner");
            }
        }

        if (hit.edge == Edge::base) {
            if (point.x < -kBranchMatchTolerance ||
                point.x > 1.0 + kBranchMatchTolerance) {
                fail(ErrorCode::invariant, "exit point off the open side");
            }
            const double theta_out = std::atan2(-dir.y, dir.x);
            out.exit = {std::clamp(point.x, 0.0, 1.0), theta_out,
                        static_cast<int>(out.bounces.size()),
                        match_branch(theta_in, theta_out, geom.params())};
            return out;
        }

        const Vec2 along = hit.edge == Edge::left ? left_edge : right_edge;
        const Vec2 tangent = (1.0 / std::hypot(along.x, along.y)) * along;
        const Vec2 reflected = 2.0 * dot(dir, tangent) * tangent - dir;
        out.bounces.push_back(
            {hit.edge == Edge::left ? Wall::left : Wall::right, point, dir,
             reflected});
        if (static_cast<int>(out.bounces.size()) > geom.max_bounces()) {
            fail(ErrorCode::tracer_stuck,
                 "more than " + std::to_string(geom.max_bounces()) +
                     " bounces");
        }
        pos = point;
        dir = reflected;
        last = hit.edge;
    }
}

ReturnRecord first_return(double x, double theta_in, const CellGeometry& geom) {
    return trace(x, theta_in, geom).exit;
}

BranchFrequencies empirical_kernel(double theta_in, std::size_t samples,
                                   std::uint64_t seed,
                                   const CellGeometry& geom,
                                   unsigned workers) {
    if (samples == 0) fail(ErrorCode::invalid_argument, "zero samples");
    const CounterRng rng(seed);
    const unsigned w = detail::resolve_workers(workers, samples);
    std::vector<BranchFrequencies> partial(w);
    detail::parallel_chunks(
        samples, w, [&](unsigned t, std::size_t begin, std::size_t end) {
            BranchFrequencies& f = partial[t];
            for (std::size_t i = begin; i < end; ++i) {
                for (std::size_t attempt = 0;; ++attempt) {
                    if (attempt == kMaxRedraws) {
                        fail(ErrorCode::invariant, "too many corner redraws");
                    }
                    const double x = rng.uniform(i, attempt);
                    if (x == 0.0) continue;
                    try {
                        const ReturnRecord r = first_return(x, theta_in, geom);
                        if (r.branch_matched) {
                            ++f.counts[index_of(*r.branch_matched) - 1];
                        } else {
                            ++f.unclassified;
                        }
                        break;
                    } catch (const Error& e) {
                        if (e.code() != ErrorCode::corner_hit) throw;
                        ++f.corner_redraws;
                    }
                }
            }
        });
    BranchFrequencies total;
    total.samples = samples;
    for (const BranchFrequencies& f : partial) {
        for (std::size_t k = 0; k < 4; ++k) total.counts[k] += f.counts[k];
        total.unclassified += f.unclassified;
        total.corner_redraws += f.corner_redraws;
    }
    if (static_cast<double>(total.unclassified) >
        kUnclassifiedAllowance * static_cast<double>(samples)) {
        fail(ErrorCode::geometry_mismatch,
             std::to_string(total.unclassified) +
                 " exits match no tau image at theta = " +
                 std::to_string(theta_in));
    }
    return total;
}

std::vector<double> validation_grid(std::size_t n, const MapParams& params) {
    constexpr double clearance = 1e-6;
    const auto edges = breakpoints(params);
    std::vector<double> grid;
    grid.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double theta =
            pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        for (double e : edges) {
            if (std::abs(theta - e) < clearance) theta = e + 2 * clearance;
        }
        grid.push_back(theta);
    }
    return grid;
}

ValidationReport validate_branch_table(std::span<const double> grid,
                                std::size_t samples, std::uint64_t seed,
                                const CellGeometry& geom, unsigned workers) {
    ValidationReport report;
    report.alpha = geom.alpha();
    report.samples = samples;
    report.passed = true;
    const double n = static_cast<double>(samples);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double theta = grid[g];
        // Distinct streams per grid point.
        const BranchFrequencies f =
            empirical_kernel(theta, samples, seed + 0x9E3779B97F4A7C15ull * g,
                             geom, workers);
        ValidationPoint pt{theta, probs(theta, geom.params()), {}, {}, 0.0,
                           0.0, f.unclassified};
        for (Branch k : kBranches) {
            const auto i = static_cast<std::size_t>(index_of(k) - 1);
            const double p = pt.expected[i];
            const double obs = f.frequency(k);
            const double dev = std::abs(obs - p);
            const double var = p * (1.0 - p) / n;
            double z = 0.0;
            if (var > 0.0) {
                z = dev / std::sqrt(var);
            } else if (dev > 0.0) {
                z = std::numeric_limits<double>::infinity();
            }
            pt.observed[i] = obs;
            pt.z[i] = z;
            pt.max_abs_deviation = std::max(pt.max_abs_deviation, dev);
            pt.max_z = std::max(pt.max_z, z);
        }
        report.max_z = std::max(report.max_z, pt.max_z);
        if (!(pt.max_z < ValidationReport::kZThreshold) || pt.unclassified != 0) {
            report.passed = false;
        }
        report.points.push_back(pt);
    }
    return report;
}

InvarianceReport liouville_pushforward_check(std::size_t samples,
                                             std::uint64_t seed,
                                             const CellGeometry& geom,
                                             unsigned workers) {
    constexpr std::size_t bins = 16;
    if (samples == 0) fail(ErrorCode::invalid_argument, "zero samples");
    const CounterRng rng(seed);
    const unsigned w = detail::resolve_workers(workers, samples);
    std::vector<std::vector<std::size_t>> counts(
        w, std::vector<std::size_t>(bins * bins, 0));
    detail::parallel_chunks(
        samples, w, [&](unsigned t, std::size_t begin, std::size_t end) {
            auto& c = counts[t];
            for (std::size_t i = begin; i < end; ++i) {
                for (std::size_t attempt = 0;; ++attempt) {
                    if (attempt == kMaxRedraws) {
                        fail(ErrorCode::invariant, "too many corner redraws");
                    }
                    const auto u = rng.uniform2(i, attempt);
                    const double theta = std::acos(1.0 - 2.0 * u[1]);
                    if (u[0] == 0.0 || theta == 0.0) continue;
                    try {
                        const ReturnRecord r = first_return(u[0], theta, geom);
                        const auto ix = std::min(
                            static_cast<std::size_t>(r.exit_x * bins),
                            bins - 1);
                        ++c[ix * bins + bin_index(r.theta_out, bins)];
                        break;
                    } catch (const Error& e) {
                        if (e.code() != ErrorCode::corner_hit) throw;
                    }
                }
            }
        });
    std::vector<std::size_t> total(bins * bins, 0);
    for (const auto& c : counts) {
        for (std::size_t j = 0; j < c.size(); ++j) total[j] += c[j];
    }
    return summarize_invariance(bins, bins, total, samples);
}

}  // namespace knudsen
