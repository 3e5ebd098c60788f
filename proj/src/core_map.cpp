#include "knudsen/core_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "knudsen/errors.hpp"

namespace knudsen {

namespace {

void check_angle(double theta) {
    if (!(theta >= 0.0 && theta <= pi)) {
        fail(ErrorCode::domain,
             "angle " + std::to_string(theta) + " outside [0, pi]");
    }
}

// Clamps floating noise around the region breakpoints; anything larger means
// the table itself is wrong.
double clamp_probability(double p, Branch k, double theta) {
    if (p < -kRoundoff || p > 1.0 + kRoundoff || std::isnan(p)) {
        fail(ErrorCode::invariant,
             "p" + std::to_string(index_of(k)) + "(" + std::to_string(theta) +
                 ") = " + std::to_string(p) + " outside [0, 1]");
    }
    return std::clamp(p, 0.0, 1.0);
}

double raw_prob(Branch k, double theta, const MapParams& params) {
    const double a = params.alpha();
    const double c = 2.0 * params.cos_2alpha();
    auto u1 = [&](double t) { return u_alpha(t, UScale::alpha, params); };
    auto u2 = [&](double t) { return u_alpha(t, UScale::two_alpha, params); };

    switch (k) {
        case Branch::one:
            if (theta < a) return 1.0;
            if (theta < pi - 3 * a) return u1(theta);
            if (theta < pi - 2 * a) return c * u2(theta);
            return 0.0;
        case Branch::two:
            if (theta < pi - 3 * a) return 0.0;
            if (theta < pi - 2 * a) return u1(theta) - c * u2(theta);
            if (theta < pi - a) return u1(theta);
            return 0.0;
        case Branch::three:
            if (theta < 2 * a) return 0.0;
            if (theta < 3 * a) return c * u2(-theta);
            if (theta < pi - a) return u1(-theta);
            return 1.0;
        case Branch::four:
            if (theta < a) return 0.0;
            if (theta < 2 * a) return u1(-theta);
            if (theta < 3 * a) return u1(-theta) - c * u2(-theta);
            return 0.0;
    }
    fail(ErrorCode::invalid_argument, "bad branch");
}

}  // namespace

MapParams::MapParams(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < pi / 6.0)) {
        fail(ErrorCode::invalid_argument,
             "alpha = " + std::to_string(alpha) + " must lie in (0, pi/6)");
    }
    tan_alpha_ = std::tan(alpha);
    tan_2alpha_ = std::tan(2.0 * alpha);
    cos_2alpha_ = std::cos(2.0 * alpha);
}

Branch branch_from_int(int k) {
    if (k < 1 || k > 4) {
        fail(ErrorCode::invalid_argument,
             "branch index " + std::to_string(k) + " not in {1,2,3,4}");
    }
    return static_cast<Branch>(k);
}

AffineMap affine_map(Branch k, const MapParams& params) noexcept {
    const double a = params.alpha();
    switch (k) {
        case Branch::one: return {1, 2 * a};
        case Branch::two: return {-1, 2 * pi - 4 * a};
        case Branch::three: return {1, -2 * a};
        case Branch::four: return {-1, 4 * a};
    }
    return {1, 0.0};
}

double tau(Branch k, double theta, const MapParams& params) {
    check_angle(theta);
    if (index_of(k) < 1 || index_of(k) > 4) {
        fail(ErrorCode::invalid_argument, "bad branch");
    }
    return affine_map(k, params)(theta);
}

double u_alpha(double theta, UScale scale, const MapParams& params) {
    if (theta == 0.0 || std::abs(theta) == pi || std::abs(theta) > pi) {
        fail(ErrorCode::domain,
             "u is undefined at theta = " + std::to_string(theta));
    }
    const double t =
        scale == UScale::alpha ? params.tan_alpha() : params.tan_2alpha();
    return 0.5 * (1.0 + t * std::cos(theta) / std::sin(theta));
}

double prob(Branch k, double theta, const MapParams& params) {
    check_angle(theta);
    return clamp_probability(raw_prob(k, theta, params), k, theta);
}

std::array<double, 4> probs(double theta, const MapParams& params) {
    check_angle(theta);
    std::array<double, 4> out{};
    for (Branch k : kBranches) {
        out[index_of(k) - 1] =
            clamp_probability(raw_prob(k, theta, params), k, theta);
    }
    return out;
}

double live_image(Branch k, double theta, const MapParams& params) {
    const double image = tau(k, theta, params);
    if (image < -kRoundoff || image > pi + kRoundoff) {
        fail(ErrorCode::invariant, "tau" + std::to_string(index_of(k)) + "(" +
                                       std::to_string(theta) +
                                       ") leaves [0, pi]");
    }
    return std::clamp(image, 0.0, pi);
}

KernelRow kernel_row(double theta, const MapParams& params) {
    const auto p = probs(theta, params);
    KernelRow row;
    double total = 0.0;
    for (Branch k : kBranches) {
        const double w = p[index_of(k) - 1];
        total += w;
        if (w == 0.0) continue;
        row.push_back({k, w, live_image(k, theta, params)});
    }
    if (std::abs(total - 1.0) > kRoundoff) {
        fail(ErrorCode::invariant, "probabilities at theta = " +
                                       std::to_string(theta) + " sum to " +
                                       std::to_string(total));
    }
    return row;
}

Slab locate_slab(double theta, double u, const MapParams& params) {
    const auto p = probs(theta, params);
    double cumulative = 0.0;
    Slab last{Branch::one, 0.0, 0.0};
    for (Branch k : kBranches) {
        const double w = p[index_of(k) - 1];
        if (w > 0.0) last = {k, cumulative, w};
        if (u < cumulative + w) {
            if (w > 0.0) return {k, cumulative, w};
        }
        cumulative += w;
    }
    // u landed in the rounding gap between the cumulative sum and 1.
    return last;
}

Slab branch_slab(Branch k, double theta, const MapParams& params) {
    const auto p = probs(theta, params);
    double lower = 0.0;
    for (int i = 0; i < index_of(k) - 1; ++i) lower += p[i];
    return {k, lower, p[index_of(k) - 1]};
}

Branch sample_branch(double theta, double u, const MapParams& params) {
    return locate_slab(theta, u, params).branch;
}

double reflect_sym(double theta) noexcept { return pi - theta; }

Branch conjugate_index(Branch k) noexcept {
    switch (k) {
        case Branch::one: return Branch::three;
        case Branch::two: return Branch::four;
        case Branch::three: return Branch::one;
        case Branch::four: return Branch::two;
    }
    return k;
}

Rotation rotation_beta(const MapParams& params) {
    const double a = params.alpha();
    int k = 1;
    while ((4.0 * k + 6.0) * a <= pi) ++k;
    return {k, (4.0 * k + 6.0) * a - pi};
}

std::array<double, 6> breakpoints(const MapParams& params) {
    const double a = params.alpha();
    return {a, 2 * a, 3 * a, pi - 3 * a, pi - 2 * a, pi - a};
}

std::string_view region_label(double theta, const MapParams& params) {
    check_angle(theta);
    static constexpr std::array<std::string_view, 7> labels = {
        "[0,a)",          "[a,2a)",        "[2a,3a)",  "[3a,pi-3a)",
        "[pi-3a,pi-2a)", "[pi-2a,pi-a)", "[pi-a,pi]"};
    const auto edges = breakpoints(params);
    std::size_t i = 0;
    while (i < edges.size() && theta >= edges[i]) ++i;
    return labels[i];
}

}  // namespace knudsen
