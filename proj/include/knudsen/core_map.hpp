#pragma once

#include <array>
#include <numbers>
#include <string_view>
#include <vector>

namespace knudsen {

inline constexpr double pi = std::numbers::pi;

/// Absolute slack allowed on probabilities and images near region breakpoints.
inline constexpr double kRoundoff = 1e-12;

/// Shape parameter of the serrated wall: the base angle of the isosceles cell.
///
/// Construction rejects anything outside (0, pi/6); the exit-angle maps and
/// their probabilities are only valid there. Immutable once built.
class MapParams {
  public:
    explicit MapParams(double alpha);

    double alpha() const noexcept { return alpha_; }
    double tan_alpha() const noexcept { return tan_alpha_; }
    double tan_2alpha() const noexcept { return tan_2alpha_; }
    double cos_2alpha() const noexcept { return cos_2alpha_; }

  private:
    double alpha_;
    double tan_alpha_;
    double tan_2alpha_;
    double cos_2alpha_;
};

/// One of the four exit-angle maps.
enum class Branch : int { one = 1, two = 2, three = 3, four = 4 };

inline constexpr std::array<Branch, 4> kBranches = {Branch::one, Branch::two,
                                                    Branch::three, Branch::four};

constexpr int index_of(Branch k) noexcept { return static_cast<int>(k); }

/// Throws ErrorCode::invalid_argument unless 1 <= k <= 4.
Branch branch_from_int(int k);

/// Which tangent enters u: tan(alpha) or tan(2 alpha).
enum class UScale { alpha, two_alpha };

/// theta -> slope * theta + offset with slope = +-1.
struct AffineMap {
    int slope;
    double offset;

    constexpr double operator()(double theta) const noexcept {
        return slope * theta + offset;
    }
    /// (*this) after inner.
    constexpr AffineMap after(const AffineMap& inner) const noexcept {
        return {slope * inner.slope, slope * inner.offset + offset};
    }
};

/// Coefficients of tau_k, usable off [0, pi].
AffineMap affine_map(Branch k, const MapParams& params) noexcept;

/// The affine exit map tau_k. The image may leave [0, pi] where p_k vanishes.
double tau(Branch k, double theta, const MapParams& params);

/// 1/2 (1 + tan(a) cot(theta)), with a = alpha or 2 alpha.
///
/// Accepts negative arguments so that u(-theta) can be written directly.
/// Throws ErrorCode::domain when sin(theta) == 0.
double u_alpha(double theta, UScale scale, const MapParams& params);

/// Piecewise probability p_k(theta). Intervals are half-open [a, b) exactly as
/// tabulated; the last piece is closed at pi.
double prob(Branch k, double theta, const MapParams& params);

/// All four probabilities at once; cheaper than four prob() calls.
std::array<double, 4> probs(double theta, const MapParams& params);

struct KernelEntry {
    Branch branch;
    double weight;
    double image;
};

/// Non-zero rows of the transition kernel at theta, in branch order.
using KernelRow = std::vector<KernelEntry>;

KernelRow kernel_row(double theta, const MapParams& params);

/// The slab [lower, lower + width) of [0, 1) owned by one branch at theta.
struct Slab {
    Branch branch;
    double lower;
    double width;
};

/// Slab containing u: cumulative(k-1) <= u < cumulative(k). Zero-width
/// slabs are never returned.
Slab locate_slab(double theta, double u, const MapParams& params);

/// Slab of a given branch; width 0 when p_k(theta) == 0.
Slab branch_slab(Branch k, double theta, const MapParams& params);

/// Branch of locate_slab(); kernel sampling and the skew map's slab
/// membership both go through here.
Branch sample_branch(double theta, double u, const MapParams& params);

/// tau_k(theta) for a branch with p_k(theta) > 0, with the roundoff-sized
/// excursions outside [0, pi] folded back in.
double live_image(Branch k, double theta, const MapParams& params);

/// theta -> pi - theta.
double reflect_sym(double theta) noexcept;

/// 1 <-> 3, 2 <-> 4.
Branch conjugate_index(Branch k) noexcept;

struct Rotation {
    int k;
    double beta;
};

/// Smallest k >= 1 with (4k+6) alpha > pi, and beta = (4k+6) alpha - pi.
/// For alpha not of the form pi/(4m+6) this k also satisfies
/// pi > (4(k-1)+6) alpha.
Rotation rotation_beta(const MapParams& params);

/// Breakpoints of the probability table in increasing order:
/// alpha, 2a, 3a, pi-3a, pi-2a, pi-a.
std::array<double, 6> breakpoints(const MapParams& params);

/// Label of the probability-table region containing theta, e.g. "[3a,pi-3a)".
std::string_view region_label(double theta, const MapParams& params);

}  // namespace knudsen
