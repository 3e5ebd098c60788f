#pragma once

#include <cstddef>
#include <vector>

namespace knudsen {

/// Binned comparison of a pushed-forward sample against the product of the
/// uniform law on the first coordinate and the sine law on the angle.
struct InvarianceReport {
    std::size_t first_bins = 0;
    std::size_t angle_bins = 0;
    std::size_t samples = 0;
    /// Row-major, first coordinate outer.
    std::vector<double> observed;
    std::vector<double> expected;
    std::vector<double> z;
    double max_z = 0.0;
    std::size_t failed_bins = 0;
    bool passed = false;

    static constexpr double kZThreshold = 4.0;
};

/// Fills expected/z/max_z/failed_bins/passed from raw counts.
InvarianceReport summarize_invariance(std::size_t first_bins,
                                      std::size_t angle_bins,
                                      const std::vector<std::size_t>& counts,
                                      std::size_t samples);

}  // namespace knudsen
