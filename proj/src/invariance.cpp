#include "knudsen/invariance.hpp"

#include <algorithm>
#include <cmath>

#include "knudsen/errors.hpp"
#include "knudsen/measure.hpp"

namespace knudsen {

InvarianceReport summarize_invariance(std::size_t first_bins,
                                      std::size_t angle_bins,
                                      const std::vector<std::size_t>& counts,
                                      std::size_t samples) {
    if (counts.size() != first_bins * angle_bins || samples == 0) {
        fail(ErrorCode::invalid_argument, "histogram shape mismatch");
    }
    InvarianceReport r;
    r.first_bins = first_bins;
    r.angle_bins = angle_bins;
    r.samples = samples;
    const Histogram mu = mu_histogram(angle_bins);
    const double n = static_cast<double>(samples);
    const double cell = 1.0 / static_cast<double>(first_bins);
    for (std::size_t i = 0; i < first_bins; ++i) {
        for (std::size_t j = 0; j < angle_bins; ++j) {
            const double m = cell * mu.masses()[j];
            const double f =
                static_cast<double>(counts[i * angle_bins + j]) / n;
            const double sigma = std::sqrt(m * (1.0 - m) / n);
            const double z = std::abs(f - m) / sigma;
            r.observed.push_back(f);
            r.expected.push_back(m);
            r.z.push_back(z);
            r.max_z = std::max(r.max_z, z);
            if (!(z < InvarianceReport::kZThreshold)) ++r.failed_bins;
        }
    }
    r.passed = r.failed_bins == 0;
    return r;
}

}  // namespace knudsen
