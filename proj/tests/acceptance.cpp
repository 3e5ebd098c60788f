// Acceptance suite: one PASS/FAIL line per criterion, driven through the
// public C interface. Exit status is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "knudsen/knudsen.h"
#include "oracles.hpp"

namespace {

constexpr double pi = std::numbers::pi;
constexpr std::size_t kBins = 45;
constexpr std::uint64_t kSeed = 7;

struct Failure {
    std::string what;
};

void ok(knudsen_status s, const char* call) {
    if (s != KNUDSEN_OK) {
        throw Failure{std::string(call) + ": " + knudsen_status_name(s) + " (" +
                      knudsen_last_error() + ")"};
    }
}

class Timer {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Result {
    bool passed;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

knudsen_map* make_map(double alpha) {
    knudsen_map* m = nullptr;
    ok(knudsen_map_create(alpha, &m), "map_create");
    return m;
}

knudsen_measure* uniform_atoms() {
    knudsen_measure* nu = nullptr;
    ok(knudsen_measure_stock(KNUDSEN_DENSITY_UNIFORM, 1, kBins, &nu), "measure_stock");
    return nu;
}

std::vector<double> histogram(const knudsen_measure* m) {
    std::vector<double> h(kBins);
    ok(knudsen_measure_histogram(m, kBins, h.data()), "measure_histogram");
    return h;
}

std::pair<double, double> distance(const std::vector<double>& h) {
    double tv = 0, ks = 0;
    ok(knudsen_distance_to_mu(h.data(), h.size(), &tv, &ks), "distance_to_mu");
    return {tv, ks};
}

Result ensemble_reproduction() {
    Timer timer;
    knudsen_map* map = make_map(0.5);
    knudsen_measure* nu = uniform_atoms();
    knudsen_ensemble* e = nullptr;
    ok(knudsen_ensemble_from_measure(nu, 30000, kSeed, &e), "ensemble_from_measure");
    for (int s = 0; s < 200; ++s) ok(knudsen_ensemble_step(map, e, 0), "ensemble_step");
    std::vector<double> h(kBins), mu(kBins);
    ok(knudsen_ensemble_histogram(e, kBins, h.data()), "ensemble_histogram");
    ok(knudsen_mu_histogram(kBins, mu.data()), "mu_histogram");
    const double secs = timer.seconds();
    knudsen_ensemble_destroy(e);
    knudsen_measure_destroy(nu);
    knudsen_map_destroy(map);

    const auto [tv, ks] = distance(h);
    double worst = 0;
    std::size_t worst_bin = 0;
    for (std::size_t j = 0; j < kBins; ++j) {
        if (std::abs(h[j] - mu[j]) > worst) {
            worst = std::abs(h[j] - mu[j]);
            worst_bin = j;
        }
    }
    return {ks < 0.02 && worst < 0.005 && secs < 10.0,
            "ks=" + fmt("%.5f", ks) + " (<0.02) max_bin_dev=" + fmt("%.5f", worst) +
                " at bin " + std::to_string(worst_bin) + " (<0.005) tv=" + fmt("%.5f", tv) +
                " time=" + fmt("%.2f", secs) + "s (<10s)"};
}

Result strong_law() {
    Timer timer;
    knudsen_map* map = make_map(0.5);
    knudsen_measure* nu = uniform_atoms();
    ok(knudsen_measure_evolve(map, nu, 10, 0), "measure_evolve");
    const double tv10 = distance(histogram(nu)).first;
    ok(knudsen_measure_evolve(map, nu, 190, 0), "measure_evolve");
    const double tv200 = distance(histogram(nu)).first;
    const double secs = timer.seconds();
    knudsen_measure_destroy(nu);
    knudsen_map_destroy(map);
    return {tv200 < 0.02 && tv200 < tv10 && secs < 5.0,
            "tv200=" + fmt("%.5f", tv200) + " (<0.02) tv10=" + fmt("%.5f", tv10) +
                " time=" + fmt("%.2f", secs) + "s (<5s)"};
}

Result weak_law() {
    knudsen_map* map = make_map(0.5);
    knudsen_measure* cur = nullptr;
    ok(knudsen_measure_dirac(0.2, &cur), "measure_dirac");
    std::vector<knudsen_measure*> steps;
    double ks10 = 0;
    for (int n = 1; n <= 200; ++n) {
        knudsen_measure* next = nullptr;
        ok(knudsen_measure_clone(cur, &next), "measure_clone");
        ok(knudsen_measure_evolve(map, next, 1, 0), "measure_evolve");
        steps.push_back(next);
        cur = next;
        if (n == 10) ks10 = distance(histogram(next)).second;
    }
    const double ks200 = distance(histogram(steps.back())).second;
    std::vector<const knudsen_measure*> view(steps.begin(), steps.end());
    knudsen_measure* avg = nullptr;
    ok(knudsen_measure_cesaro(view.data(), view.size(), &avg), "measure_cesaro");
    const double ks_avg = distance(histogram(avg)).second;
    knudsen_measure_destroy(avg);
    for (auto* m : steps) knudsen_measure_destroy(m);
    knudsen_map_destroy(map);
    return {ks_avg < ks10, "ks_cesaro=" + fmt("%.5f", ks_avg) + " ks10=" + fmt("%.5f", ks10) +
                               " ks200=" + fmt("%.5f", ks200)};
}

Result ray_tracing_oracle() {
    Timer timer;
    bool all = true;
    std::string detail;
    for (double alpha : {0.3, 0.5}) {
        knudsen_cell* cell = nullptr;
        ok(knudsen_cell_create(alpha, &cell), "cell_create");
        std::vector<double> grid(50);
        ok(knudsen_validation_grid(cell, grid.size(), grid.data()), "validation_grid");
        knudsen_validation* v = nullptr;
        ok(knudsen_validate(cell, grid.data(), grid.size(), 100000, kSeed, 0, &v), "validate");
        int passed = 0;
        double max_z = 0;
        std::size_t points = 0;
        ok(knudsen_validation_summary(v, &passed, &max_z, &points), "validation_summary");
        std::size_t unclassified = 0;
        for (std::size_t i = 0; i < points; ++i) {
            knudsen_validation_point p{};
            ok(knudsen_validation_point_at(v, i, &p), "validation_point_at");
            unclassified += p.unclassified;
        }
        knudsen_validation_destroy(v);
        knudsen_cell_destroy(cell);
        all = all && passed && max_z < 4.0 && unclassified == 0;
        detail += "alpha=" + fmt("%.1f", alpha) + ": max_z=" + fmt("%.3f", max_z) +
                  " unclassified=" + std::to_string(unclassified) + "; ";
    }
    const double secs = timer.seconds();
    return {all && secs < 60.0, detail + "time=" + fmt("%.2f", secs) + "s (<60s)"};
}

Result fiber_product() {
    knudsen_map* map = make_map(0.5);
    double worst = 0;
    std::size_t words = 0;
    std::vector<int> word;
    for (std::size_t n = 1; n <= 6; ++n) {
        std::size_t count = 1;
        for (std::size_t i = 0; i < n; ++i) count *= 4;
        for (std::size_t code = 0; code < count; ++code, ++words) {
            word.assign(n, 1);
            std::size_t c = code;
            for (std::size_t i = 0; i < n; ++i, c /= 4) word[i] = int(c % 4) + 1;
            for (int i = 0; i < 100; ++i) {
                const double x = pi * (i + 0.5) / 100;
                double lo = 0, hi = 0, product = 0;
                ok(knudsen_cylinder_fiber(map, x, word.data(), n, &lo, &hi), "cylinder_fiber");
                ok(knudsen_fiber_measure(map, x, word.data(), n, &product), "fiber_measure");
                worst = std::max(worst, std::abs(std::max(hi - lo, 0.0) - product));
            }
        }
    }
    knudsen_map_destroy(map);
    return {worst < 1e-12, "words=" + std::to_string(words) + " points=100 max_diff=" +
                               fmt("%.3g", worst) + " (<1e-12)"};
}

Result skew_consistency() {
    knudsen_map* map = make_map(0.5);
    knudsen_measure* nu = uniform_atoms();
    double worst_ratio = 0;
    std::size_t failures = 0, checks = 0;
    for (int n = 1; n <= 8; ++n) {
        for (int j = 0; j < 16; ++j) {
            knudsen_skew_consistency c{};
            const double lo = pi * j / 16, hi = pi * (j + 1) / 16;
            ok(knudsen_skew_consistency_check(map, nu, lo, hi, n, 100000, kSeed, &c), "skew_consistency_check");
            const double diff = std::abs(c.exact - c.estimate);
            const bool pass = diff < 4 * c.standard_error || (diff == 0.0);
            if (c.standard_error > 0) worst_ratio = std::max(worst_ratio, diff / c.standard_error);
            failures += pass ? 0 : 1;
            ++checks;
        }
    }
    knudsen_measure_destroy(nu);
    knudsen_map_destroy(map);
    return {failures == 0, "checks=" + std::to_string(checks) + " failures=" +
                               std::to_string(failures) + " max|diff|/stderr=" +
                               fmt("%.3f", worst_ratio) + " (<4)"};
}

Result invariance_suite() {
    std::string detail;
    bool all = true;

    // partition of unity
    double worst_sum = 0;
    for (int i = 1; i <= 10; ++i) {
        const double alpha = pi / 6 * i / 11;
        knudsen_map* map = make_map(alpha);
        for (int t = 0; t <= 10000; ++t) {
            const double theta = pi * t / 10000;
            double s = 0;
            for (int k = 1; k <= 4; ++k) {
                double p = 0;
                ok(knudsen_prob(map, k, theta, &p), "prob");
                s += p;
            }
            worst_sum = std::max(worst_sum, std::abs(s - 1));
        }
        knudsen_map_destroy(map);
    }
    all = all && worst_sum < 1e-12;
    detail += "unity=" + fmt("%.2g", worst_sum) + " ";

    // sine law invariance of the kernel
    double worst_mu = 0;
    for (double alpha : {0.3, 0.5}) {
        knudsen_map* map = make_map(alpha);
        auto probs = [&](double t) {
            std::array<double, 4> p{};
            for (int k = 1; k <= 4; ++k) ok(knudsen_prob(map, k, t, &p[k - 1]), "prob");
            return p;
        };
        for (int j = 0; j < 64; ++j) {
            const double lo = pi * j / 64, hi = pi * (j + 1) / 64;
            const double pushed = oracle::kernel_mass_under_sine_law(lo, hi, alpha, probs);
            worst_mu = std::max(worst_mu, std::abs(pushed - 0.5 * (std::cos(lo) - std::cos(hi))));
        }
        knudsen_map_destroy(map);
    }
    all = all && worst_mu < 1e-8;
    detail += "mu_kernel=" + fmt("%.2g", worst_mu) + " ";

    // product measure preserved by the skew map and the first-return map
    knudsen_invariance_summary s{};
    knudsen_map* map = make_map(0.5);
    knudsen_invariance* inv = nullptr;
    ok(knudsen_skew_invariance_check(map, 1000000, kSeed, 32, 0, &inv), "skew_invariance_check");
    ok(knudsen_invariance_summary_get(inv, &s), "invariance_summary_get");
    knudsen_invariance_destroy(inv);
    all = all && s.passed;
    detail += "S:max_z=" + fmt("%.2f", s.max_z) + " failed=" + std::to_string(s.failed_bins) + " ";

    knudsen_cell* cell = nullptr;
    ok(knudsen_cell_create(0.5, &cell), "cell_create");
    ok(knudsen_liouville_check(cell, 1000000, kSeed, 0, &inv), "liouville_check");
    ok(knudsen_invariance_summary_get(inv, &s), "invariance_summary_get");
    knudsen_invariance_destroy(inv);
    knudsen_cell_destroy(cell);
    all = all && s.passed;
    detail += "T:max_z=" + fmt("%.2f", s.max_z) + " failed=" + std::to_string(s.failed_bins) + " ";

    // symmetry, conjugation and involutions
    double worst_sym = 0;
    auto tau = [&](int k, double t, double& out) {
        return knudsen_tau(map, k, t, &out) == KNUDSEN_OK;
    };
    auto breakpoint_near = [](double t) {
        for (double b : {0.5, 1.0, 1.5, pi - 1.5, pi - 1.0, pi - 0.5}) {
            if (std::abs(t - b) < 1e-9) return true;
        }
        return false;
    };
    for (int i = 0; i <= 10000; ++i) {
        const double t = pi * i / 10000;
        const double r = knudsen_reflect_sym(t);
        for (int k = 1; k <= 4; ++k) {
            int kc = 0;
            ok(knudsen_conjugate_index(k, &kc), "conjugate_index");
            double a = 0, b = 0;
            ok(knudsen_tau(map, k, r, &a), "tau");
            ok(knudsen_tau(map, kc, t, &b), "tau");
            worst_sym = std::max(worst_sym, std::abs(knudsen_reflect_sym(a) - b));
            if (!breakpoint_near(t) && !breakpoint_near(r)) {
                double pr = 0, pc = 0;
                ok(knudsen_prob(map, k, r, &pr), "prob");
                ok(knudsen_prob(map, kc, t, &pc), "prob");
                worst_sym = std::max(worst_sym, std::abs(pr - pc));
            }
        }
        for (auto [first, second] : {std::pair{2, 2}, {4, 4}, {1, 3}, {3, 1}}) {
            double a = 0, b = 0;
            if (tau(first, t, a) && a >= 0 && a <= pi && tau(second, a, b)) {
                worst_sym = std::max(worst_sym, std::abs(b - t));
            }
        }
    }
    knudsen_map_destroy(map);
    all = all && worst_sym < 1e-12;
    detail += "symmetry=" + fmt("%.2g", worst_sym);
    return {all, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Result()>>> criteria = {
        {"1 ensemble reproduction (30000 particles, 200 steps)", ensemble_reproduction},
        {"2 strong law, exact evolution", strong_law},
        {"3 weak law, Cesaro average from a single atom", weak_law},
        {"4 ray-tracing oracle vs branch probabilities", ray_tracing_oracle},
        {"5 cylinder fiber length vs product formula", fiber_product},
        {"6 skew map vs exact evolution", skew_consistency},
        {"7 invariance suite", invariance_suite},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Result r;
        try {
            r = run();
        } catch (const Failure& f) {
            r = {false, "error: " + f.what};
        }
        std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", name, r.detail.c_str());
        std::fflush(stdout);
        failed += r.passed ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed;
}
