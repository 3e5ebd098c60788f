#include "knudsen/knudsen.h"

#include <algorithm>
#include <exception>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "knudsen/billiard.hpp"
#include "knudsen/core_map.hpp"
#include "knudsen/errors.hpp"
#include "knudsen/invariance.hpp"
#include "knudsen/measure.hpp"
#include "knudsen/skew_rep.hpp"

struct knudsen_map {
    knudsen::MapParams params;
};

struct knudsen_measure {
    knudsen::AtomicMeasure measure;
};

struct knudsen_ensemble {
    knudsen::ParticleEnsemble ensemble;
};

struct knudsen_cell {
    knudsen::CellGeometry geom;
};

struct knudsen_validation {
    knudsen::ValidationReport report;
};

struct knudsen_invariance {
    knudsen::InvarianceReport report;
};

namespace {

thread_local std::string last_error;

knudsen_status to_status(knudsen::ErrorCode code) {
    using knudsen::ErrorCode;
    switch (code) {
        case ErrorCode::invalid_argument: return KNUDSEN_ERR_INVALID_ARGUMENT;
        case ErrorCode::domain: return KNUDSEN_ERR_DOMAIN;
        case ErrorCode::atom_cap: return KNUDSEN_ERR_ATOM_CAP;
        case ErrorCode::corner_hit: return KNUDSEN_ERR_CORNER_HIT;
        case ErrorCode::tracer_stuck: return KNUDSEN_ERR_TRACER_STUCK;
        case ErrorCode::invariant: return KNUDSEN_ERR_INVARIANT;
        case ErrorCode::geometry_mismatch: return KNUDSEN_ERR_GEOMETRY_MISMATCH;
    }
    return KNUDSEN_ERR_INTERNAL;
}

knudsen_status set_error(knudsen_status s, std::string msg) {
    last_error = std::move(msg);
    return s;
}

template <class Fn>
knudsen_status guarded(Fn&& fn) {
    try {
        fn();
        return KNUDSEN_OK;
    } catch (const knudsen::Error& e) {
        return set_error(to_status(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(KNUDSEN_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(KNUDSEN_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(KNUDSEN_ERR_INTERNAL, "unknown exception");
    }
}

template <class... Ptrs>
bool any_null(const Ptrs*... ptrs) {
    return ((ptrs == nullptr) || ...);
}

knudsen_status null_error() {
    return set_error(KNUDSEN_ERR_NULL, "null pointer argument");
}

knudsen::CylinderWord make_word(const int* word, size_t n) {
    return knudsen::CylinderWord::from_ints(std::span<const int>(word, n));
}

void copy_masses(const knudsen::Histogram& h, double* masses) {
    std::copy(h.masses().begin(), h.masses().end(), masses);
}

}  // namespace

extern "C" {

const char* knudsen_last_error(void) { return last_error.c_str(); }

const char* knudsen_status_name(knudsen_status status) {
    switch (status) {
        case KNUDSEN_OK: return "ok";
        case KNUDSEN_ERR_NULL: return "null pointer";
        case KNUDSEN_ERR_INVALID_ARGUMENT: return "invalid argument";
        case KNUDSEN_ERR_DOMAIN: return "domain error";
        case KNUDSEN_ERR_ATOM_CAP: return "atom cap exceeded";
        case KNUDSEN_ERR_CORNER_HIT: return "corner hit";
        case KNUDSEN_ERR_TRACER_STUCK: return "tracer stuck";
        case KNUDSEN_ERR_INVARIANT: return "invariant violated";
        case KNUDSEN_ERR_GEOMETRY_MISMATCH: return "geometry mismatch";
        case KNUDSEN_ERR_BUFFER_TOO_SMALL: return "buffer too small";
        case KNUDSEN_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

knudsen_status knudsen_map_create(double alpha, knudsen_map** out) {
    if (any_null(out)) return null_error();
    return guarded([&] { *out = new knudsen_map{knudsen::MapParams(alpha)}; });
}

void knudsen_map_destroy(knudsen_map* map) { delete map; }

knudsen_status knudsen_map_alpha(const knudsen_map* map, double* alpha) {
    if (any_null(map, alpha)) return null_error();
    *alpha = map->params.alpha();
    return KNUDSEN_OK;
}

knudsen_status knudsen_tau(const knudsen_map* map, int k, double theta,
                           double* out) {
    if (any_null(map, out)) return null_error();
    return guarded([&] {
        *out = knudsen::tau(knudsen::branch_from_int(k), theta, map->params);
    });
}

knudsen_status knudsen_u_alpha(const knudsen_map* map, double theta,
                               int doubled, double* out) {
    if (any_null(map, out)) return null_error();
    return guarded([&] {
        *out = knudsen::u_alpha(
            theta, doubled ? knudsen::UScale::two_alpha : knudsen::UScale::alpha,
            map->params);
    });
}

knudsen_status knudsen_prob(const knudsen_map* map, int k, double theta,
                            double* out) {
    if (any_null(map, out)) return null_error();
    return guarded([&] {
        *out = knudsen::prob(knudsen::branch_from_int(k), theta, map->params);
    });
}

knudsen_status knudsen_kernel_row(const knudsen_map* map, double theta,
                                  knudsen_kernel_entry entries[4],
                                  size_t* count) {
    if (any_null(map, entries, count)) return null_error();
    return guarded([&] {
        const auto row = knudsen::kernel_row(theta, map->params);
        *count = row.size();
        for (size_t i = 0; i < row.size(); ++i) {
            entries[i] = {knudsen::index_of(row[i].branch), row[i].weight,
                          row[i].image};
        }
    });
}

knudsen_status knudsen_sample_branch(const knudsen_map* map, double theta,
                                     double u, int* k) {
    if (any_null(map, k)) return null_error();
    if (!(u >= 0.0 && u < 1.0)) {
        return set_error(KNUDSEN_ERR_DOMAIN, "u must lie in [0, 1)");
    }
    return guarded([&] {
        *k = knudsen::index_of(knudsen::sample_branch(theta, u, map->params));
    });
}

knudsen_status knudsen_region_label(const knudsen_map* map, double theta,
                                    const char** label) {
    if (any_null(map, label)) return null_error();
    return guarded([&] {
        // Labels are string literals, so data() is NUL-terminated.
        *label = knudsen::region_label(theta, map->params).data();
    });
}

double knudsen_reflect_sym(double theta) { return knudsen::reflect_sym(theta); }

knudsen_status knudsen_conjugate_index(int k, int* out) {
    if (any_null(out)) return null_error();
    return guarded([&] {
        *out = knudsen::index_of(
            knudsen::conjugate_index(knudsen::branch_from_int(k)));
    });
}

knudsen_status knudsen_rotation_beta(const knudsen_map* map, int* k,
                                     double* beta) {
    if (any_null(map, k, beta)) return null_error();
    const auto r = knudsen::rotation_beta(map->params);
    *k = r.k;
    *beta = r.beta;
    return KNUDSEN_OK;
}

knudsen_status knudsen_locate_branch(const knudsen_map* map, double y,
                                     double x, int* k) {
    if (any_null(map, k)) return null_error();
    return guarded([&] {
        *k = knudsen::index_of(knudsen::locate_branch({y, x}, map->params));
    });
}

knudsen_status knudsen_skew_step(const knudsen_map* map, double y, double x,
                                 double* y_out, double* x_out) {
    if (any_null(map, y_out, x_out)) return null_error();
    return guarded([&] {
        const auto p = knudsen::skew_step({y, x}, map->params);
        *y_out = p.y;
        *x_out = p.x;
    });
}

knudsen_status knudsen_cylinder_fiber(const knudsen_map* map, double x,
                                      const int* word, size_t n, double* lo,
                                      double* hi) {
    if (any_null(map, word, lo, hi)) return null_error();
    return guarded([&] {
        const auto f = knudsen::cylinder_fiber(x, make_word(word, n), map->params);
        *lo = f.empty() ? 0.0 : f.lo;
        *hi = f.empty() ? 0.0 : f.hi;
    });
}

knudsen_status knudsen_fiber_measure(const knudsen_map* map, double x,
                                     const int* word, size_t n, double* out) {
    if (any_null(map, word, out)) return null_error();
    return guarded([&] {
        *out = knudsen::fiber_measure(x, make_word(word, n), map->params);
    });
}

knudsen_status knudsen_skew_consistency_check(const knudsen_map* map,
                                      const knudsen_measure* nu, double lo,
                                      double hi, int steps, size_t samples,
                                      uint64_t seed,
                                      knudsen_skew_consistency* out) {
    if (any_null(map, nu, out)) return null_error();
    return guarded([&] {
        const auto r = knudsen::skew_consistency_check(nu->measure, {lo, hi}, steps,
                                               samples, seed, map->params);
        *out = {r.exact, r.estimate, r.standard_error};
    });
}

knudsen_status knudsen_measure_create(const double* thetas,
                                      const double* weights, size_t n,
                                      knudsen_measure** out) {
    if (any_null(thetas, weights, out)) return null_error();
    return guarded([&] {
        std::vector<knudsen::Atom> atoms(n);
        for (size_t i = 0; i < n; ++i) atoms[i] = {thetas[i], weights[i]};
        *out = new knudsen_measure{
            knudsen::AtomicMeasure::normalized(std::move(atoms))};
    });
}

knudsen_status knudsen_measure_dirac(double theta, knudsen_measure** out) {
    if (any_null(out)) return null_error();
    return guarded([&] {
        *out = new knudsen_measure{knudsen::AtomicMeasure::dirac(theta)};
    });
}

knudsen_status knudsen_measure_from_density(const double* lo, const double* hi,
                                            const double* density,
                                            size_t pieces,
                                            size_t atoms_per_bin, size_t bins,
                                            knudsen_measure** out) {
    if (any_null(lo, hi, density, out)) return null_error();
    return guarded([&] {
        std::vector<knudsen::DensityPiece> p(pieces);
        for (size_t i = 0; i < pieces; ++i) p[i] = {lo[i], hi[i], density[i]};
        *out = new knudsen_measure{knudsen::atomize_density(
            knudsen::piecewise_constant_density(std::move(p)), atoms_per_bin,
            bins)};
    });
}

knudsen_status knudsen_measure_stock(knudsen_stock_density which,
                                     size_t atoms_per_bin, size_t bins,
                                     knudsen_measure** out) {
    if (any_null(out)) return null_error();
    return guarded([&] {
        knudsen::BinMass density;
        switch (which) {
            case KNUDSEN_DENSITY_UNIFORM:
                density = knudsen::uniform_density();
                break;
            case KNUDSEN_DENSITY_SINE_LAW:
                density = knudsen::sine_law_density();
                break;
            case KNUDSEN_DENSITY_TWO_BUMP:
                density = knudsen::two_bump_density();
                break;
            default:
                knudsen::fail(knudsen::ErrorCode::invalid_argument,
                              "unknown stock density");
        }
        *out = new knudsen_measure{
            knudsen::atomize_density(density, atoms_per_bin, bins)};
    });
}

knudsen_status knudsen_measure_clone(const knudsen_measure* m,
                                     knudsen_measure** out) {
    if (any_null(m, out)) return null_error();
    return guarded([&] { *out = new knudsen_measure{m->measure}; });
}

void knudsen_measure_destroy(knudsen_measure* m) { delete m; }

knudsen_status knudsen_measure_size(const knudsen_measure* m, size_t* n) {
    if (any_null(m, n)) return null_error();
    *n = m->measure.size();
    return KNUDSEN_OK;
}

knudsen_status knudsen_measure_atoms(const knudsen_measure* m, double* thetas,
                                     double* weights, size_t capacity) {
    if (any_null(m, thetas, weights)) return null_error();
    const auto atoms = m->measure.atoms();
    const size_t n = std::min(capacity, atoms.size());
    for (size_t i = 0; i < n; ++i) {
        thetas[i] = atoms[i].theta;
        weights[i] = atoms[i].weight;
    }
    if (capacity < atoms.size()) {
        return set_error(KNUDSEN_ERR_BUFFER_TOO_SMALL,
                         "need room for " + std::to_string(atoms.size()) +
                             " atoms");
    }
    return KNUDSEN_OK;
}

knudsen_status knudsen_measure_mass(const knudsen_measure* m, double lo,
                                    double hi, double* out) {
    if (any_null(m, out)) return null_error();
    return guarded([&] { *out = m->measure.mass({lo, hi}); });
}

knudsen_status knudsen_measure_evolve(const knudsen_map* map,
                                      knudsen_measure* m, int steps,
                                      size_t atom_cap) {
    if (any_null(map, m)) return null_error();
    return guarded([&] {
        std::optional<knudsen::AtomicMeasure> last;
        knudsen::for_each_step(
            m->measure, steps, map->params,
            [&](int s, const knudsen::AtomicMeasure& nu) {
                if (s == steps) last = nu;
            },
            atom_cap == 0 ? knudsen::kDefaultAtomCap : atom_cap);
        m->measure = std::move(*last);
    });
}

knudsen_status knudsen_measure_cesaro(const knudsen_measure* const* measures,
                                      size_t n, knudsen_measure** out) {
    if (any_null(measures, out)) return null_error();
    for (size_t i = 0; i < n; ++i) {
        if (measures[i] == nullptr) return null_error();
    }
    return guarded([&] {
        std::vector<knudsen::AtomicMeasure> list;
        list.reserve(n);
        for (size_t i = 0; i < n; ++i) list.push_back(measures[i]->measure);
        *out = new knudsen_measure{knudsen::cesaro(list)};
    });
}

knudsen_status knudsen_measure_histogram(const knudsen_measure* m, size_t bins,
                                         double* masses) {
    if (any_null(m, masses)) return null_error();
    return guarded(
        [&] { copy_masses(knudsen::binned_histogram(m->measure, bins), masses); });
}

knudsen_status knudsen_mu_cdf(double theta, double* out) {
    if (any_null(out)) return null_error();
    return guarded([&] { *out = knudsen::mu_cdf(theta); });
}

knudsen_status knudsen_mu_histogram(size_t bins, double* masses) {
    if (any_null(masses)) return null_error();
    return guarded([&] { copy_masses(knudsen::mu_histogram(bins), masses); });
}

knudsen_status knudsen_distance_to_mu(const double* masses, size_t bins,
                                      double* tv, double* ks) {
    if (any_null(masses, tv, ks)) return null_error();
    return guarded([&] {
        const auto d = knudsen::distance_to_mu(
            knudsen::Histogram(std::vector<double>(masses, masses + bins)));
        *tv = d.tv;
        *ks = d.ks;
    });
}

knudsen_status knudsen_ensemble_create(const double* thetas, size_t n,
                                       uint64_t seed, knudsen_ensemble** out) {
    if (any_null(thetas, out)) return null_error();
    return guarded([&] {
        *out = new knudsen_ensemble{knudsen::ParticleEnsemble(
            std::vector<double>(thetas, thetas + n), seed)};
    });
}

knudsen_status knudsen_ensemble_from_measure(const knudsen_measure* m,
                                             size_t particles, uint64_t seed,
                                             knudsen_ensemble** out) {
    if (any_null(m, out)) return null_error();
    return guarded([&] {
        *out = new knudsen_ensemble{
            knudsen::ParticleEnsemble::from_measure(m->measure, particles, seed)};
    });
}

void knudsen_ensemble_destroy(knudsen_ensemble* e) { delete e; }

knudsen_status knudsen_ensemble_step(const knudsen_map* map,
                                     knudsen_ensemble* e, unsigned workers) {
    if (any_null(map, e)) return null_error();
    return guarded([&] { e->ensemble.step(map->params, workers); });
}

knudsen_status knudsen_ensemble_size(const knudsen_ensemble* e, size_t* n) {
    if (any_null(e, n)) return null_error();
    *n = e->ensemble.size();
    return KNUDSEN_OK;
}

knudsen_status knudsen_ensemble_step_count(const knudsen_ensemble* e,
                                           uint64_t* steps) {
    if (any_null(e, steps)) return null_error();
    *steps = e->ensemble.step_count();
    return KNUDSEN_OK;
}

knudsen_status knudsen_ensemble_thetas(const knudsen_ensemble* e,
                                       double* thetas, size_t capacity) {
    if (any_null(e, thetas)) return null_error();
    const auto t = e->ensemble.thetas();
    std::copy_n(t.begin(), std::min(capacity, t.size()), thetas);
    if (capacity < t.size()) {
        return set_error(KNUDSEN_ERR_BUFFER_TOO_SMALL,
                         "need room for " + std::to_string(t.size()) +
                             " particles");
    }
    return KNUDSEN_OK;
}

knudsen_status knudsen_ensemble_histogram(const knudsen_ensemble* e,
                                          size_t bins, double* masses) {
    if (any_null(e, masses)) return null_error();
    return guarded(
        [&] { copy_masses(knudsen::binned_histogram(e->ensemble, bins), masses); });
}

knudsen_status knudsen_cell_create(double alpha, knudsen_cell** out) {
    if (any_null(out)) return null_error();
    return guarded([&] { *out = new knudsen_cell{knudsen::CellGeometry(alpha)}; });
}

void knudsen_cell_destroy(knudsen_cell* cell) { delete cell; }

knudsen_status knudsen_first_return(const knudsen_cell* cell, double x,
                                    double theta_in,
                                    knudsen_return_record* out) {
    if (any_null(cell, out)) return null_error();
    return guarded([&] {
        const auto r = knudsen::first_return(x, theta_in, cell->geom);
        *out = {r.exit_x, r.theta_out, r.bounce_count,
                r.branch_matched ? knudsen::index_of(*r.branch_matched) : 0};
    });
}

knudsen_status knudsen_empirical_kernel(const knudsen_cell* cell,
                                        double theta_in, size_t samples,
                                        uint64_t seed, unsigned workers,
                                        knudsen_branch_frequencies* out) {
    if (any_null(cell, out)) return null_error();
    return guarded([&] {
        const auto f = knudsen::empirical_kernel(theta_in, samples, seed,
                                                 cell->geom, workers);
        for (knudsen::Branch k : knudsen::kBranches) {
            const auto i = static_cast<size_t>(knudsen::index_of(k) - 1);
            out->frequency[i] = f.frequency(k);
            out->counts[i] = f.counts[i];
        }
        out->unclassified = f.unclassified;
        out->corner_redraws = f.corner_redraws;
        out->samples = f.samples;
    });
}

knudsen_status knudsen_validation_grid(const knudsen_cell* cell, size_t n,
                                       double* grid) {
    if (any_null(cell, grid)) return null_error();
    return guarded([&] {
        const auto g = knudsen::validation_grid(n, cell->geom.params());
        std::copy(g.begin(), g.end(), grid);
    });
}

knudsen_status knudsen_validate(const knudsen_cell* cell, const double* grid,
                                size_t n, size_t samples, uint64_t seed,
                                unsigned workers, knudsen_validation** out) {
    if (any_null(cell, grid, out)) return null_error();
    return guarded([&] {
        *out = new knudsen_validation{knudsen::validate_branch_table(
            std::span<const double>(grid, n), samples, seed, cell->geom,
            workers)};
    });
}

void knudsen_validation_destroy(knudsen_validation* v) { delete v; }

knudsen_status knudsen_validation_summary(const knudsen_validation* v,
                                          int* passed, double* max_z,
                                          size_t* points) {
    if (any_null(v, passed, max_z, points)) return null_error();
    *passed = v->report.passed ? 1 : 0;
    *max_z = v->report.max_z;
    *points = v->report.points.size();
    return KNUDSEN_OK;
}

knudsen_status knudsen_validation_point_at(const knudsen_validation* v,
                                           size_t i,
                                           knudsen_validation_point* out) {
    if (any_null(v, out)) return null_error();
    if (i >= v->report.points.size()) {
        return set_error(KNUDSEN_ERR_INVALID_ARGUMENT, "point index out of range");
    }
    const auto& p = v->report.points[i];
    out->theta = p.theta;
    std::copy(p.expected.begin(), p.expected.end(), out->expected);
    std::copy(p.observed.begin(), p.observed.end(), out->observed);
    std::copy(p.z.begin(), p.z.end(), out->z);
    out->max_abs_deviation = p.max_abs_deviation;
    out->max_z = p.max_z;
    out->unclassified = p.unclassified;
    return KNUDSEN_OK;
}

knudsen_status knudsen_liouville_check(const knudsen_cell* cell, size_t samples,
                                       uint64_t seed, unsigned workers,
                                       knudsen_invariance** out) {
    if (any_null(cell, out)) return null_error();
    return guarded([&] {
        *out = new knudsen_invariance{knudsen::liouville_pushforward_check(
            samples, seed, cell->geom, workers)};
    });
}

knudsen_status knudsen_skew_invariance_check(const knudsen_map* map,
                                             size_t samples, uint64_t seed,
                                             size_t bins, unsigned workers,
                                             knudsen_invariance** out) {
    if (any_null(map, out)) return null_error();
    return guarded([&] {
        *out = new knudsen_invariance{knudsen::skew_pushforward_check(
            samples, seed, map->params, bins, workers)};
    });
}

void knudsen_invariance_destroy(knudsen_invariance* r) { delete r; }

knudsen_status knudsen_invariance_summary_get(const knudsen_invariance* r,
                                              knudsen_invariance_summary* out) {
    if (any_null(r, out)) return null_error();
    const auto& rep = r->report;
    *out = {rep.first_bins, rep.angle_bins, rep.samples,
            rep.failed_bins, rep.max_z,     rep.passed ? 1 : 0};
    return KNUDSEN_OK;
}

knudsen_status knudsen_invariance_bins(const knudsen_invariance* r,
                                       double* observed, double* expected,
                                       double* z, size_t capacity) {
    if (any_null(r)) return null_error();
    const auto& rep = r->report;
    if (capacity < rep.observed.size()) {
        return set_error(KNUDSEN_ERR_BUFFER_TOO_SMALL,
                         "need room for " + std::to_string(rep.observed.size()) +
                             " bins");
    }
    if (observed) std::copy(rep.observed.begin(), rep.observed.end(), observed);
    if (expected) std::copy(rep.expected.begin(), rep.expected.end(), expected);
    if (z) std::copy(rep.z.begin(), rep.z.end(), z);
    return KNUDSEN_OK;
}

}  // extern "C"
