/*
 * C interface to the knudsen random-billiard library.
 *
 * Objects are opaque handles created by *_create functions and released by
 * the matching *_destroy. Every fallible call returns a knudsen_status; on
 * failure knudsen_last_error() holds a message for the calling thread.
 * Branch indices are 1..4 throughout.
 */
#ifndef KNUDSEN_KNUDSEN_H
#define KNUDSEN_KNUDSEN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(KNUDSEN_BUILDING)
#define KNUDSEN_API __declspec(dllexport)
#else
#define KNUDSEN_API __declspec(dllimport)
#endif
#else
#define KNUDSEN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum knudsen_status {
    KNUDSEN_OK = 0,
    KNUDSEN_ERR_NULL = 1,
    KNUDSEN_ERR_INVALID_ARGUMENT = 2,
    KNUDSEN_ERR_DOMAIN = 3,
    KNUDSEN_ERR_ATOM_CAP = 4,
    KNUDSEN_ERR_CORNER_HIT = 5,
    KNUDSEN_ERR_TRACER_STUCK = 6,
    KNUDSEN_ERR_INVARIANT = 7,
    KNUDSEN_ERR_GEOMETRY_MISMATCH = 8,
    KNUDSEN_ERR_BUFFER_TOO_SMALL = 9,
    KNUDSEN_ERR_INTERNAL = 10
} knudsen_status;

typedef struct knudsen_map knudsen_map;
typedef struct knudsen_measure knudsen_measure;
typedef struct knudsen_ensemble knudsen_ensemble;
typedef struct knudsen_cell knudsen_cell;
typedef struct knudsen_validation knudsen_validation;
typedef struct knudsen_invariance knudsen_invariance;

/* Message of the last failed call on this thread; never NULL. */
KNUDSEN_API const char* knudsen_last_error(void);
KNUDSEN_API const char* knudsen_status_name(knudsen_status status);

/* ---- exit-angle maps and probabilities -------------------------------- */

KNUDSEN_API knudsen_status knudsen_map_create(double alpha, knudsen_map** out);
KNUDSEN_API void knudsen_map_destroy(knudsen_map* map);
KNUDSEN_API knudsen_status knudsen_map_alpha(const knudsen_map* map,
                                             double* alpha);

KNUDSEN_API knudsen_status knudsen_tau(const knudsen_map* map, int k,
                                       double theta, double* out);
/* doubled != 0 selects tan(2 alpha). */
KNUDSEN_API knudsen_status knudsen_u_alpha(const knudsen_map* map,
                                           double theta, int doubled,
                                           double* out);
KNUDSEN_API knudsen_status knudsen_prob(const knudsen_map* map, int k,
                                        double theta, double* out);

typedef struct knudsen_kernel_entry {
    int branch;
    double weight;
    double image;
} knudsen_kernel_entry;

/* Writes up to 4 entries; *count receives the number written. */
KNUDSEN_API knudsen_status knudsen_kernel_row(const knudsen_map* map,
                                              double theta,
                                              knudsen_kernel_entry entries[4],
                                              size_t* count);
KNUDSEN_API knudsen_status knudsen_sample_branch(const knudsen_map* map,
                                                 double theta, double u,
                                                 int* k);
/* Static string such as "[3a,pi-3a)". */
KNUDSEN_API knudsen_status knudsen_region_label(const knudsen_map* map,
                                                double theta,
                                                const char** label);
KNUDSEN_API double knudsen_reflect_sym(double theta);
KNUDSEN_API knudsen_status knudsen_conjugate_index(int k, int* out);
KNUDSEN_API knudsen_status knudsen_rotation_beta(const knudsen_map* map,
                                                 int* k, double* beta);

/* ---- skew representation ---------------------------------------------- */

KNUDSEN_API knudsen_status knudsen_locate_branch(const knudsen_map* map,
                                                 double y, double x, int* k);
KNUDSEN_API knudsen_status knudsen_skew_step(const knudsen_map* map, double y,
                                             double x, double* y_out,
                                             double* x_out);
/* word[0] is i_1, word[n-1] is i_n (the branch applied first). An empty
 * fiber is reported as lo == hi == 0. */
KNUDSEN_API knudsen_status knudsen_cylinder_fiber(const knudsen_map* map,
                                                  double x, const int* word,
                                                  size_t n, double* lo,
                                                  double* hi);
KNUDSEN_API knudsen_status knudsen_fiber_measure(const knudsen_map* map,
                                                 double x, const int* word,
                                                 size_t n, double* out);

typedef struct knudsen_skew_consistency {
    double exact;
    double estimate;
    double standard_error;
} knudsen_skew_consistency;

/* Exact nu^(steps)([lo, hi)) versus the skew-map Monte Carlo estimate. */
KNUDSEN_API knudsen_status knudsen_skew_consistency_check(
    const knudsen_map* map, const knudsen_measure* nu, double lo, double hi,
    int steps, size_t samples, uint64_t seed, knudsen_skew_consistency* out);

/* ---- measures ----------------------------------------------------------- */

/* Weights must be non-negative with positive sum; they are normalised. */
KNUDSEN_API knudsen_status knudsen_measure_create(const double* thetas,
                                                  const double* weights,
                                                  size_t n,
                                                  knudsen_measure** out);
KNUDSEN_API knudsen_status knudsen_measure_dirac(double theta,
                                                 knudsen_measure** out);
/* Midpoint atoms of a piecewise-constant density given as pieces
 * [lo[i], hi[i]) with value density[i]. */
KNUDSEN_API knudsen_status knudsen_measure_from_density(
    const double* lo, const double* hi, const double* density, size_t pieces,
    size_t atoms_per_bin, size_t bins, knudsen_measure** out);

typedef enum knudsen_stock_density {
    KNUDSEN_DENSITY_UNIFORM = 0,
    KNUDSEN_DENSITY_SINE_LAW = 1,
    KNUDSEN_DENSITY_TWO_BUMP = 2
} knudsen_stock_density;

KNUDSEN_API knudsen_status knudsen_measure_stock(knudsen_stock_density which,
                                                 size_t atoms_per_bin,
                                                 size_t bins,
                                                 knudsen_measure** out);
KNUDSEN_API knudsen_status knudsen_measure_clone(const knudsen_measure* m,
                                                 knudsen_measure** out);
KNUDSEN_API void knudsen_measure_destroy(knudsen_measure* m);

KNUDSEN_API knudsen_status knudsen_measure_size(const knudsen_measure* m,
                                                size_t* n);
/* Copies min(capacity, size) atoms; KNUDSEN_ERR_BUFFER_TOO_SMALL if the
 * buffers are shorter than the support. */
KNUDSEN_API knudsen_status knudsen_measure_atoms(const knudsen_measure* m,
                                                 double* thetas,
                                                 double* weights,
                                                 size_t capacity);
KNUDSEN_API knudsen_status knudsen_measure_mass(const knudsen_measure* m,
                                                double lo, double hi,
                                                double* out);

/* Replaces *m with its push-forward through `steps` kernel steps. */
KNUDSEN_API knudsen_status knudsen_measure_evolve(const knudsen_map* map,
                                                  knudsen_measure* m,
                                                  int steps, size_t atom_cap);
KNUDSEN_API knudsen_status knudsen_measure_cesaro(
    const knudsen_measure* const* measures, size_t n, knudsen_measure** out);
KNUDSEN_API knudsen_status knudsen_measure_histogram(const knudsen_measure* m,
                                                     size_t bins,
                                                     double* masses);

KNUDSEN_API knudsen_status knudsen_mu_cdf(double theta, double* out);
KNUDSEN_API knudsen_status knudsen_mu_histogram(size_t bins, double* masses);
KNUDSEN_API knudsen_status knudsen_distance_to_mu(const double* masses,
                                                  size_t bins, double* tv,
                                                  double* ks);

/* ---- particle ensembles ------------------------------------------------ */

KNUDSEN_API knudsen_status knudsen_ensemble_create(const double* thetas,
                                                   size_t n, uint64_t seed,
                                                   knudsen_ensemble** out);
KNUDSEN_API knudsen_status knudsen_ensemble_from_measure(
    const knudsen_measure* m, size_t particles, uint64_t seed,
    knudsen_ensemble** out);
KNUDSEN_API void knudsen_ensemble_destroy(knudsen_ensemble* e);
/* workers == 0 uses the hardware concurrency. */
KNUDSEN_API knudsen_status knudsen_ensemble_step(const knudsen_map* map,
                                                 knudsen_ensemble* e,
                                                 unsigned workers);
KNUDSEN_API knudsen_status knudsen_ensemble_size(const knudsen_ensemble* e,
                                                 size_t* n);
KNUDSEN_API knudsen_status knudsen_ensemble_step_count(
    const knudsen_ensemble* e, uint64_t* steps);
KNUDSEN_API knudsen_status knudsen_ensemble_thetas(const knudsen_ensemble* e,
                                                   double* thetas,
                                                   size_t capacity);
KNUDSEN_API knudsen_status knudsen_ensemble_histogram(
    const knudsen_ensemble* e, size_t bins, double* masses);

/* ---- ray-tracing oracle ------------------------------------------------ */

KNUDSEN_API knudsen_status knudsen_cell_create(double alpha,
                                               knudsen_cell** out);
KNUDSEN_API void knudsen_cell_destroy(knudsen_cell* cell);

typedef struct knudsen_return_record {
    double exit_x;
    double theta_out;
    int bounce_count;
    int branch_matched; /* 0 when no tau image matches */
} knudsen_return_record;

KNUDSEN_API knudsen_status knudsen_first_return(const knudsen_cell* cell,
                                                double x, double theta_in,
                                                knudsen_return_record* out);

typedef struct knudsen_branch_frequencies {
    double frequency[4];
    size_t counts[4];
    size_t unclassified;
    size_t corner_redraws;
    size_t samples;
} knudsen_branch_frequencies;

KNUDSEN_API knudsen_status knudsen_empirical_kernel(
    const knudsen_cell* cell, double theta_in, size_t samples, uint64_t seed,
    unsigned workers, knudsen_branch_frequencies* out);

/* Writes n breakpoint-avoiding midpoint angles. */
KNUDSEN_API knudsen_status knudsen_validation_grid(const knudsen_cell* cell,
                                                   size_t n, double* grid);

typedef struct knudsen_validation_point {
    double theta;
    double expected[4];
    double observed[4];
    double z[4];
    double max_abs_deviation;
    double max_z;
    size_t unclassified;
} knudsen_validation_point;

KNUDSEN_API knudsen_status knudsen_validate(const knudsen_cell* cell,
                                            const double* grid, size_t n,
                                            size_t samples, uint64_t seed,
                                            unsigned workers,
                                            knudsen_validation** out);
KNUDSEN_API void knudsen_validation_destroy(knudsen_validation* v);
KNUDSEN_API knudsen_status knudsen_validation_summary(
    const knudsen_validation* v, int* passed, double* max_z, size_t* points);
KNUDSEN_API knudsen_status knudsen_validation_point_at(
    const knudsen_validation* v, size_t i, knudsen_validation_point* out);

/* Liouville push-forward of the first-return map (16 x 16 bins). */
KNUDSEN_API knudsen_status knudsen_liouville_check(const knudsen_cell* cell,
                                                   size_t samples,
                                                   uint64_t seed,
                                                   unsigned workers,
                                                   knudsen_invariance** out);
/* Same report for one step of the skew map on a bins x bins grid. */
KNUDSEN_API knudsen_status knudsen_skew_invariance_check(
    const knudsen_map* map, size_t samples, uint64_t seed, size_t bins,
    unsigned workers, knudsen_invariance** out);
KNUDSEN_API void knudsen_invariance_destroy(knudsen_invariance* r);

typedef struct knudsen_invariance_summary {
    size_t first_bins;
    size_t angle_bins;
    size_t samples;
    size_t failed_bins;
    double max_z;
    int passed;
} knudsen_invariance_summary;

KNUDSEN_API knudsen_status knudsen_invariance_summary_get(
    const knudsen_invariance* r, knudsen_invariance_summary* out);
/* Row-major arrays of first_bins * angle_bins entries; any pointer may be
 * NULL to skip it. */
KNUDSEN_API knudsen_status knudsen_invariance_bins(const knudsen_invariance* r,
                                                   double* observed,
                                                   double* expected, double* z,
                                                   size_t capacity);

#ifdef __cplusplus
}
#endif

#endif /* KNUDSEN_KNUDSEN_H */
