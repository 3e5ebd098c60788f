/* Compiles the public header as C and exercises a round trip. */
#include <math.h>
#include <stdio.h>

#include "knudsen/knudsen.h"

int main(void) {
    knudsen_map* map = NULL;
    knudsen_measure* nu = NULL;
    double masses[45];
    double tv = 0.0, ks = 0.0;
    int failures = 0;

    if (knudsen_map_create(0.5, &map) != KNUDSEN_OK) return 1;
    if (knudsen_measure_dirac(0.2, &nu) != KNUDSEN_OK) return 1;
    if (knudsen_measure_evolve(map, nu, 1, 0) != KNUDSEN_OK) return 1;
    if (knudsen_measure_histogram(nu, 45, masses) != KNUDSEN_OK) return 1;
    if (masses[17] != 1.0) {
        fprintf(stderr, "dirac at 0.2 should land in bin 17\n");
        ++failures;
    }
    if (knudsen_distance_to_mu(masses, 45, &tv, &ks) != KNUDSEN_OK) return 1;
    if (!(tv > 0.9 && tv < 1.0)) ++failures;
    if (knudsen_map_create(1.0, NULL) != KNUDSEN_ERR_NULL) ++failures;

    knudsen_measure_destroy(nu);
    knudsen_map_destroy(map);
    return failures == 0 ? 0 : 1;
}
