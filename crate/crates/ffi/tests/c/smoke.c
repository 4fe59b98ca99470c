#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "bubbleflow.h"

#define CHECK(call)                                                            \
    do {                                                                       \
        BfStatus s_ = (call);                                                  \
        if (s_ != BF_STATUS_OK) {                                              \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,                  \
                    bf_last_error_message());                                  \
            return 1;                                                          \
        }                                                                      \
    } while (0)

int main(void) {
    BfSimulation *sim = NULL;
    CHECK(bf_simulation_from_preset("column_1d", &sim));
    size_t n = 0, dim = 0;
    CHECK(bf_simulation_cell_count(sim, &n, &dim));
    double m0r, m0e, mr, me;
    CHECK(bf_simulation_masses(sim, &m0r, &m0e));
    BfEnergy e0, e1;
    CHECK(bf_simulation_energy(sim, &e0));
    for (int k = 0; k < 10; k++) {
        CHECK(bf_simulation_step(sim));
    }
    CHECK(bf_simulation_masses(sim, &mr, &me));
    CHECK(bf_simulation_energy(sim, &e1));
    double *rho = malloc(n * sizeof(double));
    CHECK(bf_simulation_copy_fields(sim, rho, NULL, NULL, n));
    if (bf_simulation_copy_fields(sim, rho, NULL, NULL, n + 1) != BF_STATUS_INVALID_ARGUMENT) {
        return 2;
    }
    bf_simulation_free(sim);
    free(rho);
    if (fabs(mr - m0r) > 1e-12 * m0r || fabs(me - m0e) > 1e-12 * m0e || e1.total > e0.total) {
        return 3;
    }
    printf("bubbleflow %s: %zu cells, E %.12f -> %.12f\n", bf_version(), n, e0.total, e1.total);
    return 0;
}
