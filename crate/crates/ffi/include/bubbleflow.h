#ifndef BUBBLEFLOW_H
#define BUBBLEFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes. The first five match the exit codes of the command-line
 tool.
 */
typedef enum BfStatus {
  BF_STATUS_OK = 0,
  BF_STATUS_CONFIG_ERROR = 1,
  BF_STATUS_STEP_ABORTED = 2,
  BF_STATUS_ROOT_FINDING_FAILED = 3,
  BF_STATUS_CONFINEMENT_FAILED = 4,
  BF_STATUS_INVALID_ARGUMENT = 10,
  BF_STATUS_NULL_POINTER = 11,
  BF_STATUS_PANIC = 12,
} BfStatus;

/*
 Opaque simulation handle.
 */
typedef struct BfSimulation BfSimulation;

/*
 Energy split of the current state.
 */
typedef struct BfEnergy {
  double total;
  double kinetic;
  double pressure;
  double entropy;
  double potential;
  /*
   Dissipation rate of the current state.
   */
  double dissipation;
} BfEnergy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Builds a simulation from the text of a configuration document. Relative
 paths in the document resolve against the working directory.

 # Safety
 `config` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BfStatus bf_simulation_from_config(const char *config, struct BfSimulation **out);

/*
 Builds a simulation from a shipped preset (`column_1d`, `halfline_1d`,
 `double_well_1d`).

 # Safety
 `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BfStatus bf_simulation_from_preset(const char *name, struct BfSimulation **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `sim` must come from this library and not be used afterwards.
 */
void bf_simulation_free(struct BfSimulation *sim);

/*
 Advances by one step of the configured size, halving it on rejection.

 # Safety
 `sim` must be a live handle.
 */
enum BfStatus bf_simulation_step(struct BfSimulation *sim);

/*
 Advances to `t_end`. On a step failure the handle keeps the last
 accepted state.

 # Safety
 `sim` must be a live handle.
 */
enum BfStatus bf_simulation_run(struct BfSimulation *sim, double t_end);

/*
 # Safety
 `sim` must be a live handle and `time` a valid pointer.
 */
enum BfStatus bf_simulation_time(struct BfSimulation *sim, double *time);

/*
 Number of cells and spatial dimension.

 # Safety
 `sim` must be a live handle; `cells` and `dim` valid pointers.
 */
enum BfStatus bf_simulation_cell_count(struct BfSimulation *sim, size_t *cells, size_t *dim);

/*
 Copies the current fields. `rho` and `eta` hold `len` values, `velocity`
 holds `len * dim` values, cell-major. Any of the three may be null to
 skip it.

 # Safety
 Non-null buffers must be valid for the stated lengths.
 */
enum BfStatus bf_simulation_copy_fields(struct BfSimulation *sim,
                                        double *rho,
                                        double *velocity,
                                        double *eta,
                                        size_t len);

/*
 Energy of the current state and its dissipation rate.

 # Safety
 `sim` must be a live handle and `out` a valid pointer.
 */
enum BfStatus bf_simulation_energy(struct BfSimulation *sim, struct BfEnergy *out);

/*
 Masses of the current state.

 # Safety
 `sim` must be a live handle; `mass_rho` and `mass_eta` valid pointers.
 */
enum BfStatus bf_simulation_masses(struct BfSimulation *sim, double *mass_rho, double *mass_eta);

/*
 Number of accepted steps so far.

 # Safety
 `sim` must be a live handle and `steps` a valid pointer.
 */
enum BfStatus bf_simulation_steps(struct BfSimulation *sim, size_t *steps);

/*
 Stationary profiles with the masses of the initial state. Profile
 buffers hold `len` values and may be null; `c_rho` and `c_eta` may be
 null as well.

 # Safety
 Non-null pointers must be valid for the stated lengths.
 */
enum BfStatus bf_stationary_solve(struct BfSimulation *sim,
                                  double *rho_s,
                                  double *eta_s,
                                  size_t len,
                                  double *c_rho,
                                  double *c_eta);

/*
 Message of the last error on this thread, empty if there was none. The
 pointer stays valid until the next failing call on the same thread.
 */
const char *bf_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *bf_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BUBBLEFLOW_H */
