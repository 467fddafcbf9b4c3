/* C interface to the unicontact solvers.
 *
 * Handles are opaque and owned by the library: pass them back to the
 * matching uc_*_free exactly once. Fallible calls return a UcStatus and
 * write results through out-pointers, which are untouched on failure.
 *
 * Link against libunicontact_ffi (cdylib or staticlib).
 */

#ifndef UNICONTACT_H
#define UNICONTACT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum UcStatus {
  UC_STATUS_OK = 0,
  UC_STATUS_NULL_POINTER = 1,
  UC_STATUS_INVALID_ARGUMENT = 2,
  UC_STATUS_SOLVER_FAILURE = 3,
  UC_STATUS_IO_ERROR = 4,
  UC_STATUS_BAD_ENCODING = 5,
  UC_STATUS_OUT_OF_RANGE = 6,
  UC_STATUS_INTERNAL = 7,
} UcStatus;

/* Opaque handles. */
typedef struct UcMesh UcMesh;
typedef struct UcPenaltySolution UcPenaltySolution;
typedef struct UcViSolution UcViSolution;
typedef struct UcRecords UcRecords;

/* One convergence-study row. eoc_h1 is NaN on the first row. */
typedef struct UcRecord {
  uint32_t level;
  double h;
  double epsilon;
  double h1_error;
  double energy_error;
  double l2_residual;
  double wres_l2;
  double wres_neg;
  double neg_norm_nu;
  uint64_t newton_iters;
  double eoc_h1;
  double max_penetration;
} UcRecord;

/* Version and status names (static storage, do not free). */
const char *uc_version(void);
const char *uc_status_name(UcStatus status);

/* Structured contact meshes of the unit square. */
UcStatus uc_mesh_generate(size_t n, UcMesh **out);
UcStatus uc_mesh_refine(const UcMesh *mesh, UcMesh **out);
void uc_mesh_free(UcMesh *mesh);
size_t uc_mesh_num_nodes(const UcMesh *mesh);
size_t uc_mesh_num_triangles(const UcMesh *mesh);
double uc_mesh_h(const UcMesh *mesh);
UcStatus uc_mesh_write_text(const UcMesh *mesh, const char *path);
UcStatus uc_mesh_read_text(const char *path, UcMesh **out);

/* Penalty solves of the named benchmark cases
 * ("patch", "flat_punch", "tension") on the n-by-n mesh. */
UcStatus uc_solve_penalty(const char *case_name, size_t n, double epsilon,
                          UcPenaltySolution **out);
size_t uc_penalty_len(const UcPenaltySolution *sol);
UcStatus uc_penalty_displacement(const UcPenaltySolution *sol, double *buffer,
                                 size_t len);
size_t uc_penalty_iterations(const UcPenaltySolution *sol);
double uc_penalty_max_penetration(const UcPenaltySolution *sol);
void uc_penalty_free(UcPenaltySolution *sol);

/* Constrained (variational inequality) reference solves. */
UcStatus uc_solve_vi(const char *case_name, size_t n, UcViSolution **out);
size_t uc_vi_len(const UcViSolution *sol);
UcStatus uc_vi_displacement(const UcViSolution *sol, double *buffer, size_t len);
double uc_vi_total_contact_force(const UcViSolution *sol);
size_t uc_vi_active_count(const UcViSolution *sol);
void uc_vi_free(UcViSolution *sol);

/* Convergence studies. mode is "h" or "eps". */
UcStatus uc_run_study(const char *case_name, const char *mode,
                      uint32_t level_min, uint32_t level_max, double theta,
                      double eps_scale, double nu, uint32_t ref_offset,
                      double eps0, size_t eps_steps, UcRecords **out);
size_t uc_records_len(const UcRecords *recs);
UcStatus uc_records_get(const UcRecords *recs, size_t index, UcRecord *out);
UcStatus uc_records_write_csv(const UcRecords *recs, const char *path);
void uc_records_free(UcRecords *recs);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* UNICONTACT_H */
