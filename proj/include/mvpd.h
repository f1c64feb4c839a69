/*
 * mvpd - measure-valued polynomial diffusions on a finite grid.
 *
 * C interface to the core library: opaque handles, status codes, and a
 * thread-local error message. All matrices are dense row-major; a weight
 * vector lists the masses sitting on the grid nodes.
 */
#ifndef MVPD_H
#define MVPD_H

#include <stdint.h>

#if defined(_WIN32)
#define MVPD_API __declspec(dllexport)
#else
#define MVPD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mvpd_status {
    MVPD_OK = 0,
    MVPD_ERR_INVALID_ARGUMENT = 1,
    MVPD_ERR_DIMENSION = 2,
    MVPD_ERR_DEGREE_CAP = 3,
    MVPD_ERR_NOT_AFFINE = 4,
    MVPD_ERR_DOMAIN = 5,
    MVPD_ERR_NUMERIC = 6,
    MVPD_ERR_UNKNOWN_NAME = 7,
    MVPD_ERR_IO = 8
} mvpd_status;

typedef struct mvpd_spec mvpd_spec;
typedef struct mvpd_poly mvpd_poly;
typedef struct mvpd_moments mvpd_moments;
typedef struct mvpd_riccati mvpd_riccati;
typedef struct mvpd_ensemble mvpd_ensemble;

/* Message describing the most recent failure on this thread. */
MVPD_API const char* mvpd_last_error(void);
MVPD_API void mvpd_string_free(char* s);
MVPD_API int mvpd_abi_version(void);

/* --- operator specification ------------------------------------------- */

MVPD_API mvpd_status mvpd_spec_create(const double* grid_points, int m, mvpd_spec** out);
MVPD_API mvpd_status mvpd_spec_preset(const char* name, int nodes, mvpd_spec** out);
MVPD_API void mvpd_spec_free(mvpd_spec* spec);
MVPD_API int mvpd_spec_dim(const mvpd_spec* spec);
MVPD_API mvpd_status mvpd_spec_grid(const mvpd_spec* spec, double* points);
MVPD_API mvpd_status mvpd_spec_set_b(mvpd_spec* spec, const double* b);
MVPD_API mvpd_status mvpd_spec_set_b1(mvpd_spec* spec, const double* b1_rowmajor);
MVPD_API mvpd_status mvpd_spec_set_alpha(mvpd_spec* spec, const double* alpha);
MVPD_API mvpd_status mvpd_spec_set_beta(mvpd_spec* spec, const double* beta_rowmajor);
MVPD_API mvpd_status mvpd_spec_set_pi(mvpd_spec* spec, const double* pi_rowmajor);
MVPD_API mvpd_status mvpd_spec_add_loading(mvpd_spec* spec, const double* a);
/* Default initial weights of a preset (zeros for hand-built specs). */
MVPD_API mvpd_status mvpd_spec_default_initial(const mvpd_spec* spec, double* weights);

/* Admissibility; *accepted is 1/0, report is a JSON document (caller frees
 * with mvpd_string_free; pass NULL to skip). */
MVPD_API mvpd_status mvpd_spec_validate(const mvpd_spec* spec, int* accepted, char** json_report);
MVPD_API mvpd_status mvpd_spec_is_affine(const mvpd_spec* spec, int* affine);

/* --- polynomials on measures ------------------------------------------ */

MVPD_API mvpd_status mvpd_poly_create(int m, mvpd_poly** out);
MVPD_API void mvpd_poly_free(mvpd_poly* poly);
/* Dense degree-k coefficient block of m^k values; symmetrized on entry. */
MVPD_API mvpd_status mvpd_poly_add_term(mvpd_poly* poly, int degree, const double* values);
/* Adds <g, nu>^power. */
MVPD_API mvpd_status mvpd_poly_add_rank_one(mvpd_poly* poly, const double* g, int power);
MVPD_API int mvpd_poly_degree(const mvpd_poly* poly);
MVPD_API mvpd_status mvpd_poly_eval(const mvpd_poly* poly, const double* weights, double* out);

/* --- generator --------------------------------------------------------- */

MVPD_API mvpd_status mvpd_apply_generator(const mvpd_spec* spec, const mvpd_poly* poly,
                                          const double* weights, double* out);
MVPD_API mvpd_status mvpd_apply_dual(const mvpd_spec* spec, const mvpd_poly* poly,
                                     mvpd_poly** out);
MVPD_API mvpd_status mvpd_carre_du_champ(const mvpd_spec* spec, const mvpd_poly* p,
                                         const mvpd_poly* q, const double* weights, double* out);
/* Runs n_probes random cylindrical probes; *violations counts failed
 * maximum-principle checks, report is a JSON summary. */
MVPD_API mvpd_status mvpd_pmp_probe(const mvpd_spec* spec, uint64_t seed, int n_probes,
                                    int restarts, double tol, int* violations,
                                    char** json_report);

/* --- moment engine ------------------------------------------------------ */

MVPD_API mvpd_status mvpd_moment(const mvpd_spec* spec, const mvpd_poly* poly,
                                 const double* weights0, double horizon, int steps, double* out);
MVPD_API mvpd_status mvpd_moment_surface(const mvpd_spec* spec, const mvpd_poly* poly,
                                         const double* weights0, const double* times,
                                         int n_times, int steps, double* out_values);
MVPD_API mvpd_status mvpd_moment_solve(const mvpd_spec* spec, const mvpd_poly* poly,
                                       double horizon, int steps, mvpd_moments** out);
MVPD_API void mvpd_moments_free(mvpd_moments* sol);
MVPD_API mvpd_status mvpd_moments_write_csv(const mvpd_moments* sol, const char* path, int stride);

/* --- affine subclass ---------------------------------------------------- */

MVPD_API mvpd_status mvpd_riccati_solve(const mvpd_spec* spec, const double* g, double horizon,
                                        int steps, mvpd_riccati** out);
MVPD_API mvpd_status mvpd_riccati_solve_mild(const mvpd_spec* spec, const double* g,
                                             double horizon, int steps, int max_iters,
                                             mvpd_riccati** out);
MVPD_API void mvpd_riccati_free(mvpd_riccati* sol);
MVPD_API int mvpd_riccati_nodes(const mvpd_riccati* sol);
MVPD_API int mvpd_riccati_blowup(const mvpd_riccati* sol);
MVPD_API mvpd_status mvpd_riccati_node(const mvpd_riccati* sol, int node, double* t, double* psi,
                                       double* phi);
MVPD_API mvpd_status mvpd_riccati_write_csv(const mvpd_riccati* sol, const char* path, int stride);
MVPD_API mvpd_status mvpd_laplace(const mvpd_spec* spec, const double* g, const double* weights0,
                                  double horizon, int steps, double* out);

/* --- Monte Carlo -------------------------------------------------------- */

/* store_stride: slices kept every so many steps; 0 picks automatically and
 * falls back to endpoints only for large ensembles. */
MVPD_API mvpd_status mvpd_simulate(const mvpd_spec* spec, const double* weights0, double horizon,
                                   int n_steps, long n_paths, uint64_t seed, int store_stride,
                                   mvpd_ensemble** out);
MVPD_API mvpd_status mvpd_simulate_gbm_lift(const double* mu, int m, double sigma, double horizon,
                                            long n_paths, uint64_t seed, mvpd_ensemble** out);
MVPD_API void mvpd_ensemble_free(mvpd_ensemble* ens);
MVPD_API int mvpd_ensemble_dim(const mvpd_ensemble* ens);
MVPD_API int mvpd_ensemble_slices(const mvpd_ensemble* ens);
MVPD_API long mvpd_ensemble_paths(const mvpd_ensemble* ens);
MVPD_API mvpd_status mvpd_ensemble_times(const mvpd_ensemble* ens, double* times);
MVPD_API mvpd_status mvpd_ensemble_slice(const mvpd_ensemble* ens, long path, int slice,
                                         double* weights);
MVPD_API mvpd_status mvpd_estimate(const mvpd_ensemble* ens, const mvpd_poly* poly, double* mean,
                                   double* se);
MVPD_API mvpd_status mvpd_qv_estimate(const mvpd_ensemble* ens, const mvpd_poly* p,
                                      const mvpd_poly* q, double* out);
/* Raw path dump: header u64 m, u64 stored_steps, u64 n_paths, f64 dt, then
 * little-endian f64 weights, path-major. */
MVPD_API mvpd_status mvpd_ensemble_write_paths(const mvpd_ensemble* ens, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* MVPD_H */
