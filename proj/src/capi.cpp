#include "mvpd.h"

#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "core/affine.hpp"
#include "core/continuum.hpp"
#include "core/generator.hpp"
#include "core/measures.hpp"
#include "core/moments.hpp"
#include "core/probe.hpp"
#include "core/simulate.hpp"

namespace {

thread_local std::string g_last_error;

mvpd_status classify(const std::exception& e) {
    std::string msg = e.what();
    auto has = [&msg](const char* s) { return msg.find(s) != std::string::npos; };
    if (dynamic_cast<const std::invalid_argument*>(&e)) {
        if (has("mismatch")) return MVPD_ERR_DIMENSION;
        if (has("unknown preset")) return MVPD_ERR_UNKNOWN_NAME;
        return MVPD_ERR_INVALID_ARGUMENT;
    }
    if (dynamic_cast<const std::domain_error*>(&e)) {
        if (has("cap")) return MVPD_ERR_DEGREE_CAP;
        if (has("affine")) return MVPD_ERR_NOT_AFFINE;
        return MVPD_ERR_DOMAIN;
    }
    return MVPD_ERR_NUMERIC;
}

template <typename Fn>
mvpd_status run(Fn&& fn) {
    try {
        fn();
        return MVPD_OK;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return classify(e);
    } catch (...) {
        g_last_error = "unknown error";
        return MVPD_ERR_NUMERIC;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

mvpd_status require(bool cond, const char* msg) {
    if (cond) return MVPD_OK;
    g_last_error = msg;
    return MVPD_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct mvpd_spec {
    mvpd::OperatorSpec spec;
    std::optional<mvpd::MeasureVec> default_initial;
};

struct mvpd_poly {
    mvpd::PolyRep poly;
};

struct mvpd_moments {
    mvpd::MomentSolution sol;
};

struct mvpd_riccati {
    mvpd::RiccatiSolution sol;
};

struct mvpd_ensemble {
    mvpd::PathEnsemble ens;
};

extern "C" {

const char* mvpd_last_error(void) { return g_last_error.c_str(); }

void mvpd_string_free(char* s) { delete[] s; }

int mvpd_abi_version(void) { return 1; }

mvpd_status mvpd_spec_create(const double* grid_points, int m, mvpd_spec** out) {
    if (require(grid_points && out && m >= 1, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        mvpd::Grid grid(std::vector<double>(grid_points, grid_points + m));
        *out = new mvpd_spec{mvpd::OperatorSpec(std::move(grid)), std::nullopt};
    });
}

mvpd_status mvpd_spec_preset(const char* name, int nodes, mvpd_spec** out) {
    if (require(name && out, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        mvpd::Preset p = mvpd::preset(name, nodes);
        *out = new mvpd_spec{std::move(p.spec), std::move(p.initial)};
    });
}

void mvpd_spec_free(mvpd_spec* spec) { delete spec; }

int mvpd_spec_dim(const mvpd_spec* spec) { return spec ? spec->spec.size() : 0; }

mvpd_status mvpd_spec_grid(const mvpd_spec* spec, double* points) {
    if (require(spec && points, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    for (int i = 0; i < spec->spec.size(); ++i) points[i] = spec->spec.grid.point(i);
    return MVPD_OK;
}

#define MVPD_SET_VECTOR(fn, field)                                                      \
    mvpd_status fn(mvpd_spec* spec, const double* v) {                                  \
        if (require(spec && v, "null argument") != MVPD_OK)                             \
            return MVPD_ERR_INVALID_ARGUMENT;                                           \
        int m = spec->spec.size();                                                      \
        for (int i = 0; i < m; ++i) spec->spec.field(i) = v[i];                         \
        return MVPD_OK;                                                                 \
    }

#define MVPD_SET_MATRIX(fn, field)                                                      \
    mvpd_status fn(mvpd_spec* spec, const double* v) {                                  \
        if (require(spec && v, "null argument") != MVPD_OK)                             \
            return MVPD_ERR_INVALID_ARGUMENT;                                           \
        int m = spec->spec.size();                                                      \
        for (int i = 0; i < m; ++i)                                                     \
            for (int j = 0; j < m; ++j) spec->spec.field(i, j) = v[i * m + j];          \
        return MVPD_OK;                                                                 \
    }

MVPD_SET_VECTOR(mvpd_spec_set_b, b)
MVPD_SET_VECTOR(mvpd_spec_set_alpha, alpha)
MVPD_SET_MATRIX(mvpd_spec_set_b1, B1)
MVPD_SET_MATRIX(mvpd_spec_set_beta, beta)
MVPD_SET_MATRIX(mvpd_spec_set_pi, pi)

mvpd_status mvpd_spec_add_loading(mvpd_spec* spec, const double* a) {
    if (require(spec && a, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    int m = spec->spec.size();
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v(i) = a[i];
    spec->spec.loadings.push_back(std::move(v));
    return MVPD_OK;
}

mvpd_status mvpd_spec_default_initial(const mvpd_spec* spec, double* weights) {
    if (require(spec && weights, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    int m = spec->spec.size();
    for (int i = 0; i < m; ++i)
        weights[i] = spec->default_initial ? spec->default_initial->weight(i) : 0.0;
    return MVPD_OK;
}

mvpd_status mvpd_spec_validate(const mvpd_spec* spec, int* accepted, char** json_report) {
    if (require(spec && accepted, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        mvpd::ValidationReport rep = mvpd::validate(spec->spec);
        *accepted = rep.accepted ? 1 : 0;
        if (json_report) *json_report = dup_string(rep.to_json());
    });
}

mvpd_status mvpd_spec_is_affine(const mvpd_spec* spec, int* affine) {
    if (require(spec && affine, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    *affine = mvpd::is_affine(spec->spec) ? 1 : 0;
    return MVPD_OK;
}

mvpd_status mvpd_poly_create(int m, mvpd_poly** out) {
    if (require(out && m >= 1, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    *out = new mvpd_poly{mvpd::PolyRep(m)};
    return MVPD_OK;
}

void mvpd_poly_free(mvpd_poly* poly) { delete poly; }

mvpd_status mvpd_poly_add_term(mvpd_poly* poly, int degree, const double* values) {
    if (require(poly && values && degree >= 0, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        if (degree > mvpd::kDefaultDegreeCap)
            throw std::domain_error("degree exceeds cap");
        size_t n = 1;
        for (int i = 0; i < degree; ++i) n *= static_cast<size_t>(poly->poly.grid_size());
        poly->poly.add_term(
            mvpd::SymCoeff(poly->poly.grid_size(), degree, std::vector<double>(values, values + n)));
    });
}

mvpd_status mvpd_poly_add_rank_one(mvpd_poly* poly, const double* g, int power) {
    if (require(poly && g && power >= 0, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        if (power > mvpd::kDefaultDegreeCap)
            throw std::domain_error("degree exceeds cap");
        int m = poly->poly.grid_size();
        poly->poly.add_term(mvpd::SymCoeff::rank_one(std::vector<double>(g, g + m), power));
    });
}

int mvpd_poly_degree(const mvpd_poly* poly) { return poly ? poly->poly.degree() : -1; }

namespace {

mvpd::MeasureVec measure_from(const mvpd_spec* spec, const double* weights) {
    return mvpd::MeasureVec(spec->spec.grid,
                            std::vector<double>(weights, weights + spec->spec.size()));
}

Eigen::VectorXd vector_from(const double* v, int m) {
    Eigen::VectorXd out(m);
    for (int i = 0; i < m; ++i) out(i) = v[i];
    return out;
}

}  // namespace

mvpd_status mvpd_poly_eval(const mvpd_poly* poly, const double* weights, double* out) {
    if (require(poly && weights && out, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        mvpd::Grid grid = mvpd::Grid::labels(poly->poly.grid_size());
        mvpd::MeasureVec nu(grid,
                            std::vector<double>(weights, weights + poly->poly.grid_size()));
        *out = mvpd::poly_eval(poly->poly, nu);
    });
}

mvpd_status mvpd_apply_generator(const mvpd_spec* spec, const mvpd_poly* poly,
                                 const double* weights, double* out) {
    if (require(spec && poly && weights && out, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] { *out = mvpd::apply_generator(spec->spec, poly->poly, measure_from(spec, weights)); });
}

mvpd_status mvpd_apply_dual(const mvpd_spec* spec, const mvpd_poly* poly, mvpd_poly** out) {
    if (require(spec && poly && out, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] { *out = new mvpd_poly{mvpd::apply_dual(spec->spec, poly->poly)}; });
}

mvpd_status mvpd_carre_du_champ(const mvpd_spec* spec, const mvpd_poly* p, const mvpd_poly* q,
                                const double* weights, double* out) {
    if (require(spec && p && q && weights && out, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        *out = mvpd::carre_du_champ(spec->spec, p->poly, q->poly, measure_from(spec, weights));
    });
}

mvpd_status mvpd_pmp_probe(const mvpd_spec* spec, uint64_t seed, int n_probes, int restarts,
                           double tol, int* violations, char** json_report) {
    if (require(spec && violations && n_probes >= 1, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        int bad = 0;
        std::ostringstream os;
        os << "{\"probes\":" << n_probes << ",\"reports\":[";
        for (int i = 0; i < n_probes; ++i) {
            mvpd::ProbeFunction f =
                mvpd::ProbeFunction::random(spec->spec.size(), seed + 1000003ull * i);
            mvpd::ProbeOptions opts;
            opts.tol = tol;
            if (restarts > 0) opts.restarts = restarts;
            opts.seed = seed ^ (0x9e3779b97f4a7c15ull + i);
            mvpd::ProbeReport rep = mvpd::pmp_probe(spec->spec, f, opts);
            if (!rep.ok()) ++bad;
            if (i) os << ",";
            os << rep.to_json();
        }
        os << "],\"violations\":" << bad << "}";
        *violations = bad;
        if (json_report) *json_report = dup_string(os.str());
    });
}

mvpd_status mvpd_moment(const mvpd_spec* spec, const mvpd_poly* poly, const double* weights0,
                        double horizon, int steps, double* out) {
    if (require(spec && poly && weights0 && out, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        mvpd::MomentSolverOptions opts;
        if (steps > 0) opts.steps = steps;
        *out = mvpd::moment(spec->spec, poly->poly, measure_from(spec, weights0), horizon, opts);
    });
}

mvpd_status mvpd_moment_surface(const mvpd_spec* spec, const mvpd_poly* poly,
                                const double* weights0, const double* times, int n_times,
                                int steps, double* out_values) {
    if (require(spec && poly && weights0 && times && out_values && n_times >= 1,
                "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        mvpd::MomentSolverOptions opts;
        if (steps > 0) opts.steps = steps;
        std::vector<double> tv(times, times + n_times);
        std::vector<double> vals =
            mvpd::moment_surface(spec->spec, poly->poly, measure_from(spec, weights0), tv, opts);
        for (int i = 0; i < n_times; ++i) out_values[i] = vals[static_cast<size_t>(i)];
    });
}

mvpd_status mvpd_moment_solve(const mvpd_spec* spec, const mvpd_poly* poly, double horizon,
                              int steps, mvpd_moments** out) {
    if (require(spec && poly && out, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        mvpd::MomentSolverOptions opts;
        if (steps > 0) opts.steps = steps;
        *out = new mvpd_moments{mvpd::solve_moment_ode(spec->spec, poly->poly, horizon, opts)};
    });
}

void mvpd_moments_free(mvpd_moments* sol) { delete sol; }

mvpd_status mvpd_moments_write_csv(const mvpd_moments* sol, const char* path, int stride) {
    if (require(sol && path, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    std::ofstream os(path);
    if (!os) {
        g_last_error = "cannot open output file";
        return MVPD_ERR_IO;
    }
    sol->sol.write_csv(os, stride > 0 ? stride : 1);
    return MVPD_OK;
}

mvpd_status mvpd_riccati_solve(const mvpd_spec* spec, const double* g, double horizon, int steps,
                               mvpd_riccati** out) {
    if (require(spec && g && out, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        mvpd::RiccatiOptions opts;
        if (steps > 0) opts.steps = steps;
        *out = new mvpd_riccati{
            mvpd::solve_riccati(spec->spec, vector_from(g, spec->spec.size()), horizon, opts)};
    });
}

mvpd_status mvpd_riccati_solve_mild(const mvpd_spec* spec, const double* g, double horizon,
                                    int steps, int max_iters, mvpd_riccati** out) {
    if (require(spec && g && out, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        mvpd::RiccatiOptions opts;
        if (steps > 0) opts.steps = steps;
        if (max_iters > 0) opts.picard_iters = max_iters;
        *out = new mvpd_riccati{
            mvpd::solve_riccati_mild(spec->spec, vector_from(g, spec->spec.size()), horizon, opts)};
    });
}

void mvpd_riccati_free(mvpd_riccati* sol) { delete sol; }

int mvpd_riccati_nodes(const mvpd_riccati* sol) {
    return sol ? static_cast<int>(sol->sol.times.size()) : 0;
}

int mvpd_riccati_blowup(const mvpd_riccati* sol) { return sol && sol->sol.blowup ? 1 : 0; }

mvpd_status mvpd_riccati_node(const mvpd_riccati* sol, int node, double* t, double* psi,
                              double* phi) {
    if (require(sol && node >= 0 && node < static_cast<int>(sol->sol.times.size()),
                "node out of range") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    if (t) *t = sol->sol.times[static_cast<size_t>(node)];
    if (psi) {
        const Eigen::VectorXd& v = sol->sol.psi[static_cast<size_t>(node)];
        for (Eigen::Index i = 0; i < v.size(); ++i) psi[i] = v(i);
    }
    if (phi) *phi = sol->sol.phi[static_cast<size_t>(node)];
    return MVPD_OK;
}

mvpd_status mvpd_riccati_write_csv(const mvpd_riccati* sol, const char* path, int stride) {
    if (require(sol && path, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    std::ofstream os(path);
    if (!os) {
        g_last_error = "cannot open output file";
        return MVPD_ERR_IO;
    }
    sol->sol.write_csv(os, stride > 0 ? stride : 1);
    return MVPD_OK;
}

mvpd_status mvpd_laplace(const mvpd_spec* spec, const double* g, const double* weights0,
                         double horizon, int steps, double* out) {
    if (require(spec && g && weights0 && out, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        mvpd::RiccatiOptions opts;
        if (steps > 0) opts.steps = steps;
        *out = mvpd::laplace(spec->spec, vector_from(g, spec->spec.size()),
                             measure_from(spec, weights0), horizon, opts);
    });
}

mvpd_status mvpd_simulate(const mvpd_spec* spec, const double* weights0, double horizon,
                          int n_steps, long n_paths, uint64_t seed, int store_stride,
                          mvpd_ensemble** out) {
    if (require(spec && weights0 && out, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        mvpd::SimulateOptions opts;
        opts.store_stride = store_stride;
        *out = new mvpd_ensemble{mvpd::simulate(spec->spec, measure_from(spec, weights0), horizon,
                                                n_steps, n_paths, seed, opts)};
    });
}

mvpd_status mvpd_simulate_gbm_lift(const double* mu, int m, double sigma, double horizon,
                                   long n_paths, uint64_t seed, mvpd_ensemble** out) {
    if (require(mu && out && m >= 1, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        mvpd::Grid grid = mvpd::Grid::labels(m);
        mvpd::MeasureVec nu(grid, std::vector<double>(mu, mu + m));
        *out = new mvpd_ensemble{mvpd::simulate_gbm_lift(nu, sigma, horizon, n_paths, seed)};
    });
}

void mvpd_ensemble_free(mvpd_ensemble* ens) { delete ens; }

int mvpd_ensemble_dim(const mvpd_ensemble* ens) { return ens ? ens->ens.m : 0; }

int mvpd_ensemble_slices(const mvpd_ensemble* ens) { return ens ? ens->ens.n_slices() : 0; }

long mvpd_ensemble_paths(const mvpd_ensemble* ens) { return ens ? ens->ens.n_paths : 0; }

mvpd_status mvpd_ensemble_times(const mvpd_ensemble* ens, double* times) {
    if (require(ens && times, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    for (int s = 0; s < ens->ens.n_slices(); ++s) times[s] = ens->ens.time_of_slice(s);
    return MVPD_OK;
}

mvpd_status mvpd_ensemble_slice(const mvpd_ensemble* ens, long path, int slice, double* weights) {
    if (require(ens && weights && path >= 0 && path < ens->ens.n_paths && slice >= 0 &&
                    slice < ens->ens.n_slices(),
                "index out of range") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    const double* src = ens->ens.slice(path, slice);
    for (int i = 0; i < ens->ens.m; ++i) weights[i] = src[i];
    return MVPD_OK;
}

mvpd_status mvpd_estimate(const mvpd_ensemble* ens, const mvpd_poly* poly, double* mean,
                          double* se) {
    if (require(ens && poly && mean && se, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] {
        auto [m, s] = mvpd::estimate(ens->ens, poly->poly);
        *mean = m;
        *se = s;
    });
}

mvpd_status mvpd_qv_estimate(const mvpd_ensemble* ens, const mvpd_poly* p, const mvpd_poly* q,
                             double* out) {
    if (require(ens && p && q && out, "null argument") != MVPD_OK)
        return MVPD_ERR_INVALID_ARGUMENT;
    return run([&] { *out = mvpd::qv_estimate(ens->ens, p->poly, q->poly); });
}

mvpd_status mvpd_ensemble_write_paths(const mvpd_ensemble* ens, const char* path) {
    if (require(ens && path, "null argument") != MVPD_OK) return MVPD_ERR_INVALID_ARGUMENT;
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        g_last_error = "cannot open output file";
        return MVPD_ERR_IO;
    }
    mvpd::write_paths_binary(ens->ens, os);
    return MVPD_OK;
}

}  // extern "C"
