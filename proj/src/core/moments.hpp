#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "core/generator.hpp"
#include "core/measures.hpp"

namespace mvpd {

struct PathEnsemble;   // simulate.hpp

struct MomentSolverOptions {
    int steps = 1000;              // fixed-step RK4 nodes over [0, T]
    int degree_cap = kDefaultDegreeCap;
    bool store_trajectory = true;  // keep every node (first/last always kept)
};

/// Coefficient trajectory of the dual linear ODE d/dt g_t = L g_t, g_0 = g.
/// The conditional moment at horizon T from state nu is poly_eval(g_T, nu).
/// On a finite grid the coefficient space is finite dimensional, so the
/// linear ODE always has a global solution and the weak (integrated) solution
/// concept coincides with the classical one; neither needs a runtime check.
struct MomentSolution {
    std::vector<double> times;
    std::vector<PolyRep> coeffs;
    double step = 0;
    std::string method = "rk4";

    const PolyRep& terminal() const { return coeffs.back(); }
    const PolyRep& initial() const { return coeffs.front(); }

    /// CSV rows: t, degree, canonical multi-index (1-based, space separated), value.
    void write_csv(std::ostream& os, int stride = 1) const;
};

MomentSolution solve_moment_ode(const OperatorSpec& spec, const PolyRep& g, double T,
                                const MomentSolverOptions& opts = {});

/// E[p_g(X_T) | X_0 = nu0].
double moment(const OperatorSpec& spec, const PolyRep& g, const MeasureVec& nu0, double T,
              const MomentSolverOptions& opts = {});

/// Moments over a time grid sharing one integration; times must lie in
/// [0, max(times)] (values between solver nodes are interpolated linearly).
std::vector<double> moment_surface(const OperatorSpec& spec, const PolyRep& g,
                                   const MeasureVec& nu0, const std::vector<double>& times,
                                   const MomentSolverOptions& opts = {});

/// Dense matrix of the dual operator on the stacked coefficient space of
/// degree <= max_degree (dimension sum_k m^k, capped at 2000).
Eigen::MatrixXd dual_matrix(const OperatorSpec& spec, int max_degree);

/// Cross-check path: moment through the matrix exponential of dual_matrix.
double moment_via_expm(const OperatorSpec& spec, const PolyRep& g, const MeasureVec& nu0,
                       double T);

struct ComparisonReport {
    double engine_value = 0;
    double mc_mean = 0;
    double mc_se = 0;
    double z = 0;   // (mc_mean - engine_value) / mc_se
};

ComparisonReport check_against_mc(const OperatorSpec& spec, const PolyRep& g,
                                  const MeasureVec& nu0, double T,
                                  const PathEnsemble& ensemble,
                                  const MomentSolverOptions& opts = {});

}  // namespace mvpd
