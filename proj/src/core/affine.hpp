#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "core/generator.hpp"
#include "core/moments.hpp"

namespace mvpd {

/// True iff the quadratic part Q2 vanishes (beta == 0, pi == 0, no loadings).
/// Then L acts on exp(<g,.>) through F(g) = <g,b> and R(g) = B1 g + alpha g^2 / 2.
bool is_affine(const OperatorSpec& spec, double tol = 1e-15);

struct RiccatiOptions {
    int steps = 1000;
    int picard_iters = 50;
    double picard_tol = 1e-10;
    double blowup_norm = 1e8;
    double positivity_tol = 1e-12;
};

/// Trajectory of d/dt psi = B1 psi + alpha psi^2 / 2 together with the
/// integral phi_t = int_0^t <psi_s, b> ds. On a finite grid the weak solution
/// concept is pointwise-classical, which is what both solvers target. For
/// admissible specs and g <= 0 psi stays non-positive; a violation or a norm
/// explosion sets blowup and truncates the trajectory so it stays
/// inspectable.
struct RiccatiSolution {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> psi;
    std::vector<double> phi;
    bool blowup = false;
    double blowup_time = 0;
    std::string method = "rk4";

    const Eigen::VectorXd& psi_terminal() const { return psi.back(); }
    double phi_terminal() const { return phi.back(); }

    /// CSV rows: t, psi_1..psi_m, phi.
    void write_csv(std::ostream& os, int stride = 1) const;
};

RiccatiSolution solve_riccati(const OperatorSpec& spec, const Eigen::VectorXd& g, double T,
                              const RiccatiOptions& opts = {});

/// Picard iteration on the mild form psi_t = Q_t g + 1/2 int_0^t Q_{t-s}
/// (alpha psi_s^2) ds with Q the semigroup of B1 (matrix exponential).
RiccatiSolution solve_riccati_mild(const OperatorSpec& spec, const Eigen::VectorXd& g, double T,
                                   const RiccatiOptions& opts = {});

/// E[exp(<g, X_T>)] = exp(phi_T + <psi_T, nu0>), in (0, 1] for g <= 0.
double laplace(const OperatorSpec& spec, const Eigen::VectorXd& g, const MeasureVec& nu0,
               double T, const RiccatiOptions& opts = {});

struct PathEnsemble;

ComparisonReport laplace_vs_mc(const OperatorSpec& spec, const Eigen::VectorXd& g,
                               const MeasureVec& nu0, double T, const PathEnsemble& ensemble,
                               const RiccatiOptions& opts = {});

/// Raw integrator without the sign checks on g; solve_riccati wraps it.
RiccatiSolution integrate_riccati(const Eigen::MatrixXd& B1, const Eigen::VectorXd& alpha,
                                  const Eigen::VectorXd& b, const Eigen::VectorXd& g, double T,
                                  const RiccatiOptions& opts);

}  // namespace mvpd
