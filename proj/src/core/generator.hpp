#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "core/measures.hpp"

namespace mvpd {

/// Parameters of the generator
///   Lf(nu) = B0(df) + <B1(df), nu> + 1/2 (<Q1(d2f), nu> + <Q2(d2f), nu^2>)
/// with B0(g) = <g,b>, (B1 g)(i) = sum_j B1(i,j) g(j), Q1(g)(i) = alpha_i g(i,i)
/// and Q2(g)(i,j) = 1/2 (pi(i,j) g(i,i) + pi(j,i) g(j,j))
///                  + (beta(i,j) + sum_k a_k(i) a_k(j)) g(i,j).
/// The loadings a_k are the diagonal positive-group generators; on a finite
/// grid every such generator is diagonal.
struct OperatorSpec {
    Grid grid;
    Eigen::VectorXd b;                      // immigration measure, mass/time
    Eigen::MatrixXd B1;                     // spatial/drift operator on functions
    Eigen::VectorXd alpha;                  // Q1 diagonal coefficient
    Eigen::MatrixXd beta;                   // symmetric part of the Q2 kernel
    Eigen::MatrixXd pi;                     // non-negative, zero-diagonal part
    std::vector<Eigen::VectorXd> loadings;  // a_k, diagonal group generators

    explicit OperatorSpec(Grid g);
    static OperatorSpec zero(Grid g);

    int size() const { return grid.size(); }
    void check_shapes() const;

    /// beta + sum_k a_k a_k^T (the kernel multiplying g(i,j) in Q2).
    Eigen::MatrixXd q2_kernel() const;
};

struct ConditionCheck {
    std::string name;
    bool passed = true;
    std::string witness;   // empty when passed
};

struct ValidationReport {
    bool accepted = false;
    std::vector<ConditionCheck> conditions;

    const ConditionCheck* find(const std::string& name) const;
    std::string to_json() const;
};

struct ValidateOptions {
    int psd_samples = 256;           // random weight vectors for the necessary check
    uint64_t seed = 0x5eed5eed5eedULL;
    double tol = 1e-10;              // eigenvalue tolerance, relative to matrix scale
};

/// Admissibility of an OperatorSpec: non-negative immigration, positive
/// minimum principle for B1, non-negative alpha, the structural (beta,pi)
/// conditions, and the family of PSD conditions
///   beta + Diag(pi c) Diag(c)^{-1} >= 0  for all c > 0,
/// checked via the sufficient certificate (beta PSD) or, failing that, a
/// randomized necessary check over log-uniform samples of c.
ValidationReport validate(const OperatorSpec& spec, const ValidateOptions& opts = {});

/// Lp(nu) for a polynomial p. Requires deg(p) <= degree_cap.
double apply_generator(const OperatorSpec& spec, const PolyRep& p, const MeasureVec& nu,
                       int degree_cap = kDefaultDegreeCap);

/// Same formula evaluated from a raw gradient/Hessian pair; shared with the
/// cylindrical-function probe.
double apply_generator_raw(const OperatorSpec& spec, const Eigen::VectorXd& grad,
                           const Eigen::MatrixXd& hess, const Eigen::VectorXd& c);

/// The dual operator on coefficient vectors: poly_eval(apply_dual(p), nu)
/// equals apply_generator(p, nu) for every nu, and the degree never grows.
PolyRep apply_dual(const OperatorSpec& spec, const PolyRep& p,
                   int degree_cap = kDefaultDegreeCap);

/// Gamma(p,q) = L(pq) - p Lq - q Lp evaluated at nu.
double carre_du_champ(const OperatorSpec& spec, const PolyRep& p, const PolyRep& q,
                      const MeasureVec& nu, int degree_cap = kDefaultDegreeCap);

/// Drift b + B1^T c of the weight-vector diffusion equivalent to the spec.
Eigen::VectorXd sde_drift(const OperatorSpec& spec, const Eigen::VectorXd& c);

/// Diffusion matrix a(c) obtained by matching the second-order part of L:
///   a_ii = alpha_i c_i + c_i (pi c)_i + K_ii c_i^2,
///   a_ij = K_ij c_i c_j (i != j),        K = beta + sum_k a_k a_k^T.
Eigen::MatrixXd sde_diffusion(const OperatorSpec& spec, const Eigen::VectorXd& c);

}  // namespace mvpd
