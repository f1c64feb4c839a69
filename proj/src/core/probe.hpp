#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "core/generator.hpp"

namespace mvpd {

/// Cylindrical probe f(nu) = phi(<g_1,nu>, ..., <g_r,nu>) with outer map
/// phi(y) = q(y) * exp(-|y|^2) for a small polynomial q (the Gaussian factor
/// can be dropped for probes whose maximum exists anyway, e.g. decreasing
/// linear ones).
struct ProbeFunction {
    struct Monomial {
        double coef = 0;
        std::vector<int> expo;   // one exponent per inner coefficient
    };

    std::vector<Eigen::VectorXd> inner;   // g_1..g_r sampled on the grid
    std::vector<Monomial> outer;
    bool gaussian = true;

    int rank() const { return static_cast<int>(inner.size()); }
    int grid_size() const { return inner.empty() ? 0 : static_cast<int>(inner[0].size()); }

    double value(const Eigen::VectorXd& c) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& c) const;
    Eigen::MatrixXd hessian(const Eigen::VectorXd& c) const;

    static ProbeFunction constant(int grid_size, double v);
    static ProbeFunction linear(const Eigen::VectorXd& g);   // f = <g, nu>, no Gaussian
    static ProbeFunction random(int grid_size, uint64_t seed);
};

struct ProbeOptions {
    int restarts = 20;
    int max_iters = 2000;
    double tol = 1e-6;         // tolerance of the optimality/PMP checks
    double start_hi = 100.0;   // starts are drawn inside [0, start_hi]^m
    uint64_t seed = 12345;
};

struct ProbeReport {
    bool converged = false;
    double max_value = 0;
    Eigen::VectorXd maximizer;
    double worst_gradient = 0;          // max_i df_i at the maximizer (<= tol required)
    double worst_active_gradient = 0;   // max_i |df_i| over active coordinates
    double hessian_top_eig = 0;         // largest eigenvalue of the restricted Hessian
    double generator_value = 0;         // Lf at the maximizer
    bool first_order_ok = false;
    bool second_order_ok = false;
    bool generator_ok = false;

    bool ok() const { return first_order_ok && second_order_ok && generator_ok; }
    std::string to_json() const;
};

/// Numerically maximizes f over the non-negative orthant (projected gradient
/// ascent, multi-start) and checks the first/second order optimality
/// conditions plus Lf <= tol at the located maximizer.
ProbeReport pmp_probe(const OperatorSpec& spec, const ProbeFunction& f,
                      const ProbeOptions& opts = {});

}  // namespace mvpd
