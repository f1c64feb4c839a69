#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "core/generator.hpp"
#include "core/measures.hpp"

namespace mvpd {

/// Spatial operator on E ⊆ R of Levy type,
///   A g = gamma g' + 1/2 sigma2 g'' + sum_l rate_l (g(.+xi_l) - g - chi(xi_l) g')
/// plus a killing/potential term kill(x) g(x), with chi the identity truncated
/// to [-1,1]. Jumps are given as finitely many (size, rate-function) pairs.
struct LevySpec {
    std::function<double(double)> gamma = [](double) { return 0.0; };
    std::function<double(double)> sigma2 = [](double) { return 0.0; };
    std::function<double(double)> kill = [](double) { return 0.0; };
    struct Jump {
        double size = 0;
        std::function<double(double)> rate;
    };
    std::vector<Jump> jumps;
};

/// Upwind/central discretization of a LevySpec on a uniform grid. The stencil
/// construction keeps off-diagonal entries non-negative; boundary rows drop
/// outflow terms (killing at the boundary).
Eigen::MatrixXd discretize_levy(const LevySpec& spec, const Grid& grid);

/// tau-flow positive group on [a,b]: generator tau(x) d/dx + h(x).
struct TauGroupSpec {
    std::function<double(double)> tau;
    std::function<double(double)> h = [](double) { return 0.0; };
    double a = 0;
    double b = 1;
};

struct TauReport {
    enum class Verdict { pass, fail, inconclusive };
    Verdict verdict = Verdict::inconclusive;
    double lipschitz_estimate = 0;
    bool endpoints_ok = true;
    std::string detail;
};

/// Admissibility of tau via the Lipschitz sufficient condition plus endpoint
/// vanishing at finite interval ends. The integral divergence criterion is
/// not decided numerically, so failure of the sufficient condition yields
/// "inconclusive" rather than "fail".
TauReport check_admissible_tau(const TauGroupSpec& spec, int samples = 10000);

struct GroupActionResult {
    std::vector<double> values;
    std::vector<uint8_t> in_range;   // 0 where the flow left the sampled grid
};

/// T_t g(x) = k_t(x) g(Phi_t(x)) with Phi the flow of tau (RK4 per node) and
/// k_t(x) = exp(int_0^t h(Phi_s(x)) ds) (Simpson along the flow). Values of g
/// off the sampled grid are linearly interpolated; nodes whose flow leaves
/// the grid are clamped and flagged.
GroupActionResult group_action(const TauGroupSpec& spec, const Grid& grid,
                               const std::vector<double>& g, double t, int flow_steps = 256);

/// Coefficient function from samples on a grid: piecewise linear between
/// nodes, clamped outside.
std::function<double(double)> coefficient_from_samples(Grid grid, std::vector<double> values);

/// Named coefficient families: "constant" (c0), "linear" (c0 + c1 x),
/// "quadratic" (c0 + c1 x + c2 x^2).
std::function<double(double)> named_coefficient(const std::string& name, double c0,
                                                double c1 = 0.0, double c2 = 0.0);

struct Preset {
    OperatorSpec spec;
    MeasureVec initial;
};

/// Named model presets on a uniform grid over [0,1]:
///   super_brownian      discretized Laplacian spatial motion, constant alpha
///   cir_field           diagonal mean reversion, Q2 = 0 (affine)
///   fisher_snedecor     alpha > 0 plus a coupled (beta,pi) quadratic part
///   black_scholes_field Q1 = 0, pi = 0, diffusion from loadings
Preset preset(const std::string& name, int nodes = 11);

}  // namespace mvpd
