#include "core/affine.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "core/numeric.hpp"
#include "core/simulate.hpp"

namespace mvpd {

bool is_affine(const OperatorSpec& spec, double tol) {
    if (spec.beta.cwiseAbs().maxCoeff() > tol) return false;
    if (spec.pi.cwiseAbs().maxCoeff() > tol) return false;
    for (const auto& a : spec.loadings)
        if (a.cwiseAbs().maxCoeff() > tol) return false;
    return true;
}

namespace {

void check_affine_inputs(const OperatorSpec& spec, const Eigen::VectorXd& g) {
    if (!is_affine(spec)) throw std::domain_error("spec is not of affine type (Q2 != 0)");
    if (g.size() != spec.size()) throw std::invalid_argument("grid mismatch");
    for (Eigen::Index i = 0; i < g.size(); ++i)
        if (g(i) > 0) throw std::domain_error("initial coefficient has a positive component");
}

void accumulate_phi(RiccatiSolution& sol, const Eigen::VectorXd& b, double h) {
    std::vector<double> f(sol.psi.size());
    for (size_t i = 0; i < sol.psi.size(); ++i) f[i] = sol.psi[i].dot(b);
    sol.phi = cumulative_integral(f, h);
}

}  // namespace

RiccatiSolution integrate_riccati(const Eigen::MatrixXd& B1, const Eigen::VectorXd& alpha,
                                  const Eigen::VectorXd& b, const Eigen::VectorXd& g, double T,
                                  const RiccatiOptions& opts) {
    RiccatiSolution sol;
    sol.times.push_back(0.0);
    sol.psi.push_back(g);
    if (T == 0) {
        sol.phi.push_back(0.0);
        return sol;
    }
    double h = T / opts.steps;
    auto rhs = [&](const Eigen::VectorXd& psi) -> Eigen::VectorXd {
        return B1 * psi + 0.5 * alpha.cwiseProduct(psi.cwiseProduct(psi));
    };
    // Negativity can only be monitored when the data starts non-positive;
    // the raw entry point also serves sign-free diagnostics.
    bool watch_sign = g.maxCoeff() <= opts.positivity_tol;
    Eigen::VectorXd y = g;
    for (int n = 0; n < opts.steps; ++n) {
        Eigen::VectorXd k1 = rhs(y);
        Eigen::VectorXd k2 = rhs(y + 0.5 * h * k1);
        Eigen::VectorXd k3 = rhs(y + 0.5 * h * k2);
        Eigen::VectorXd k4 = rhs(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        double t = h * (n + 1);
        bool bad = !y.allFinite() || y.lpNorm<Eigen::Infinity>() > opts.blowup_norm ||
                   (watch_sign && y.maxCoeff() > opts.positivity_tol);
        if (bad) {
            sol.blowup = true;
            sol.blowup_time = t;
            break;
        }
        sol.times.push_back(t);
        sol.psi.push_back(y);
    }
    accumulate_phi(sol, b, h);
    return sol;
}

RiccatiSolution solve_riccati(const OperatorSpec& spec, const Eigen::VectorXd& g, double T,
                              const RiccatiOptions& opts) {
    check_affine_inputs(spec, g);
    if (T < 0) throw std::invalid_argument("negative horizon");
    return integrate_riccati(spec.B1, spec.alpha, spec.b, g, T, opts);
}

RiccatiSolution solve_riccati_mild(const OperatorSpec& spec, const Eigen::VectorXd& g, double T,
                                   const RiccatiOptions& opts) {
    check_affine_inputs(spec, g);
    if (T < 0) throw std::invalid_argument("negative horizon");
    int m = spec.size();
    int n = opts.steps;
    RiccatiSolution sol;
    sol.method = "picard-mild";
    double h = (T > 0) ? T / n : 0.0;

    // semigroup of B1 on the node grid
    std::vector<Eigen::MatrixXd> Q(static_cast<size_t>(n) + 1);
    Q[0] = Eigen::MatrixXd::Identity(m, m);
    if (T > 0) {
        Eigen::MatrixXd Qh = (h * spec.B1).exp();
        for (int j = 1; j <= n; ++j) Q[static_cast<size_t>(j)] = Q[static_cast<size_t>(j) - 1] * Qh;
    }

    std::vector<Eigen::VectorXd> psi(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) psi[static_cast<size_t>(i)] = Q[static_cast<size_t>(i)] * g;
    if (T == 0) {
        sol.times = {0.0};
        sol.psi = {g};
        sol.phi = {0.0};
        return sol;
    }

    // convolution quadrature weights per node; shared across iterations
    std::vector<std::vector<double>> weights(static_cast<size_t>(n) + 1);
    for (int i = 1; i <= n; ++i) weights[static_cast<size_t>(i)] = quadrature_weights(i);

    std::vector<Eigen::VectorXd> sq(static_cast<size_t>(n) + 1);
    std::vector<Eigen::VectorXd> next(static_cast<size_t>(n) + 1);
    bool converged = false;
    for (int it = 0; it < opts.picard_iters; ++it) {
        for (int j = 0; j <= n; ++j)
            sq[static_cast<size_t>(j)] =
                spec.alpha.cwiseProduct(psi[static_cast<size_t>(j)].cwiseProduct(psi[static_cast<size_t>(j)]));
        double diff = 0;
        next[0] = g;
        for (int i = 1; i <= n; ++i) {
            const std::vector<double>& w = weights[static_cast<size_t>(i)];
            Eigen::VectorXd conv = Eigen::VectorXd::Zero(m);
            for (int j = 0; j <= i; ++j) {
                if (w[static_cast<size_t>(j)] == 0.0) continue;
                conv.noalias() += w[static_cast<size_t>(j)] * (Q[static_cast<size_t>(i - j)] * sq[static_cast<size_t>(j)]);
            }
            next[static_cast<size_t>(i)] = Q[static_cast<size_t>(i)] * g + 0.5 * h * conv;
            diff = std::max(diff, (next[static_cast<size_t>(i)] - psi[static_cast<size_t>(i)]).lpNorm<Eigen::Infinity>());
        }
        psi.swap(next);
        if (diff <= opts.picard_tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw std::runtime_error("mild-form Picard iteration did not converge");

    sol.times.resize(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) sol.times[static_cast<size_t>(i)] = h * i;
    sol.psi = std::move(psi);
    for (const auto& v : sol.psi)
        if (!v.allFinite() || v.lpNorm<Eigen::Infinity>() > opts.blowup_norm) sol.blowup = true;
    accumulate_phi(sol, spec.b, h);
    return sol;
}

double laplace(const OperatorSpec& spec, const Eigen::VectorXd& g, const MeasureVec& nu0,
               double T, const RiccatiOptions& opts) {
    if (nu0.size() != spec.size()) throw std::invalid_argument("grid mismatch");
    RiccatiSolution sol = solve_riccati(spec, g, T, opts);
    if (sol.blowup) throw std::runtime_error("finite-time explosion (numerical)");
    Eigen::Map<const Eigen::VectorXd> c(nu0.weights().data(), nu0.size());
    return std::exp(sol.phi_terminal() + sol.psi_terminal().dot(c));
}

ComparisonReport laplace_vs_mc(const OperatorSpec& spec, const Eigen::VectorXd& g,
                               const MeasureVec& nu0, double T, const PathEnsemble& ensemble,
                               const RiccatiOptions& opts) {
    ComparisonReport rep;
    rep.engine_value = laplace(spec, g, nu0, T, opts);
    auto [mean, se] = estimate_exp_pairing(ensemble, g);
    rep.mc_mean = mean;
    rep.mc_se = se;
    rep.z = (se > 0) ? (mean - rep.engine_value) / se : 0.0;
    return rep;
}

void RiccatiSolution::write_csv(std::ostream& os, int stride) const {
    os << "t";
    Eigen::Index m = psi.empty() ? 0 : psi.front().size();
    for (Eigen::Index i = 0; i < m; ++i) os << ",psi_" << i + 1;
    os << ",phi\n";
    for (size_t n = 0; n < times.size(); ++n) {
        if (stride > 1 && n % static_cast<size_t>(stride) != 0 && n + 1 != times.size()) continue;
        os << times[n];
        for (Eigen::Index i = 0; i < m; ++i) os << "," << psi[n](i);
        os << "," << phi[n] << "\n";
    }
}

}  // namespace mvpd
