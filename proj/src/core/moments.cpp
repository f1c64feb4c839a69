#include "core/moments.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "core/simulate.hpp"

namespace mvpd {

namespace {

bool poly_finite(const PolyRep& p) {
    for (int k = 0; k <= p.max_stored_degree(); ++k) {
        const SymCoeff* t = p.term(k);
        if (!t) continue;
        for (double v : t->values())
            if (!std::isfinite(v)) return false;
    }
    return true;
}

void rk4_step(const OperatorSpec& spec, PolyRep& y, double h, int degree_cap) {
    PolyRep k1 = apply_dual(spec, y, degree_cap);
    PolyRep y2 = y;
    y2.axpy(0.5 * h, k1);
    PolyRep k2 = apply_dual(spec, y2, degree_cap);
    PolyRep y3 = y;
    y3.axpy(0.5 * h, k2);
    PolyRep k3 = apply_dual(spec, y3, degree_cap);
    PolyRep y4 = y;
    y4.axpy(h, k3);
    PolyRep k4 = apply_dual(spec, y4, degree_cap);
    y.axpy(h / 6.0, k1);
    y.axpy(h / 3.0, k2);
    y.axpy(h / 3.0, k3);
    y.axpy(h / 6.0, k4);
    if (!poly_finite(y))
        throw std::runtime_error(
            "non-finite coefficients during moment integration (stiff spec; reduce step)");
}

}  // namespace

MomentSolution solve_moment_ode(const OperatorSpec& spec, const PolyRep& g, double T,
                                const MomentSolverOptions& opts) {
    if (T < 0) throw std::invalid_argument("negative horizon");
    if (g.degree() > opts.degree_cap) throw std::domain_error("polynomial degree exceeds cap");
    if (opts.steps < 1) throw std::invalid_argument("need at least one step");

    MomentSolution sol;
    sol.step = (T > 0) ? T / opts.steps : 0.0;
    sol.times.push_back(0.0);
    sol.coeffs.push_back(g);
    if (T == 0) return sol;

    double h = sol.step;
    PolyRep y = g;
    for (int n = 0; n < opts.steps; ++n) {
        rk4_step(spec, y, h, opts.degree_cap);
        if (opts.store_trajectory || n == opts.steps - 1) {
            sol.times.push_back(h * (n + 1));
            sol.coeffs.push_back(y);
        }
    }
    return sol;
}

double moment(const OperatorSpec& spec, const PolyRep& g, const MeasureVec& nu0, double T,
              const MomentSolverOptions& opts) {
    MomentSolverOptions o = opts;
    o.store_trajectory = false;
    MomentSolution sol = solve_moment_ode(spec, g, T, o);
    return poly_eval(sol.terminal(), nu0);
}

std::vector<double> moment_surface(const OperatorSpec& spec, const PolyRep& g,
                                   const MeasureVec& nu0, const std::vector<double>& times,
                                   const MomentSolverOptions& opts) {
    if (times.empty()) return {};
    double tmax = *std::max_element(times.begin(), times.end());
    for (double t : times)
        if (t < 0) throw std::invalid_argument("negative time in surface");
    if (tmax == 0) return std::vector<double>(times.size(), poly_eval(g, nu0));

    // single integration, evaluating at each node as it passes; only node
    // values are kept, never the coefficient trajectory
    double h = tmax / opts.steps;
    std::vector<double> node_vals(static_cast<size_t>(opts.steps) + 1);
    PolyRep y = g;
    node_vals[0] = poly_eval(y, nu0);
    for (int n = 0; n < opts.steps; ++n) {
        rk4_step(spec, y, h, opts.degree_cap);
        node_vals[static_cast<size_t>(n) + 1] = poly_eval(y, nu0);
    }

    std::vector<double> out(times.size());
    for (size_t q = 0; q < times.size(); ++q) {
        double pos = times[q] / h;
        size_t lo = static_cast<size_t>(
            std::min<double>(std::floor(pos), static_cast<double>(node_vals.size() - 1)));
        size_t hi = std::min(lo + 1, node_vals.size() - 1);
        double w = (hi > lo) ? pos - static_cast<double>(lo) : 0.0;
        out[q] = (1.0 - w) * node_vals[lo] + w * node_vals[hi];
    }
    return out;
}

void MomentSolution::write_csv(std::ostream& os, int stride) const {
    os << "t,degree,multi_index,value\n";
    if (coeffs.empty()) return;
    int m = coeffs.front().grid_size();
    for (size_t n = 0; n < times.size(); ++n) {
        if (stride > 1 && n % static_cast<size_t>(stride) != 0 && n + 1 != times.size()) continue;
        const PolyRep& p = coeffs[n];
        for (int k = 0; k <= p.max_stored_degree(); ++k) {
            const SymCoeff* term = p.term(k);
            if (!term) continue;
            for (const auto& idx : canonical_indices(m, k)) {
                double v = (k == 0) ? term->values()[0] : term->value_at(idx);
                os << times[n] << "," << k << ",\"";
                for (size_t i = 0; i < idx.size(); ++i) os << (i ? " " : "") << idx[i] + 1;
                os << "\"," << v << "\n";
            }
        }
    }
}

Eigen::MatrixXd dual_matrix(const OperatorSpec& spec, int max_degree) {
    int m = spec.size();
    size_t dim = 0;
    std::vector<size_t> offset(static_cast<size_t>(max_degree) + 1);
    size_t block = 1;
    for (int k = 0; k <= max_degree; ++k) {
        offset[static_cast<size_t>(k)] = dim;
        dim += block;
        block *= static_cast<size_t>(m);
    }
    if (dim > 2000) throw std::domain_error("dense dual matrix limited to dimension 2000");

    auto flatten = [&](const PolyRep& p, Eigen::VectorXd& v) {
        v.setZero(static_cast<Eigen::Index>(dim));
        for (int k = 0; k <= std::min(max_degree, p.max_stored_degree()); ++k) {
            const SymCoeff* t = p.term(k);
            if (!t) continue;
            for (size_t i = 0; i < t->flat_size(); ++i)
                v(static_cast<Eigen::Index>(offset[static_cast<size_t>(k)] + i)) = t->values()[i];
        }
    };

    Eigen::MatrixXd mat(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    Eigen::VectorXd col;
    size_t j = 0;
    for (int k = 0; k <= max_degree; ++k) {
        size_t block_k = 1;
        for (int i = 0; i < k; ++i) block_k *= static_cast<size_t>(m);
        for (size_t e = 0; e < block_k; ++e, ++j) {
            std::vector<double> vals(block_k, 0.0);
            vals[e] = 1.0;
            PolyRep basis = PolyRep::monomial(SymCoeff(m, k, std::move(vals)));
            flatten(apply_dual(spec, basis, max_degree), col);
            mat.col(static_cast<Eigen::Index>(j)) = col;
        }
    }
    return mat;
}

double moment_via_expm(const OperatorSpec& spec, const PolyRep& g, const MeasureVec& nu0,
                       double T) {
    int m = spec.size();
    int deg = std::max(0, g.degree());
    Eigen::MatrixXd L = dual_matrix(spec, deg);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(L.rows());
    size_t off = 0;
    for (int k = 0; k <= deg; ++k) {
        const SymCoeff* t = g.term(k);
        size_t block = 1;
        for (int i = 0; i < k; ++i) block *= static_cast<size_t>(m);
        if (t)
            for (size_t i = 0; i < block; ++i)
                v(static_cast<Eigen::Index>(off + i)) = t->values()[i];
        off += block;
    }
    Eigen::MatrixXd E = (T * L).exp();
    Eigen::VectorXd gt = E * v;
    PolyRep out(m);
    off = 0;
    for (int k = 0; k <= deg; ++k) {
        size_t block = 1;
        for (int i = 0; i < k; ++i) block *= static_cast<size_t>(m);
        std::vector<double> vals(block);
        for (size_t i = 0; i < block; ++i) vals[i] = gt(static_cast<Eigen::Index>(off + i));
        out.add_term(SymCoeff(m, k, std::move(vals)));
        off += block;
    }
    return poly_eval(out, nu0);
}

ComparisonReport check_against_mc(const OperatorSpec& spec, const PolyRep& g,
                                  const MeasureVec& nu0, double T, const PathEnsemble& ensemble,
                                  const MomentSolverOptions& opts) {
    ComparisonReport rep;
    rep.engine_value = moment(spec, g, nu0, T, opts);
    auto [mean, se] = estimate(ensemble, g);
    rep.mc_mean = mean;
    rep.mc_se = se;
    rep.z = (se > 0) ? (mean - rep.engine_value) / se : 0.0;
    return rep;
}

}  // namespace mvpd
