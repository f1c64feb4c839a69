#include "core/probe.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <sstream>

namespace mvpd {

namespace {

// q, grad q, hess q for the outer polynomial at y.
void poly_derivatives(const std::vector<ProbeFunction::Monomial>& mono, const Eigen::VectorXd& y,
                      double& q, Eigen::VectorXd& dq, Eigen::MatrixXd& d2q) {
    int r = static_cast<int>(y.size());
    q = 0;
    dq.setZero(r);
    d2q.setZero(r, r);
    std::vector<double> pw(static_cast<size_t>(r));
    for (const auto& mn : mono) {
        double base = mn.coef;
        for (int i = 0; i < r; ++i) {
            pw[static_cast<size_t>(i)] = std::pow(y(i), mn.expo[static_cast<size_t>(i)]);
            base *= pw[static_cast<size_t>(i)];
        }
        q += base;
        for (int i = 0; i < r; ++i) {
            int ei = mn.expo[static_cast<size_t>(i)];
            if (ei == 0) continue;
            double di = mn.coef * ei * std::pow(y(i), ei - 1);
            for (int k = 0; k < r; ++k)
                if (k != i) di *= pw[static_cast<size_t>(k)];
            dq(i) += di;
            // diagonal second derivative
            if (ei >= 2) {
                double dii = mn.coef * ei * (ei - 1) * std::pow(y(i), ei - 2);
                for (int k = 0; k < r; ++k)
                    if (k != i) dii *= pw[static_cast<size_t>(k)];
                d2q(i, i) += dii;
            }
            for (int j = i + 1; j < r; ++j) {
                int ej = mn.expo[static_cast<size_t>(j)];
                if (ej == 0) continue;
                double dij = mn.coef * ei * ej * std::pow(y(i), ei - 1) * std::pow(y(j), ej - 1);
                for (int k = 0; k < r; ++k)
                    if (k != i && k != j) dij *= pw[static_cast<size_t>(k)];
                d2q(i, j) += dij;
                d2q(j, i) += dij;
            }
        }
    }
}

struct PhiDerivs {
    double phi;
    Eigen::VectorXd dphi;
    Eigen::MatrixXd d2phi;
};

PhiDerivs outer_derivatives(const ProbeFunction& f, const Eigen::VectorXd& y) {
    int r = static_cast<int>(y.size());
    double q;
    Eigen::VectorXd dq;
    Eigen::MatrixXd d2q;
    poly_derivatives(f.outer, y, q, dq, d2q);
    PhiDerivs out;
    if (!f.gaussian) {
        out.phi = q;
        out.dphi = dq;
        out.d2phi = d2q;
        return out;
    }
    double g = std::exp(-y.squaredNorm());
    out.phi = q * g;
    out.dphi = (dq - 2.0 * y * q) * g;
    out.d2phi.setZero(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            double v = d2q(i, j) - 2.0 * y(i) * dq(j) - 2.0 * y(j) * dq(i) + 4.0 * y(i) * y(j) * q;
            if (i == j) v -= 2.0 * q;
            out.d2phi(i, j) = v * g;
        }
    return out;
}

Eigen::VectorXd inner_values(const ProbeFunction& f, const Eigen::VectorXd& c) {
    Eigen::VectorXd y(f.rank());
    for (int i = 0; i < f.rank(); ++i) y(i) = f.inner[static_cast<size_t>(i)].dot(c);
    return y;
}

}  // namespace

double ProbeFunction::value(const Eigen::VectorXd& c) const {
    return outer_derivatives(*this, inner_values(*this, c)).phi;
}

Eigen::VectorXd ProbeFunction::gradient(const Eigen::VectorXd& c) const {
    PhiDerivs d = outer_derivatives(*this, inner_values(*this, c));
    Eigen::VectorXd g = Eigen::VectorXd::Zero(grid_size());
    for (int i = 0; i < rank(); ++i) g += d.dphi(i) * inner[static_cast<size_t>(i)];
    return g;
}

Eigen::MatrixXd ProbeFunction::hessian(const Eigen::VectorXd& c) const {
    PhiDerivs d = outer_derivatives(*this, inner_values(*this, c));
    int m = grid_size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < rank(); ++i)
        for (int j = 0; j < rank(); ++j)
            h += d.d2phi(i, j) * inner[static_cast<size_t>(i)] * inner[static_cast<size_t>(j)].transpose();
    return h;
}

ProbeFunction ProbeFunction::constant(int grid_size, double v) {
    ProbeFunction f;
    f.inner.push_back(Eigen::VectorXd::Zero(grid_size));
    f.outer.push_back({v, {0}});
    f.gaussian = false;
    return f;
}

ProbeFunction ProbeFunction::linear(const Eigen::VectorXd& g) {
    ProbeFunction f;
    f.inner.push_back(g);
    f.outer.push_back({1.0, {1}});
    f.gaussian = false;
    return f;
}

ProbeFunction ProbeFunction::random(int grid_size, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> rank_d(1, 3);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(0, 2);
    ProbeFunction f;
    int r = rank_d(rng);
    for (int i = 0; i < r; ++i) {
        Eigen::VectorXd g(grid_size);
        for (int j = 0; j < grid_size; ++j) g(j) = coef(rng);
        f.inner.push_back(g);
    }
    int n_mono = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int k = 0; k < n_mono; ++k) {
        ProbeFunction::Monomial mn;
        mn.coef = coef(rng);
        mn.expo.resize(static_cast<size_t>(r));
        for (int i = 0; i < r; ++i) mn.expo[static_cast<size_t>(i)] = expo(rng);
        f.outer.push_back(mn);
    }
    f.gaussian = true;
    return f;
}

std::string ProbeReport::to_json() const {
    std::ostringstream os;
    os << "{\"converged\":" << (converged ? "true" : "false")
       << ",\"max_value\":" << max_value
       << ",\"worst_gradient\":" << worst_gradient
       << ",\"worst_active_gradient\":" << worst_active_gradient
       << ",\"hessian_top_eig\":" << hessian_top_eig
       << ",\"generator_value\":" << generator_value
       << ",\"first_order_ok\":" << (first_order_ok ? "true" : "false")
       << ",\"second_order_ok\":" << (second_order_ok ? "true" : "false")
       << ",\"generator_ok\":" << (generator_ok ? "true" : "false") << "}";
    return os.str();
}

namespace {

// Projected gradient ascent over the non-negative orthant: Barzilai-Borwein
// steps with monotone backtracking, then a projected-Newton polish on the
// free coordinate set.
struct AscentResult {
    Eigen::VectorXd c;
    double value;
    bool converged;
};

double projected_gradient_norm(const Eigen::VectorXd& c, const Eigen::VectorXd& g) {
    double pg = 0;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        pg = std::max(pg, (c(i) > 0) ? std::abs(g(i)) : std::max(g(i), 0.0));
    return pg;
}

AscentResult ascend(const ProbeFunction& f, Eigen::VectorXd c, int max_iters) {
    c = c.cwiseMax(0.0);
    double fc = f.value(c);
    Eigen::VectorXd g = f.gradient(c);
    double step = 1.0;
    bool converged = false;
    auto grad_tol = [&fc] { return 1e-12 * std::max(1.0, std::abs(fc)); };

    for (int it = 0; it < max_iters; ++it) {
        if (projected_gradient_norm(c, g) <= grad_tol()) {
            converged = true;
            break;
        }
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            Eigen::VectorXd cand = (c + step * g).cwiseMax(0.0);
            double fcand = f.value(cand);
            if (fcand >= fc + 1e-4 * g.dot(cand - c) && cand != c) {
                Eigen::VectorXd gnew = f.gradient(cand);
                Eigen::VectorXd s = cand - c;
                Eigen::VectorXd y = gnew - g;
                double sty = s.dot(y);
                // BB step for the next iteration (y points downhill near a max)
                step = (sty < 0) ? s.squaredNorm() / (-sty) : step * 2.0;
                step = std::clamp(step, 1e-12, 1e12);
                c = cand;
                fc = fcand;
                g = gnew;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            converged = true;   // no ascent at machine precision
            break;
        }
    }

    // Newton polish restricted to coordinates that are free at the solution
    for (int polish = 0; polish < 40; ++polish) {
        g = f.gradient(c);
        if (projected_gradient_norm(c, g) <= grad_tol()) {
            converged = true;
            break;
        }
        std::vector<int> free_set;
        for (Eigen::Index i = 0; i < c.size(); ++i)
            if (c(i) > 0 || g(i) > 0) free_set.push_back(static_cast<int>(i));
        if (free_set.empty()) {
            converged = true;
            break;
        }
        Eigen::MatrixXd h = f.hessian(c);
        Eigen::Index nf = static_cast<Eigen::Index>(free_set.size());
        Eigen::MatrixXd hf(nf, nf);
        Eigen::VectorXd gf(nf);
        for (Eigen::Index i = 0; i < nf; ++i) {
            gf(i) = g(free_set[static_cast<size_t>(i)]);
            for (Eigen::Index j = 0; j < nf; ++j)
                hf(i, j) = h(free_set[static_cast<size_t>(i)], free_set[static_cast<size_t>(j)]);
        }
        Eigen::VectorXd df = -hf.ldlt().solve(gf);
        if (!df.allFinite() || df.dot(gf) <= 0) df = gf;   // fall back to gradient
        Eigen::VectorXd d = Eigen::VectorXd::Zero(c.size());
        for (Eigen::Index i = 0; i < nf; ++i) d(free_set[static_cast<size_t>(i)]) = df(i);
        double t = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 40; ++bt) {
            Eigen::VectorXd cand = (c + t * d).cwiseMax(0.0);
            double fcand = f.value(cand);
            if (fcand > fc && cand != c) {
                c = cand;
                fc = fcand;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    return {c, fc, converged};
}

}  // namespace

ProbeReport pmp_probe(const OperatorSpec& spec, const ProbeFunction& f, const ProbeOptions& opts) {
    int m = spec.size();
    if (f.grid_size() != m) throw std::invalid_argument("grid mismatch");

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double lo_scale = 1e-2;

    AscentResult best{Eigen::VectorXd::Zero(m), f.value(Eigen::VectorXd::Zero(m)), true};
    for (int r = 0; r < opts.restarts; ++r) {
        Eigen::VectorXd c0(m);
        // log-spaced start scales inside [0, start_hi]^m
        double scale = lo_scale * std::pow(opts.start_hi / lo_scale, unif(rng));
        for (int i = 0; i < m; ++i) c0(i) = scale * unif(rng);
        AscentResult res = ascend(f, c0, opts.max_iters);
        if (res.value > best.value || (res.value == best.value && res.converged && !best.converged))
            best = res;
    }

    ProbeReport rep;
    rep.converged = best.converged;
    rep.max_value = best.value;
    rep.maximizer = best.c;

    Eigen::VectorXd grad = f.gradient(best.c);
    Eigen::MatrixXd hess = f.hessian(best.c);
    double fscale = std::max(1.0, std::abs(best.value));

    rep.worst_gradient = grad.maxCoeff();
    rep.worst_active_gradient = 0;
    std::vector<int> active;
    for (int i = 0; i < m; ++i) {
        if (best.c(i) > opts.tol) {
            active.push_back(i);
            rep.worst_active_gradient = std::max(rep.worst_active_gradient, std::abs(grad(i)));
        }
    }
    rep.first_order_ok = rep.worst_gradient <= opts.tol * fscale &&
                         rep.worst_active_gradient <= opts.tol * fscale;

    if (active.empty()) {
        rep.hessian_top_eig = 0;
        rep.second_order_ok = true;
    } else {
        Eigen::MatrixXd sub(active.size(), active.size());
        for (size_t i = 0; i < active.size(); ++i)
            for (size_t j = 0; j < active.size(); ++j)
                sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    hess(active[i], active[j]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
        rep.hessian_top_eig = es.eigenvalues().maxCoeff();
        rep.second_order_ok = rep.hessian_top_eig <= opts.tol * std::max(1.0, hess.cwiseAbs().maxCoeff());
    }

    rep.generator_value = apply_generator_raw(spec, grad, hess, best.c);
    rep.generator_ok = rep.generator_value <= opts.tol * fscale;
    return rep;
}

}  // namespace mvpd
