#include "core/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "core/numeric.hpp"

namespace mvpd {

Eigen::MatrixXd discretize_levy(const LevySpec& spec, const Grid& grid) {
    int m = grid.size();
    if (m < 2) throw std::invalid_argument("levy discretization needs at least two nodes");
    double h = grid.spacing();   // throws on non-uniform grids
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
    auto chi = [](double s) { return std::clamp(s, -1.0, 1.0); };

    for (int i = 0; i < m; ++i) {
        double x = grid.point(i);
        double drift = spec.gamma(x);
        for (const auto& jmp : spec.jumps) {
            double r = jmp.rate(x);
            if (r < 0) throw std::invalid_argument("negative jump rate");
            drift -= r * chi(jmp.size);
        }
        if (drift > 0) {
            B(i, i) -= drift / h;
            if (i + 1 < m) B(i, i + 1) += drift / h;
        } else if (drift < 0) {
            B(i, i) += drift / h;
            if (i - 1 >= 0) B(i, i - 1) -= drift / h;
        }

        double s2 = spec.sigma2(x);
        if (s2 < 0) throw std::invalid_argument("negative sigma2");
        double cdiff = s2 / (2.0 * h * h);
        B(i, i) -= 2.0 * cdiff;
        if (i + 1 < m) B(i, i + 1) += cdiff;
        if (i - 1 >= 0) B(i, i - 1) += cdiff;

        for (const auto& jmp : spec.jumps) {
            double r = jmp.rate(x);
            if (r == 0) continue;
            double target = x + jmp.size;
            long idx = std::lround((target - grid.point(0)) / h);
            B(i, i) -= r;
            if (idx >= 0 && idx < m) B(i, static_cast<int>(idx)) += r;
        }

        B(i, i) += spec.kill(x);
    }
    return B;
}

TauReport check_admissible_tau(const TauGroupSpec& spec, int samples) {
    TauReport rep;
    bool a_finite = std::isfinite(spec.a);
    bool b_finite = std::isfinite(spec.b);
    double lo = a_finite ? spec.a : -100.0;
    double hi = b_finite ? spec.b : 100.0;
    if (!(hi > lo)) throw std::invalid_argument("empty interval");

    double tol = 1e-9 * std::max(1.0, std::abs(spec.tau(0.5 * (lo + hi))));
    rep.endpoints_ok = true;
    if (a_finite && std::abs(spec.tau(spec.a)) > tol) {
        rep.endpoints_ok = false;
        rep.detail = "tau does not vanish at the left endpoint";
    }
    if (b_finite && std::abs(spec.tau(spec.b)) > tol) {
        rep.endpoints_ok = false;
        rep.detail = "tau does not vanish at the right endpoint";
    }

    double step = (hi - lo) / samples;
    double lip = 0;
    double prev = spec.tau(lo);
    for (int i = 1; i <= samples; ++i) {
        double cur = spec.tau(lo + step * i);
        lip = std::max(lip, std::abs(cur - prev) / step);
        prev = cur;
    }
    rep.lipschitz_estimate = lip;

    if (!rep.endpoints_ok) {
        rep.verdict = TauReport::Verdict::fail;
    } else if (std::isfinite(lip) && lip < 1e6) {
        rep.verdict = TauReport::Verdict::pass;
        rep.detail = "Lipschitz sufficient condition";
    } else {
        rep.verdict = TauReport::Verdict::inconclusive;
        rep.detail = "Lipschitz estimate too large; integral criterion not decided numerically";
    }
    return rep;
}

GroupActionResult group_action(const TauGroupSpec& spec, const Grid& grid,
                               const std::vector<double>& g, double t, int flow_steps) {
    int m = grid.size();
    if (static_cast<int>(g.size()) != m) throw std::invalid_argument("grid mismatch");
    if (flow_steps < 1) throw std::invalid_argument("need at least one flow step");
    double lo = grid.point(0), hi = grid.point(m - 1);
    double domain_tol = 1e-9 * std::max(1.0, hi - lo);

    GroupActionResult out;
    out.values.resize(static_cast<size_t>(m));
    out.in_range.assign(static_cast<size_t>(m), 1);

    auto interp = [&](double x) {
        if (x <= lo) return g.front();
        if (x >= hi) return g.back();
        int j = 1;
        while (grid.point(j) < x) ++j;
        double x0 = grid.point(j - 1), x1 = grid.point(j);
        double w = (x - x0) / (x1 - x0);
        return (1.0 - w) * g[static_cast<size_t>(j - 1)] + w * g[static_cast<size_t>(j)];
    };

    double hstep = t / flow_steps;
    std::vector<double> hvals(static_cast<size_t>(flow_steps) + 1);
    for (int i = 0; i < m; ++i) {
        double x = grid.point(i);
        hvals[0] = spec.h(x);
        bool inside = true;
        for (int s = 0; s < flow_steps; ++s) {
            double k1 = spec.tau(x);
            double k2 = spec.tau(x + 0.5 * hstep * k1);
            double k3 = spec.tau(x + 0.5 * hstep * k2);
            double k4 = spec.tau(x + hstep * k3);
            x += hstep / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (x < spec.a - domain_tol || x > spec.b + domain_tol)
                throw std::runtime_error("flow left the interval (tau not admissible in practice)");
            if (x < lo - domain_tol || x > hi + domain_tol) inside = false;
            hvals[static_cast<size_t>(s) + 1] = spec.h(x);
        }
        double integral = (t == 0) ? 0.0 : cumulative_integral(hvals, hstep).back();
        out.values[static_cast<size_t>(i)] = std::exp(integral) * interp(x);
        out.in_range[static_cast<size_t>(i)] = inside ? 1 : 0;
    }
    return out;
}

std::function<double(double)> coefficient_from_samples(Grid grid, std::vector<double> values) {
    if (static_cast<int>(values.size()) != grid.size())
        throw std::invalid_argument("sample count does not match grid");
    return [grid = std::move(grid), values = std::move(values)](double x) {
        int m = grid.size();
        if (x <= grid.point(0)) return values.front();
        if (x >= grid.point(m - 1)) return values.back();
        int j = 1;
        while (grid.point(j) < x) ++j;
        double x0 = grid.point(j - 1), x1 = grid.point(j);
        double w = (x - x0) / (x1 - x0);
        return (1.0 - w) * values[static_cast<size_t>(j - 1)] + w * values[static_cast<size_t>(j)];
    };
}

std::function<double(double)> named_coefficient(const std::string& name, double c0, double c1,
                                                double c2) {
    if (name == "constant") return [c0](double) { return c0; };
    if (name == "linear") return [c0, c1](double x) { return c0 + c1 * x; };
    if (name == "quadratic") return [c0, c1, c2](double x) { return c0 + c1 * x + c2 * x * x; };
    throw std::invalid_argument("unknown coefficient family: " + name);
}

Preset preset(const std::string& name, int nodes) {
    if (nodes < 1) throw std::invalid_argument("preset needs at least one node");
    Grid grid = Grid::uniform(0.0, 1.0, nodes);
    int m = nodes;
    double h = (nodes > 1) ? grid.spacing() : 1.0;

    // density sampled with trapezoid end-weights, so the discrete mass tracks
    // the continuum integral to second order under refinement
    auto bump_initial = [&](double width, double amplitude) {
        std::vector<double> w(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) {
            double x = grid.point(i);
            double node_h = (m > 1 && (i == 0 || i == m - 1)) ? 0.5 * h : h;
            w[static_cast<size_t>(i)] =
                amplitude * std::exp(-width * (x - 0.5) * (x - 0.5)) * node_h;
        }
        return MeasureVec(grid, std::move(w));
    };

    if (name == "super_brownian") {
        OperatorSpec spec(grid);
        if (nodes > 1) {
            LevySpec motion;
            motion.sigma2 = [](double) { return 0.02; };
            spec.B1 = discretize_levy(motion, grid);
        }
        spec.alpha.setConstant(1.0);
        return {std::move(spec), bump_initial(8.0, 4.0)};
    }
    if (name == "cir_field") {
        OperatorSpec spec(grid);
        spec.B1 = -0.5 * Eigen::MatrixXd::Identity(m, m);
        spec.alpha.setConstant(1.0);
        spec.b.setConstant(0.1 * h);
        std::vector<double> w(static_cast<size_t>(m), h);
        return {std::move(spec), MeasureVec(grid, std::move(w))};
    }
    if (name == "fisher_snedecor") {
        OperatorSpec spec(grid);
        spec.B1 = -0.4 * Eigen::MatrixXd::Identity(m, m);
        spec.alpha.setConstant(0.5);
        spec.b.setConstant(0.05 * h);
        // coupled quadratic part: pi_ij = pi_ji = -beta_ij = ahat_ij off the
        // diagonal with symmetric ahat >= 0, which satisfies the PSD family
        // condition; the diagonal of beta adds a PSD cushion
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                if (i == j) continue;
                double ahat = 0.3 * std::exp(-std::abs(grid.point(i) - grid.point(j)));
                spec.pi(i, j) = ahat;
                spec.beta(i, j) = -ahat;
            }
            spec.beta(i, i) = 0.2;
        }
        std::vector<double> w(static_cast<size_t>(m), h);
        return {std::move(spec), MeasureVec(grid, std::move(w))};
    }
    if (name == "black_scholes_field") {
        OperatorSpec spec(grid);
        Eigen::VectorXd a1 = Eigen::VectorXd::Constant(m, 0.2);
        spec.loadings.push_back(a1);
        if (nodes > 1) {
            Eigen::VectorXd a2(m);
            for (int i = 0; i < m; ++i) a2(i) = 0.1 * std::sin(M_PI * grid.point(i));
            spec.loadings.push_back(a2);
        }
        std::vector<double> w(static_cast<size_t>(m), h);
        return {std::move(spec), MeasureVec(grid, std::move(w))};
    }
    throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace mvpd
