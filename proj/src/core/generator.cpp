#include "core/generator.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mvpd {

OperatorSpec::OperatorSpec(Grid g)
    : grid(std::move(g)),
      b(Eigen::VectorXd::Zero(grid.size())),
      B1(Eigen::MatrixXd::Zero(grid.size(), grid.size())),
      alpha(Eigen::VectorXd::Zero(grid.size())),
      beta(Eigen::MatrixXd::Zero(grid.size(), grid.size())),
      pi(Eigen::MatrixXd::Zero(grid.size(), grid.size())) {}

OperatorSpec OperatorSpec::zero(Grid g) { return OperatorSpec(std::move(g)); }

void OperatorSpec::check_shapes() const {
    int m = grid.size();
    if (b.size() != m || alpha.size() != m) throw std::invalid_argument("vector size mismatch");
    if (B1.rows() != m || B1.cols() != m || beta.rows() != m || beta.cols() != m ||
        pi.rows() != m || pi.cols() != m)
        throw std::invalid_argument("matrix size mismatch");
    for (const auto& a : loadings)
        if (a.size() != m) throw std::invalid_argument("loading size mismatch");
}

Eigen::MatrixXd OperatorSpec::q2_kernel() const {
    Eigen::MatrixXd k = beta;
    for (const auto& a : loadings) k += a * a.transpose();
    return k;
}

const ConditionCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : conditions)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace

std::string ValidationReport::to_json() const {
    std::ostringstream os;
    os << "{\"accepted\":" << (accepted ? "true" : "false") << ",\"conditions\":[";
    for (size_t i = 0; i < conditions.size(); ++i) {
        const auto& c = conditions[i];
        if (i) os << ",";
        os << "{\"name\":\"" << json_escape(c.name) << "\",\"passed\":"
           << (c.passed ? "true" : "false");
        if (!c.witness.empty()) os << ",\"witness\":\"" << json_escape(c.witness) << "\"";
        os << "}";
    }
    os << "]}";
    return os.str();
}

ValidationReport validate(const OperatorSpec& spec, const ValidateOptions& opts) {
    spec.check_shapes();
    int m = spec.size();
    ValidationReport rep;
    auto push = [&rep](std::string name, bool ok, std::string witness = "") {
        rep.conditions.push_back({std::move(name), ok, ok ? "" : std::move(witness)});
    };

    {
        bool ok = true;
        std::ostringstream w;
        for (int i = 0; i < m; ++i) {
            if (spec.b(i) < 0) {
                ok = false;
                w << "b(" << i << ") = " << spec.b(i);
                break;
            }
        }
        push("immigration nonnegative", ok, w.str());
    }
    {
        bool ok = true;
        std::ostringstream w;
        for (int i = 0; i < m && ok; ++i)
            for (int j = 0; j < m; ++j)
                if (i != j && spec.B1(i, j) < 0) {
                    ok = false;
                    w << "B1(" << i << "," << j << ") = " << spec.B1(i, j);
                    break;
                }
        push("positive minimum principle", ok, w.str());
    }
    {
        bool ok = true;
        std::ostringstream w;
        for (int i = 0; i < m; ++i)
            if (spec.alpha(i) < 0) {
                ok = false;
                w << "alpha(" << i << ") = " << spec.alpha(i);
                break;
            }
        push("alpha nonnegative", ok, w.str());
    }
    {
        double asym = (spec.beta - spec.beta.transpose()).cwiseAbs().maxCoeff();
        double scale = std::max(1.0, spec.beta.cwiseAbs().maxCoeff());
        push("beta symmetric", asym <= 1e-12 * scale,
             "max |beta - beta^T| = " + std::to_string(asym));
    }
    {
        bool ok = true;
        std::ostringstream w;
        for (int i = 0; i < m; ++i)
            if (spec.beta(i, i) < 0) {
                ok = false;
                w << "beta(" << i << "," << i << ") = " << spec.beta(i, i);
                break;
            }
        push("beta diagonal nonnegative", ok, w.str());
    }
    {
        bool ok = true;
        std::ostringstream w;
        for (int i = 0; i < m && ok; ++i)
            for (int j = 0; j < m; ++j)
                if (spec.pi(i, j) < 0) {
                    ok = false;
                    w << "pi(" << i << "," << j << ") = " << spec.pi(i, j);
                    break;
                }
        push("pi nonnegative", ok, w.str());
    }
    {
        bool ok = true;
        std::ostringstream w;
        for (int i = 0; i < m; ++i)
            if (spec.pi(i, i) != 0.0) {
                ok = false;
                w << "pi(" << i << "," << i << ") = " << spec.pi(i, i);
                break;
            }
        push("pi zero diagonal", ok, w.str());
    }

    // PSD family: beta + Diag(pi c) Diag(c)^{-1} for all c > 0. A PSD beta is
    // a sufficient certificate (the added diagonal is non-negative). Otherwise
    // sample c log-uniformly; this is a necessary check only, since general
    // copositivity has no finite certificate.
    {
        bool ok = true;
        std::string witness;
        std::string how;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.beta);
        double beta_scale = std::max(1.0, spec.beta.cwiseAbs().maxCoeff());
        if (es.eigenvalues().minCoeff() >= -opts.tol * beta_scale) {
            how = "certified: beta positive semidefinite";
        } else {
            how = "randomized necessary check (" + std::to_string(opts.psd_samples) + " samples)";
            std::mt19937_64 rng(opts.seed);
            std::uniform_real_distribution<double> logc(std::log(1e-3), std::log(1e3));
            Eigen::MatrixXd mat(m, m);
            for (int s = 0; s < opts.psd_samples && ok; ++s) {
                Eigen::VectorXd c(m);
                for (int i = 0; i < m; ++i) c(i) = std::exp(logc(rng));
                mat = spec.beta;
                Eigen::VectorXd pic = spec.pi * c;
                for (int i = 0; i < m; ++i) mat(i, i) += pic(i) / c(i);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ms(mat);
                double scale = std::max(1.0, mat.cwiseAbs().maxCoeff());
                double mn = ms.eigenvalues().minCoeff();
                if (mn < -opts.tol * scale) {
                    ok = false;
                    std::ostringstream w;
                    w << "min eigenvalue " << mn << " at sample " << s << ", c = [";
                    for (int i = 0; i < m; ++i) w << (i ? "," : "") << c(i);
                    w << "]";
                    witness = w.str();
                }
            }
        }
        rep.conditions.push_back({"beta-pi copositivity", ok, ok ? how : witness});
    }

    rep.accepted = true;
    for (const auto& c : rep.conditions) rep.accepted = rep.accepted && c.passed;
    return rep;
}

double apply_generator_raw(const OperatorSpec& spec, const Eigen::VectorXd& grad,
                           const Eigen::MatrixXd& hess, const Eigen::VectorXd& c) {
    int m = spec.size();
    double out = spec.b.dot(grad);
    out += c.dot(spec.B1 * grad);
    double q1 = 0;
    for (int i = 0; i < m; ++i) q1 += spec.alpha(i) * c(i) * hess(i, i);
    Eigen::MatrixXd kernel = spec.q2_kernel();
    Eigen::VectorXd pic = spec.pi * c;
    double q2 = 0;
    for (int i = 0; i < m; ++i) {
        q2 += c(i) * pic(i) * hess(i, i);   // the two pi halves collapse by symmetry
        for (int j = 0; j < m; ++j) q2 += kernel(i, j) * c(i) * c(j) * hess(i, j);
    }
    return out + 0.5 * (q1 + q2);
}

double apply_generator(const OperatorSpec& spec, const PolyRep& p, const MeasureVec& nu,
                       int degree_cap) {
    if (p.grid_size() != spec.size() || nu.size() != spec.size())
        throw std::invalid_argument("grid mismatch");
    if (p.degree() > degree_cap) throw std::domain_error("polynomial degree exceeds cap");
    int m = spec.size();
    std::vector<double> g = partial(p, nu);
    SymCoeff h = partial2(p, nu);
    Eigen::VectorXd grad = Eigen::Map<const Eigen::VectorXd>(g.data(), m);
    Eigen::MatrixXd hess = Eigen::Map<const Eigen::MatrixXd>(h.values().data(), m, m);
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(nu.weights().data(), m);
    return apply_generator_raw(spec, grad, hess, c);
}

namespace {

// B1 applied to the first slot of a degree-k tensor, before symmetrization.
std::vector<double> b1_on_first_slot(const Eigen::MatrixXd& B1, const SymCoeff& g) {
    int m = g.grid_size();
    size_t tail = g.flat_size() / static_cast<size_t>(m);
    std::vector<double> out(g.flat_size(), 0.0);
    const auto& src = g.values();
    for (int x = 0; x < m; ++x) {
        double* dst = out.data() + static_cast<size_t>(x) * tail;
        for (int y = 0; y < m; ++y) {
            double w = B1(x, y);
            if (w == 0.0) continue;
            const double* row = src.data() + static_cast<size_t>(y) * tail;
            for (size_t t = 0; t < tail; ++t) dst[t] += w * row[t];
        }
    }
    return out;
}

}  // namespace

PolyRep apply_dual(const OperatorSpec& spec, const PolyRep& p, int degree_cap) {
    if (p.grid_size() != spec.size()) throw std::invalid_argument("grid mismatch");
    if (p.degree() > degree_cap) throw std::domain_error("polynomial degree exceeds cap");
    int m = spec.size();
    PolyRep out(m);
    bool b1_zero = spec.B1.cwiseAbs().maxCoeff() == 0.0;
    bool b_zero = spec.b.cwiseAbs().maxCoeff() == 0.0;
    bool alpha_zero = spec.alpha.cwiseAbs().maxCoeff() == 0.0;
    Eigen::MatrixXd kernel = spec.q2_kernel();
    bool kernel_zero = kernel.cwiseAbs().maxCoeff() == 0.0;
    bool pi_zero = spec.pi.cwiseAbs().maxCoeff() == 0.0;
    std::vector<double> bvec(spec.b.data(), spec.b.data() + m);

    for (int k = 1; k <= p.max_stored_degree(); ++k) {
        const SymCoeff* term = p.term(k);
        if (!term || term->is_zero()) continue;
        const auto& g = term->values();
        size_t tail2 = (k >= 2) ? term->flat_size() / static_cast<size_t>(m * m) : 0;
        double kk1 = 0.5 * k * (k - 1);

        // degree k: k Sym(B1 on slot 1) + (k(k-1)/2) Sym(Q2 on slots 1,2)
        if (!b1_zero) {
            std::vector<double> vals = b1_on_first_slot(spec.B1, *term);
            for (double& v : vals) v *= k;
            out.ensure_term(k).axpy(1.0, SymCoeff(m, k, std::move(vals)));
        }
        if (k >= 2 && !(kernel_zero && pi_zero)) {
            std::vector<double> vals(term->flat_size(), 0.0);
            for (int x = 0; x < m; ++x) {
                for (int y = 0; y < m; ++y) {
                    double* dst = vals.data() + (static_cast<size_t>(x) * m + y) * tail2;
                    const double* gxy = g.data() + (static_cast<size_t>(x) * m + y) * tail2;
                    const double* gxx = g.data() + (static_cast<size_t>(x) * m + x) * tail2;
                    const double* gyy = g.data() + (static_cast<size_t>(y) * m + y) * tail2;
                    double pxy = 0.5 * spec.pi(x, y), pyx = 0.5 * spec.pi(y, x);
                    double ker = kernel(x, y);
                    for (size_t t = 0; t < tail2; ++t)
                        dst[t] = kk1 * (pxy * gxx[t] + pyx * gyy[t] + ker * gxy[t]);
                }
            }
            out.ensure_term(k).axpy(1.0, SymCoeff(m, k, std::move(vals)));
        }

        // degree k-1: k Sym(contract slot 1 against b)
        //           + (k(k-1)/2) Sym(alpha-weighted diagonal contraction)
        if (!b_zero) {
            SymCoeff down = contract_last(*term, bvec);
            down *= static_cast<double>(k);
            out.ensure_term(k - 1).axpy(1.0, down);
        }
        if (k >= 2 && !alpha_zero) {
            size_t out_size = term->flat_size() / static_cast<size_t>(m);
            std::vector<double> vals(out_size, 0.0);
            for (int x = 0; x < m; ++x) {
                double ax = spec.alpha(x);
                if (ax == 0.0) continue;
                double* dst = vals.data() + static_cast<size_t>(x) * tail2;
                const double* gxx = g.data() + (static_cast<size_t>(x) * m + x) * tail2;
                for (size_t t = 0; t < tail2; ++t) dst[t] += ax * gxx[t];
            }
            SymCoeff diag(m, k - 1, std::move(vals));
            diag *= kk1;
            out.ensure_term(k - 1).axpy(1.0, diag);
        }
    }
    return out;
}

double carre_du_champ(const OperatorSpec& spec, const PolyRep& p, const PolyRep& q,
                      const MeasureVec& nu, int degree_cap) {
    if (p.degree() + q.degree() > degree_cap && p.degree() >= 0 && q.degree() >= 0)
        throw std::domain_error("product degree exceeds cap");
    PolyRep pq = poly_mul(p, q, degree_cap);
    double lpq = apply_generator(spec, pq, nu, degree_cap);
    double lp = apply_generator(spec, p, nu, degree_cap);
    double lq = apply_generator(spec, q, nu, degree_cap);
    return lpq - poly_eval(p, nu) * lq - poly_eval(q, nu) * lp;
}

Eigen::VectorXd sde_drift(const OperatorSpec& spec, const Eigen::VectorXd& c) {
    return spec.b + spec.B1.transpose() * c;
}

Eigen::MatrixXd sde_diffusion(const OperatorSpec& spec, const Eigen::VectorXd& c) {
    int m = spec.size();
    Eigen::MatrixXd a = spec.q2_kernel();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) *= c(i) * c(j);
    Eigen::VectorXd pic = spec.pi * c;
    for (int i = 0; i < m; ++i) a(i, i) += spec.alpha(i) * c(i) + c(i) * pic(i);
    return a;
}

}  // namespace mvpd
