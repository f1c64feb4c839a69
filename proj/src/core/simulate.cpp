#include "core/simulate.hpp"

#include <cmath>
#include <cstring>
#include <ostream>
#include <stdexcept>

#include "core/numeric.hpp"

namespace mvpd {

namespace {

std::vector<int> plan_slices(int n_steps, long n_paths, int m, const SimulateOptions& opts) {
    int stride = opts.store_stride;
    if (stride == 0) {
        size_t full = static_cast<size_t>(n_paths) * (static_cast<size_t>(n_steps) + 1) *
                      static_cast<size_t>(m);
        if (full <= opts.max_stored_doubles) {
            stride = 1;
        } else {
            stride = -1;   // endpoints only
        }
    }
    std::vector<int> steps;
    if (stride < 0) {
        steps = {0, n_steps};
        if (n_steps == 0) steps = {0};
        return steps;
    }
    for (int s = 0; s <= n_steps; s += stride) steps.push_back(s);
    if (steps.back() != n_steps) steps.push_back(n_steps);
    return steps;
}

}  // namespace

void euler_step(const OperatorSpec& spec, Eigen::VectorXd& c, double dt, const double* z,
                EulerWorkspace& ws, double psd_tol) {
    int m = spec.size();
    ws.cplus = c.cwiseMax(0.0);
    ws.drift = sde_drift(spec, ws.cplus);
    if (m == 1) {
        double a = sde_diffusion(spec, ws.cplus)(0, 0);
        if (a < -psd_tol * std::max(1.0, std::abs(a)))
            throw std::runtime_error("diffusion matrix not PSD (invalid spec slipped through)");
        c(0) = std::max(0.0, c(0) + ws.drift(0) * dt + std::sqrt(std::max(a, 0.0) * dt) * z[0]);
        return;
    }
    ws.a = sde_diffusion(spec, ws.cplus);
    PsdSqrtResult root = psd_sqrt(ws.a, psd_tol);
    ws.noise = Eigen::Map<const Eigen::VectorXd>(z, m);
    c += ws.drift * dt + std::sqrt(dt) * (root.root * ws.noise);
    c = c.cwiseMax(0.0);
}

PathEnsemble simulate(const OperatorSpec& spec, const MeasureVec& nu0, double T, int n_steps,
                      long n_paths, uint64_t seed, const SimulateOptions& opts) {
    spec.check_shapes();
    if (nu0.size() != spec.size()) throw std::invalid_argument("grid mismatch");
    if (T < 0 || n_steps < 1 || n_paths < 1) throw std::invalid_argument("bad simulation sizes");
    int m = spec.size();

    PathEnsemble ens;
    ens.m = m;
    ens.n_steps = n_steps;
    ens.n_paths = n_paths;
    ens.dt = T / n_steps;
    ens.seed = seed;
    ens.stored_steps = plan_slices(n_steps, n_paths, m, opts);
    ens.data.resize(static_cast<size_t>(n_paths) * ens.stored_steps.size() * static_cast<size_t>(m));

    Eigen::VectorXd c0 = Eigen::Map<const Eigen::VectorXd>(nu0.weights().data(), m);
    int pairs = (m + 1) / 2;
    EulerWorkspace ws;
    Eigen::VectorXd c(m), z(m);
    try {
        for (long p = 0; p < n_paths; ++p) {
            c = c0;
            size_t next_slice = 0;
            auto store = [&](int step) {
                if (next_slice < ens.stored_steps.size() &&
                    ens.stored_steps[next_slice] == step) {
                    double* dst = ens.data.data() +
                                  (static_cast<size_t>(p) * ens.stored_steps.size() + next_slice) *
                                      static_cast<size_t>(m);
                    for (int i = 0; i < m; ++i) dst[static_cast<size_t>(i)] = c(i);
                    ++next_slice;
                }
            };
            store(0);
            for (int s = 0; s < n_steps; ++s) {
                for (int q = 0; q < pairs; ++q) {
                    NormalPair np = philox_normal_pair(seed, static_cast<uint64_t>(p),
                                                       static_cast<uint32_t>(s),
                                                       static_cast<uint32_t>(q));
                    z(2 * q) = np.z0;
                    if (2 * q + 1 < m) z(2 * q + 1) = np.z1;
                }
                euler_step(spec, c, ens.dt, z.data(), ws, opts.psd_tol);
                store(s + 1);
            }
        }
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string("simulation aborted: ") + e.what());
    }
    return ens;
}

PathEnsemble simulate_gbm_lift(const MeasureVec& mu, double sigma, double T, long n_paths,
                               uint64_t seed) {
    if (sigma < 0) throw std::invalid_argument("sigma must be non-negative");
    if (n_paths < 1) throw std::invalid_argument("bad simulation sizes");
    int m = mu.size();
    PathEnsemble ens;
    ens.m = m;
    ens.n_steps = 1;
    ens.n_paths = n_paths;
    ens.dt = T;
    ens.seed = seed;
    ens.scheme = "gbm-lift-exact";
    ens.stored_steps = {0, 1};
    ens.data.resize(static_cast<size_t>(n_paths) * 2 * static_cast<size_t>(m));
    double half_var = 0.5 * sigma * sigma * T;
    double vol = sigma * std::sqrt(T);
    for (long p = 0; p < n_paths; ++p) {
        NormalPair np = philox_normal_pair(seed, static_cast<uint64_t>(p), 0, 0);
        double st = std::exp(-half_var + vol * np.z0);
        double* row = ens.data.data() + static_cast<size_t>(p) * 2 * static_cast<size_t>(m);
        for (int i = 0; i < m; ++i) {
            row[static_cast<size_t>(i)] = mu.weight(i);
            row[static_cast<size_t>(m + i)] = st * mu.weight(i);
        }
    }
    return ens;
}

namespace {

MeasureVec slice_measure(const PathEnsemble& ens, long path, int s, const Grid& grid) {
    const double* w = ens.slice(path, s);
    std::vector<double> weights(w, w + ens.m);
    return MeasureVec(grid, std::move(weights));
}

std::pair<double, double> mean_se(const std::vector<double>& v) {
    double n = static_cast<double>(v.size());
    double mean = 0;
    for (double x : v) mean += x;
    mean /= n;
    if (v.size() < 2) return {mean, 0.0};
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= (n - 1);
    return {mean, std::sqrt(var / n)};
}

}  // namespace

std::pair<double, double> estimate(const PathEnsemble& ens, const PolyRep& p) {
    if (p.grid_size() != ens.m) throw std::invalid_argument("grid mismatch");
    Grid grid = Grid::labels(ens.m);
    std::vector<double> vals(static_cast<size_t>(ens.n_paths));
    for (long q = 0; q < ens.n_paths; ++q)
        vals[static_cast<size_t>(q)] = poly_eval(p, slice_measure(ens, q, ens.n_slices() - 1, grid));
    return mean_se(vals);
}

std::pair<double, double> estimate_exp_pairing(const PathEnsemble& ens, const Eigen::VectorXd& g) {
    if (g.size() != ens.m) throw std::invalid_argument("grid mismatch");
    std::vector<double> vals(static_cast<size_t>(ens.n_paths));
    for (long q = 0; q < ens.n_paths; ++q) {
        const double* w = ens.terminal(q);
        double dot = 0;
        for (int i = 0; i < ens.m; ++i) dot += g(i) * w[i];
        vals[static_cast<size_t>(q)] = std::exp(dot);
    }
    return mean_se(vals);
}

double qv_estimate(const PathEnsemble& ens, const PolyRep& p, const PolyRep& q) {
    if (p.grid_size() != ens.m || q.grid_size() != ens.m)
        throw std::invalid_argument("grid mismatch");
    if (ens.n_slices() < 3)
        throw std::domain_error("quadratic variation needs a stored path grid");
    Grid grid = Grid::labels(ens.m);
    double total = 0;
    for (long r = 0; r < ens.n_paths; ++r) {
        double pv_prev = 0, qv_prev = 0, acc = 0;
        for (int s = 0; s < ens.n_slices(); ++s) {
            MeasureVec nu = slice_measure(ens, r, s, grid);
            double pv = poly_eval(p, nu);
            double qv = poly_eval(q, nu);
            if (s > 0) acc += (pv - pv_prev) * (qv - qv_prev);
            pv_prev = pv;
            qv_prev = qv;
        }
        total += acc;
    }
    return total / static_cast<double>(ens.n_paths);
}

EnsembleSummary summarize(const PathEnsemble& ens, const std::vector<PolyRep>& polys) {
    EnsembleSummary out;
    Grid grid = Grid::labels(ens.m);
    out.times.resize(static_cast<size_t>(ens.n_slices()));
    for (int s = 0; s < ens.n_slices(); ++s) out.times[static_cast<size_t>(s)] = ens.time_of_slice(s);
    out.mean.assign(polys.size(), std::vector<double>(static_cast<size_t>(ens.n_slices())));
    out.se = out.mean;
    std::vector<double> vals(static_cast<size_t>(ens.n_paths));
    for (size_t k = 0; k < polys.size(); ++k) {
        for (int s = 0; s < ens.n_slices(); ++s) {
            for (long r = 0; r < ens.n_paths; ++r)
                vals[static_cast<size_t>(r)] = poly_eval(polys[k], slice_measure(ens, r, s, grid));
            auto [mean, se] = mean_se(vals);
            out.mean[k][static_cast<size_t>(s)] = mean;
            out.se[k][static_cast<size_t>(s)] = se;
        }
    }
    return out;
}

void write_paths_binary(const PathEnsemble& ens, std::ostream& os) {
    auto put_u64 = [&os](uint64_t v) {
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
        os.write(reinterpret_cast<const char*>(buf), 8);
    };
    auto put_f64 = [&](double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64(bits);
    };
    put_u64(static_cast<uint64_t>(ens.m));
    put_u64(static_cast<uint64_t>(ens.n_slices() - 1));
    put_u64(static_cast<uint64_t>(ens.n_paths));
    double stored_dt = (ens.n_slices() > 1) ? ens.time_of_slice(1) - ens.time_of_slice(0) : 0.0;
    put_f64(stored_dt);
    for (double v : ens.data) put_f64(v);
}

}  // namespace mvpd
