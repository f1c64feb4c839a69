#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "core/generator.hpp"
#include "core/measures.hpp"

namespace mvpd {

/// Monte Carlo paths of the weight vector. Slices of the trajectory are kept
/// at a fixed step stride (stride 1 = every step); above the storage budget
/// only the initial and terminal slices are retained. Seed plus path index
/// defines the noise stream, so ensembles are reproducible bit for bit under
/// any path scheduling.
struct PathEnsemble {
    int m = 0;
    int n_steps = 0;
    long n_paths = 0;
    double dt = 0;
    uint64_t seed = 0;
    std::string scheme = "full-truncation-euler";
    std::vector<int> stored_steps;   // step indices of the stored slices
    std::vector<double> data;        // [path][slice][node]

    int n_slices() const { return static_cast<int>(stored_steps.size()); }
    double time_of_slice(int s) const { return stored_steps[static_cast<size_t>(s)] * dt; }
    bool full() const { return n_slices() == n_steps + 1; }

    const double* slice(long path, int s) const {
        return data.data() + (static_cast<size_t>(path) * static_cast<size_t>(n_slices()) +
                              static_cast<size_t>(s)) * static_cast<size_t>(m);
    }
    const double* terminal(long path) const { return slice(path, n_slices() - 1); }
};

struct SimulateOptions {
    int store_stride = 0;                  // 0 = auto from the storage budget
    size_t max_stored_doubles = 20'000'000;
    double psd_tol = 1e-10;
};

/// Full-truncation Euler for the weight-vector diffusion of a validated spec:
/// coefficients are evaluated at the non-negative part of the state and the
/// state is floored at zero after every step.
PathEnsemble simulate(const OperatorSpec& spec, const MeasureVec& nu0, double T, int n_steps,
                      long n_paths, uint64_t seed, const SimulateOptions& opts = {});

/// Exact sampler for the scalar lift X_t = S_t mu with dS = sigma S dW:
/// lognormal S_T, no discretization bias.
PathEnsemble simulate_gbm_lift(const MeasureVec& mu, double sigma, double T, long n_paths,
                               uint64_t seed);

/// Sample mean and standard error of p evaluated on terminal slices.
std::pair<double, double> estimate(const PathEnsemble& ensemble, const PolyRep& p);

/// Mean and standard error of exp(<g, X_T>) over terminal slices.
std::pair<double, double> estimate_exp_pairing(const PathEnsemble& ensemble,
                                               const Eigen::VectorXd& g);

/// Realized covariation of (p(X), q(X)) over the stored slice grid, averaged
/// across paths. Needs more than the endpoint slices.
double qv_estimate(const PathEnsemble& ensemble, const PolyRep& p, const PolyRep& q);

/// Per-slice mean and standard error of each polynomial, for summary exports.
struct EnsembleSummary {
    std::vector<double> times;
    std::vector<std::vector<double>> mean;   // [poly][slice]
    std::vector<std::vector<double>> se;
};
EnsembleSummary summarize(const PathEnsemble& ensemble, const std::vector<PolyRep>& polys);

/// Flat binary layout: header of three little-endian u64 (m, n_steps stored,
/// n_paths) and one f64 (dt between stored slices), then f64 weights ordered
/// path-major, slice, node.
void write_paths_binary(const PathEnsemble& ensemble, std::ostream& os);

/// One Euler step; exposed so convergence tests can drive coupled streams.
struct EulerWorkspace {
    Eigen::VectorXd cplus, drift, noise;
    Eigen::MatrixXd a;
};
void euler_step(const OperatorSpec& spec, Eigen::VectorXd& c, double dt, const double* z,
                EulerWorkspace& ws, double psd_tol = 1e-10);

}  // namespace mvpd
