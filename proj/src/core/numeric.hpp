#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace mvpd {

/// Quadrature weights for int_{t_0}^{t_n} f dt over n+1 equispaced nodes with
/// unit spacing (Simpson / 3-8 mix, globally fourth order; n=1 falls back to
/// the trapezoid rule).
std::vector<double> quadrature_weights(int n);

/// Running integral F_i = int_{t_0}^{t_i} f dt on an equispaced grid.
std::vector<double> cumulative_integral(const std::vector<double>& f, double h);

struct PsdSqrtResult {
    Eigen::MatrixXd root;   // S with S Sᵀ = clip(A)
    double min_eigenvalue;  // before clipping (0 when the Cholesky fast path hit)
    bool used_cholesky;
};

/// Square root of a symmetric PSD matrix: Cholesky fast path, symmetric
/// eigendecomposition with clipping of small negative eigenvalues otherwise.
/// Throws if an eigenvalue is below -tol * max(1, |A|).
PsdSqrtResult psd_sqrt(const Eigen::MatrixXd& a, double tol = 1e-10);

/// Counter-based Philox4x32-10 stream: one block of four 32-bit words per
/// (seed; path, step, pair) key, so draws are reproducible under any path
/// scheduling.
struct PhiloxBlock {
    uint32_t x[4];
};
PhiloxBlock philox4x32(uint64_t seed, uint64_t path, uint32_t step, uint32_t pair);

struct NormalPair {
    double z0, z1;
};
NormalPair philox_normal_pair(uint64_t seed, uint64_t path, uint32_t step, uint32_t pair);

double philox_uniform(uint64_t seed, uint64_t path, uint32_t step, uint32_t pair);

}  // namespace mvpd
