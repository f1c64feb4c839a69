#include "core/numeric.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace mvpd {

std::vector<double> quadrature_weights(int n) {
    if (n < 0) throw std::invalid_argument("negative node count");
    std::vector<double> w(static_cast<size_t>(n) + 1, 0.0);
    if (n == 0) return w;
    if (n == 1) {
        w[0] = w[1] = 0.5;
        return w;
    }
    auto add_simpson = [&w](int from, int to) {
        // composite Simpson over an even number of intervals
        for (int i = from; i + 2 <= to; i += 2) {
            w[static_cast<size_t>(i)] += 1.0 / 3.0;
            w[static_cast<size_t>(i) + 1] += 4.0 / 3.0;
            w[static_cast<size_t>(i) + 2] += 1.0 / 3.0;
        }
    };
    if (n % 2 == 0) {
        add_simpson(0, n);
    } else {
        add_simpson(0, n - 3);
        // Newton 3/8 on the trailing three intervals
        w[static_cast<size_t>(n) - 3] += 3.0 / 8.0;
        w[static_cast<size_t>(n) - 2] += 9.0 / 8.0;
        w[static_cast<size_t>(n) - 1] += 9.0 / 8.0;
        w[static_cast<size_t>(n)] += 3.0 / 8.0;
    }
    return w;
}

std::vector<double> cumulative_integral(const std::vector<double>& f, double h) {
    int n = static_cast<int>(f.size()) - 1;
    std::vector<double> out(f.size(), 0.0);
    if (n < 1) return out;
    // Even nodes by chained Simpson; an odd node adds one single-interval
    // cell to its left neighbour. With four points in reach the cell rule is
    // cubic-exact, matching Simpson; the short-grid fallbacks degrade softly.
    for (int i = 2; i <= n; i += 2) {
        out[static_cast<size_t>(i)] =
            out[static_cast<size_t>(i) - 2] +
            h / 3.0 * (f[static_cast<size_t>(i) - 2] + 4.0 * f[static_cast<size_t>(i) - 1] + f[static_cast<size_t>(i)]);
    }
    auto fv = [&f](int i) { return f[static_cast<size_t>(i)]; };
    for (int i = 1; i <= n; i += 2) {
        double inc;
        if (i + 2 <= n) {
            inc = h / 24.0 * (9.0 * fv(i - 1) + 19.0 * fv(i) - 5.0 * fv(i + 1) + fv(i + 2));
        } else if (i >= 3) {
            inc = h / 24.0 * (9.0 * fv(i) + 19.0 * fv(i - 1) - 5.0 * fv(i - 2) + fv(i - 3));
        } else if (i + 1 <= n) {
            inc = h / 12.0 * (5.0 * fv(i - 1) + 8.0 * fv(i) - fv(i + 1));
        } else {
            inc = h / 2.0 * (fv(0) + fv(1));
        }
        out[static_cast<size_t>(i)] = out[static_cast<size_t>(i) - 1] + inc;
    }
    return out;
}

PsdSqrtResult psd_sqrt(const Eigen::MatrixXd& a, double tol) {
    PsdSqrtResult res;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
        res.root = llt.matrixL();
        res.min_eigenvalue = 0.0;
        res.used_cholesky = true;
        return res;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    Eigen::VectorXd ev = es.eigenvalues();
    double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    res.min_eigenvalue = ev.minCoeff();
    if (res.min_eigenvalue < -tol * scale)
        throw std::runtime_error("matrix is not positive semidefinite (min eigenvalue " +
                                 std::to_string(res.min_eigenvalue) + ")");
    Eigen::VectorXd sq = ev.cwiseMax(0.0).cwiseSqrt();
    res.root = es.eigenvectors() * sq.asDiagonal();
    res.used_cholesky = false;
    return res;
}

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(uint32_t c[4], uint32_t k0, uint32_t k1) {
    uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * c[0];
    uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * c[2];
    uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
    uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
    uint32_t n0 = hi1 ^ c[1] ^ k0;
    uint32_t n1 = lo1;
    uint32_t n2 = hi0 ^ c[3] ^ k1;
    uint32_t n3 = lo0;
    c[0] = n0; c[1] = n1; c[2] = n2; c[3] = n3;
}

}  // namespace

PhiloxBlock philox4x32(uint64_t seed, uint64_t path, uint32_t step, uint32_t pair) {
    uint32_t c[4] = {static_cast<uint32_t>(path), static_cast<uint32_t>(path >> 32), step, pair};
    uint32_t k0 = static_cast<uint32_t>(seed);
    uint32_t k1 = static_cast<uint32_t>(seed >> 32);
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k0, k1);
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    PhiloxBlock out;
    out.x[0] = c[0]; out.x[1] = c[1]; out.x[2] = c[2]; out.x[3] = c[3];
    return out;
}

namespace {
inline double u01_from(uint32_t a, uint32_t b) {
    uint64_t bits = (static_cast<uint64_t>(a) << 32) | b;
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;   // in (0,1]
}
}  // namespace

NormalPair philox_normal_pair(uint64_t seed, uint64_t path, uint32_t step, uint32_t pair) {
    PhiloxBlock blk = philox4x32(seed, path, step, pair);
    double u1 = u01_from(blk.x[0], blk.x[1]);
    double u2 = u01_from(blk.x[2], blk.x[3]);
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = 2.0 * M_PI * u2;
    return {r * std::cos(th), r * std::sin(th)};
}

double philox_uniform(uint64_t seed, uint64_t path, uint32_t step, uint32_t pair) {
    PhiloxBlock blk = philox4x32(seed, path, step, pair);
    return u01_from(blk.x[0], blk.x[1]);
}

}  // namespace mvpd
