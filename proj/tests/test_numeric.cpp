#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <random>
#include <vector>

#include "core/numeric.hpp"

using namespace mvpd;

TEST_CASE("quadrature weights integrate constants exactly") {
    for (int n = 1; n <= 25; ++n) {
        std::vector<double> w = quadrature_weights(n);
        double sum = 0;
        for (double v : w) sum += v;
        CHECK(sum == doctest::Approx(static_cast<double>(n)).epsilon(1e-14));
    }
}

TEST_CASE("running integral is exact on cubics") {
    int n = 37;
    double h = 0.1;
    std::vector<double> f(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        double t = h * i;
        f[static_cast<size_t>(i)] = t * t * t - 2.0 * t + 1.0;
    }
    std::vector<double> F = cumulative_integral(f, h);
    for (int i = 0; i <= n; ++i) {
        double t = h * i;
        double exact = t * t * t * t / 4.0 - t * t + t;
        CHECK(F[static_cast<size_t>(i)] ==
              doctest::Approx(exact).epsilon(1e-13).scale(std::max(1.0, std::abs(exact))));
    }
}

TEST_CASE("running integral converges at fourth order on smooth data") {
    auto sup_err = [](int n) {
        double h = 1.0 / n;
        std::vector<double> f(static_cast<size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) f[static_cast<size_t>(i)] = std::sin(3.0 * h * i);
        std::vector<double> F = cumulative_integral(f, h);
        double worst = 0;
        for (int i = 0; i <= n; ++i) {
            double exact = (1.0 - std::cos(3.0 * h * i)) / 3.0;
            worst = std::max(worst, std::abs(F[static_cast<size_t>(i)] - exact));
        }
        return worst;
    };
    double e1 = sup_err(50);
    double e2 = sup_err(100);
    CHECK(e2 <= e1 / 12.0);   // ~16x drop per halving
    CHECK(e1 <= 1e-6);
}

TEST_CASE("psd square root reproduces the matrix") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        int m = 1 + static_cast<int>(rng() % 5);
        Eigen::MatrixXd v(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) v(i, j) = u(rng);
        Eigen::MatrixXd a = v * v.transpose();
        PsdSqrtResult res = psd_sqrt(a);
        CHECK((res.root * res.root.transpose() - a).cwiseAbs().maxCoeff() <= 1e-10);
    }

    // rank one falls through to the eigen path
    Eigen::VectorXd x(3);
    x << 1.0, -2.0, 0.5;
    Eigen::MatrixXd rank1 = x * x.transpose();
    PsdSqrtResult res = psd_sqrt(rank1);
    CHECK_FALSE(res.used_cholesky);
    CHECK((res.root * res.root.transpose() - rank1).cwiseAbs().maxCoeff() <= 1e-10);

    Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(psd_sqrt(neg), std::runtime_error);
}

TEST_CASE("philox streams are deterministic and well distributed") {
    NormalPair a = philox_normal_pair(42, 7, 3, 1);
    NormalPair b = philox_normal_pair(42, 7, 3, 1);
    CHECK(a.z0 == b.z0);
    CHECK(a.z1 == b.z1);
    NormalPair c = philox_normal_pair(43, 7, 3, 1);
    CHECK(a.z0 != c.z0);

    long n = 200000;
    double sum = 0, sumsq = 0, cross = 0;
    double prev = 0;
    for (long p = 0; p < n; ++p) {
        NormalPair z = philox_normal_pair(99, static_cast<uint64_t>(p), 0, 0);
        sum += z.z0 + z.z1;
        sumsq += z.z0 * z.z0 + z.z1 * z.z1;
        cross += z.z0 * prev;
        prev = z.z1;
    }
    double mean = sum / (2.0 * n);
    double var = sumsq / (2.0 * n) - mean * mean;
    double corr = cross / static_cast<double>(n - 1);
    CHECK(std::abs(mean) <= 5.0 / std::sqrt(2.0 * n));
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(corr) <= 5.0 / std::sqrt(static_cast<double>(n)));

    for (int i = 0; i < 1000; ++i) {
        double u01 = philox_uniform(5, static_cast<uint64_t>(i), 0, 0);
        CHECK(u01 > 0.0);
        CHECK(u01 <= 1.0);
    }
}
