#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "core/measures.hpp"

using namespace mvpd;

namespace {

// Evaluation oracle independent of poly_eval: direct summation over all index
// tuples, valid for signed weight vectors as well.
double eval_oracle(const PolyRep& p, const std::vector<double>& c) {
    int m = p.grid_size();
    double total = 0;
    for (int k = 0; k <= p.max_stored_degree(); ++k) {
        const SymCoeff* term = p.term(k);
        if (!term) continue;
        if (k == 0) {
            total += term->values()[0];
            continue;
        }
        std::vector<int> idx(static_cast<size_t>(k), 0);
        for (size_t f = 0; f < term->flat_size(); ++f) {
            double prod = term->values()[f];
            for (int d : idx) prod *= c[static_cast<size_t>(d)];
            total += prod;
            for (int pos = k - 1; pos >= 0; --pos) {
                if (++idx[static_cast<size_t>(pos)] < m) break;
                idx[static_cast<size_t>(pos)] = 0;
            }
        }
    }
    return total;
}

SymCoeff random_coeff(int m, int degree, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    size_t n = 1;
    for (int i = 0; i < degree; ++i) n *= static_cast<size_t>(m);
    std::vector<double> vals(n);
    for (double& v : vals) v = u(rng);
    return SymCoeff(m, degree, std::move(vals));
}

MeasureVec random_measure(int m, std::mt19937_64& rng, double lo = 0.0, double hi = 10.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> w(static_cast<size_t>(m));
    for (double& v : w) v = u(rng);
    return MeasureVec(Grid::labels(m), std::move(w));
}

}  // namespace

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid({}), std::invalid_argument);
    CHECK_THROWS_AS(Grid({1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Grid({2.0, 1.0}), std::invalid_argument);
    Grid g = Grid::uniform(0.0, 1.0, 11);
    CHECK(g.size() == 11);
    CHECK(g.spacing() == doctest::Approx(0.1));
    CHECK(Grid::labels(3).point(2) == 3.0);
}

TEST_CASE("measure invariants") {
    CHECK_THROWS_AS(MeasureVec(Grid::labels(2), {1.0, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(MeasureVec(Grid::labels(2), {1.0}), std::invalid_argument);
    MeasureVec nu(Grid::labels(3), {0.0, 1.0, 2.0});
    CHECK(nu.total_mass() == 3.0);
}

TEST_CASE("pairing examples") {
    // degree-0 pairing is the scalar
    MeasureVec nu1(Grid::labels(1), {3.0});
    CHECK(pair(SymCoeff::constant(1, 5.0), nu1) == 5.0);

    // m=1, k=2, g=1, c=3: <1, nu^2> = 9
    CHECK(pair(SymCoeff(1, 2, {1.0}), nu1) == doctest::Approx(9.0));

    // m=2, k=2, g(i,j) = i*j with labels 1,2, c=(1,2)
    std::vector<double> vals(4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) vals[static_cast<size_t>(i * 2 + j)] = (i + 1.0) * (j + 1.0);
    SymCoeff g(2, 2, std::move(vals));
    MeasureVec nu(Grid::labels(2), {1.0, 2.0});
    double by_hand = 0;   // direct summation oracle
    double c[2] = {1.0, 2.0};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) by_hand += (i + 1.0) * (j + 1.0) * c[i] * c[j];
    CHECK(by_hand == doctest::Approx(25.0));
    CHECK(pair(g, nu) == doctest::Approx(25.0));
}

TEST_CASE("pairing rejects grid mismatch") {
    SymCoeff g = SymCoeff::from_vector({1.0, 2.0});
    MeasureVec nu(Grid::labels(3), {1.0, 1.0, 1.0});
    CHECK_THROWS_AS(pair(g, nu), std::invalid_argument);
}

TEST_CASE("symmetric tensor product examples") {
    // scalar times h leaves h unchanged
    SymCoeff h = SymCoeff::from_vector({2.0, -1.0});
    SymCoeff one = SymCoeff::constant(2, 1.0);
    SymCoeff prod = sym_tensor(one, h);
    CHECK(prod.degree() == 1);
    CHECK(prod.values()[0] == 2.0);
    CHECK(prod.values()[1] == -1.0);

    SymCoeff e1 = SymCoeff::from_vector({1.0, 0.0});
    SymCoeff e2 = SymCoeff::from_vector({0.0, 1.0});
    SymCoeff sq = sym_tensor(e1, e1);
    CHECK(sq.values()[0] == 1.0);
    CHECK(sq.values()[1] == 0.0);
    CHECK(sq.values()[2] == 0.0);
    CHECK(sq.values()[3] == 0.0);

    // e1 (x) e2: value 1/2 at (1,2) and (2,1) after symmetrization over the
    // two slot permutations
    SymCoeff mixed = sym_tensor(e1, e2);
    CHECK(mixed.values()[0] == 0.0);
    CHECK(mixed.values()[1] == doctest::Approx(0.5));
    CHECK(mixed.values()[2] == doctest::Approx(0.5));
    CHECK(mixed.values()[3] == 0.0);
}

TEST_CASE("product law: pair(g (x) h) = pair(g) pair(h)") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        int m = 1 + static_cast<int>(rng() % 4);
        int kg = static_cast<int>(rng() % 3);
        int kh = static_cast<int>(rng() % 3);
        SymCoeff g = random_coeff(m, kg, rng);
        SymCoeff h = random_coeff(m, kh, rng);
        MeasureVec nu = random_measure(m, rng, 0.0, 3.0);
        double lhs = pair(sym_tensor(g, h), nu);
        double rhs = pair(g, nu) * pair(h, nu);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("symmetry under index permutations is exact") {
    std::mt19937_64 rng(11);
    SymCoeff g = random_coeff(3, 3, rng);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                int a[3] = {i, j, k};
                double v = g.value_at(a);
                int perms[5][3] = {{i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}};
                for (auto& p : perms) CHECK(g.value_at(p) == v);
            }
}

TEST_CASE("poly_eval examples") {
    MeasureVec nu(Grid::labels(2), {1.0, 1.0});
    CHECK(poly_eval(PolyRep::constant(2, 2.0), nu) == 2.0);

    PolyRep p = PolyRep::constant(2, 3.0);
    p.add_term(SymCoeff::from_vector({1.0, 1.0}));
    CHECK(poly_eval(p, nu) == doctest::Approx(5.0));

    // <g, nu>^2 expanded through the tensor square, g=(1,2), c=(1,1) -> 9
    SymCoeff g = SymCoeff::from_vector({1.0, 2.0});
    PolyRep sq = PolyRep::monomial(sym_tensor(g, g));
    CHECK(poly_eval(sq, nu) == doctest::Approx(9.0));
}

TEST_CASE("zero measure is legal; positive-degree pairings vanish") {
    MeasureVec zero(Grid::labels(3), {0.0, 0.0, 0.0});
    std::mt19937_64 rng(3);
    for (int k = 1; k <= 3; ++k) CHECK(pair(random_coeff(3, k, rng), zero) == 0.0);
    CHECK(pair(SymCoeff::constant(3, 4.0), zero) == 4.0);
}

TEST_CASE("partial derivative examples") {
    // linear polynomial: the derivative is the coefficient at every state
    std::mt19937_64 rng(5);
    SymCoeff g = SymCoeff::from_vector({0.3, -0.7, 1.1});
    PolyRep p = PolyRep::monomial(g);
    for (int t = 0; t < 5; ++t) {
        MeasureVec nu = random_measure(3, rng);
        auto grad = partial(p, nu);
        for (int i = 0; i < 3; ++i) CHECK(grad[static_cast<size_t>(i)] == doctest::Approx(g.values()[static_cast<size_t>(i)]));
    }

    // constants have vanishing first and second derivatives
    PolyRep c = PolyRep::constant(3, 9.0);
    MeasureVec nu = random_measure(3, rng);
    for (double v : partial(c, nu)) CHECK(v == 0.0);
    CHECK(partial2(c, nu).max_abs() == 0.0);

    // p = <g,nu>^2 with g=(1,2) at c=(1,1): gradient 2<g,nu> g = (6,12)
    SymCoeff g2 = SymCoeff::from_vector({1.0, 2.0});
    PolyRep sq = PolyRep::monomial(sym_tensor(g2, g2));
    MeasureVec ones(Grid::labels(2), {1.0, 1.0});
    auto grad = partial(sq, ones);
    CHECK(grad[0] == doctest::Approx(6.0));
    CHECK(grad[1] == doctest::Approx(12.0));
}

TEST_CASE("derivatives match central finite differences of the evaluation oracle") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> cu(0.0, 10.0);
    for (int trial = 0; trial < 30; ++trial) {
        int m = 1 + static_cast<int>(rng() % 3);
        PolyRep p(m);
        p.add_term(random_coeff(m, 0, rng));
        p.add_term(random_coeff(m, 1, rng));
        p.add_term(random_coeff(m, 2, rng));
        p.add_term(random_coeff(m, 3, rng));
        std::vector<double> c(static_cast<size_t>(m));
        for (double& v : c) v = cu(rng);
        MeasureVec nu(Grid::labels(m), c);

        auto grad = partial(p, nu);
        double h = 1e-6;
        for (int i = 0; i < m; ++i) {
            std::vector<double> up = c, dn = c;
            up[static_cast<size_t>(i)] += h;
            dn[static_cast<size_t>(i)] -= h;
            double fd = (eval_oracle(p, up) - eval_oracle(p, dn)) / (2 * h);
            CHECK(grad[static_cast<size_t>(i)] ==
                  doctest::Approx(fd).epsilon(1e-6).scale(std::max(1.0, std::abs(fd))));
        }

        // polynomials here have degree <= 3, so the central second difference
        // has no truncation term; a larger step only reduces roundoff
        SymCoeff hess = partial2(p, nu);
        double h2 = 0.05;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                std::vector<double> pp = c, pm = c, mp = c, mm = c;
                pp[static_cast<size_t>(i)] += h2; pp[static_cast<size_t>(j)] += h2;
                pm[static_cast<size_t>(i)] += h2; pm[static_cast<size_t>(j)] -= h2;
                mp[static_cast<size_t>(i)] -= h2; mp[static_cast<size_t>(j)] += h2;
                mm[static_cast<size_t>(i)] -= h2; mm[static_cast<size_t>(j)] -= h2;
                double fd = (eval_oracle(p, pp) - eval_oracle(p, pm) - eval_oracle(p, mp) +
                             eval_oracle(p, mm)) / (4 * h2 * h2);
                int ij[2] = {i, j};
                CHECK(hess.value_at(ij) ==
                      doctest::Approx(fd).epsilon(1e-6).scale(std::max(1.0, std::abs(fd))));
            }
    }
}

TEST_CASE("poly_eval agrees with the summation oracle") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        int m = 1 + static_cast<int>(rng() % 4);
        PolyRep p(m);
        for (int k = 0; k <= 3; ++k) p.add_term(random_coeff(m, k, rng));
        MeasureVec nu = random_measure(m, rng, 0.0, 5.0);
        CHECK(poly_eval(p, nu) == doctest::Approx(eval_oracle(p, nu.weights())).epsilon(1e-12));
    }
}

TEST_CASE("degree bookkeeping under products") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        int m = 1 + static_cast<int>(rng() % 3);
        int kp = static_cast<int>(rng() % 3);
        int kq = static_cast<int>(rng() % 3);
        PolyRep p = PolyRep::monomial(random_coeff(m, kp, rng));
        PolyRep q = PolyRep::monomial(random_coeff(m, kq, rng));
        if (p.degree() < 0 || q.degree() < 0) continue;
        CHECK(poly_mul(p, q).degree() == p.degree() + q.degree());
    }
}

TEST_CASE("degree cap is enforced") {
    std::mt19937_64 rng(23);
    SymCoeff a = random_coeff(2, 4, rng);
    SymCoeff b = random_coeff(2, 3, rng);
    CHECK_THROWS_AS(sym_tensor(a, b), std::domain_error);
    CHECK_NOTHROW(sym_tensor(a, b, 7));
}
