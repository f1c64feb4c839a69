// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are fixed here, not tuned at run time.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "core/affine.hpp"
#include "core/continuum.hpp"
#include "core/generator.hpp"
#include "core/measures.hpp"
#include "core/moments.hpp"
#include "core/probe.hpp"
#include "core/simulate.hpp"
#include "test_helpers.hpp"

using namespace mvpd;
using namespace mvpd_test;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int number, const char* name, bool ok, const std::string& detail) {
    std::printf("%s  criterion %2d  %-34s %s\n", ok ? "PASS" : "FAIL", number, name,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. geometric-lift moment identity across sigma, degree and horizon

void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<double> h = {1.0, 0.5};
    MeasureVec mu(Grid::labels(2), {1.0, 2.0});
    double pairing = 1.0 * 1.0 + 0.5 * 2.0;
    double worst = 0;
    for (double sigma : {0.1, 0.2, 0.5}) {
        OperatorSpec spec = gbm_lift_spec(2, sigma);
        for (int n = 1; n <= 6; ++n) {
            for (double T : {0.5, 1.0}) {
                PolyRep g = PolyRep::monomial(SymCoeff::rank_one(h, n));
                double engine = moment(spec, g, mu, T);
                double exact = std::pow(pairing, n) * std::exp(sigma * sigma * T * n * (n - 1) / 2.0);
                worst = std::max(worst, std::abs(engine / exact - 1.0));
            }
        }
    }
    double elapsed = seconds_since(t0);
    std::ostringstream d;
    d << "max rel err " << worst << ", " << elapsed << " s";
    report(1, "lift moment identity", worst <= 1e-6 && elapsed < 5.0, d.str());
}

// ---------------------------------------------------------------------------
// 2. square-root mean: closed form at 1e-8 and Monte Carlo at 3 SE

void criterion_2() {
    auto t0 = std::chrono::steady_clock::now();
    OperatorSpec spec = cir_spec(0.1, -0.5, 1.0);
    MeasureVec z0(Grid::labels(1), {1.0});
    PolyRep mass = PolyRep::linear({1.0});
    double engine = moment(spec, mass, z0, 1.0);
    double closed = std::exp(-0.5) + 0.1 * (std::exp(-0.5) - 1.0) / (-0.5);
    double rel = std::abs(engine / closed - 1.0);

    PathEnsemble ens = simulate(spec, z0, 1.0, 1000, 100000, 20260808);
    auto [mc, se] = estimate(ens, mass);
    double z = (mc - engine) / se;
    double elapsed = seconds_since(t0);
    std::ostringstream d;
    d << "value " << engine << ", rel err " << rel << ", mc z " << z << ", " << elapsed << " s";
    report(2, "square-root mean", rel <= 1e-8 && std::abs(z) <= 3.0 && elapsed < 60.0, d.str());
}

// ---------------------------------------------------------------------------
// 3. scalar branching Laplace values and their Monte Carlo checks

void criterion_3() {
    OperatorSpec spec(Grid::labels(1));
    spec.alpha(0) = 2.0;
    MeasureVec c0(Grid::labels(1), {1.0});
    Eigen::VectorXd g(1);
    g << -1.0;

    double feller = laplace(spec, g, c0, 1.0);
    double err1 = std::abs(feller - std::exp(-0.5));

    OperatorSpec with_b = spec;
    with_b.b(0) = 1.0;
    double immigration = laplace(with_b, g, c0, 1.0);
    double err2 = std::abs(immigration - std::exp(-0.5) / 2.0);

    PathEnsemble e1 = simulate(spec, c0, 1.0, 4000, 50000, 31337);
    auto [m1, s1] = estimate_exp_pairing(e1, g);
    double z1 = (m1 - feller) / s1;
    PathEnsemble e2 = simulate(with_b, c0, 1.0, 4000, 50000, 31338);
    auto [m2, s2] = estimate_exp_pairing(e2, g);
    double z2 = (m2 - immigration) / s2;

    std::ostringstream d;
    d << "abs errs " << err1 << " / " << err2 << ", mc z " << z1 << " / " << z2;
    report(3, "branching Laplace values",
           err1 <= 1e-6 && err2 <= 1e-6 && std::abs(z1) <= 3.0 && std::abs(z2) <= 3.0, d.str());
}

// ---------------------------------------------------------------------------
// 4. direct RK4 vs mild-form Picard on random affine specs and the preset

void criterion_4() {
    std::mt19937_64 rng(40404);
    RiccatiOptions opts;
    opts.steps = 400;
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        int m = 1 + static_cast<int>(rng() % 5);
        OperatorSpec spec = random_affine_spec(m, rng);
        Eigen::VectorXd g(m);
        std::uniform_real_distribution<double> u(-1.0, 0.0);
        for (int i = 0; i < m; ++i) g(i) = u(rng);
        RiccatiSolution direct = solve_riccati(spec, g, 1.0, opts);
        RiccatiSolution mild = solve_riccati_mild(spec, g, 1.0, opts);
        for (size_t i = 0; i < direct.times.size(); ++i)
            worst = std::max(worst, (direct.psi[i] - mild.psi[i]).lpNorm<Eigen::Infinity>());
    }
    Preset sb = preset("super_brownian", 11);
    Eigen::VectorXd gsb = Eigen::VectorXd::Constant(11, -1.0);
    RiccatiSolution direct = solve_riccati(sb.spec, gsb, 1.0, opts);
    RiccatiSolution mild = solve_riccati_mild(sb.spec, gsb, 1.0, opts);
    for (size_t i = 0; i < direct.times.size(); ++i)
        worst = std::max(worst, (direct.psi[i] - mild.psi[i]).lpNorm<Eigen::Infinity>());

    std::ostringstream d;
    d << "sup-norm gap " << worst;
    report(4, "Riccati solver cross-check", worst <= 1e-6, d.str());
}

// ---------------------------------------------------------------------------
// 5. dual/generator consistency and degree non-increase

void criterion_5() {
    std::mt19937_64 rng(50505);
    double worst = 0;
    bool degrees_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        int m = 1 + static_cast<int>(rng() % 3);
        OperatorSpec spec = random_admissible_spec(m, rng);
        PolyRep p = random_poly(m, 3, rng);
        MeasureVec nu = random_state(m, rng);
        PolyRep q = apply_dual(spec, p);
        degrees_ok = degrees_ok && q.degree() <= p.degree();
        double direct = apply_generator(spec, p, nu);
        double via_dual = poly_eval(q, nu);
        worst = std::max(worst,
                         std::abs(via_dual - direct) / std::max(1.0, std::abs(direct)));
    }
    std::ostringstream d;
    d << "max rel gap " << worst << (degrees_ok ? "" : ", degree grew");
    report(5, "dual operator consistency", worst <= 1e-10 && degrees_ok, d.str());
}

// ---------------------------------------------------------------------------
// 6. maximum-principle probe battery

void criterion_6() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(60606);
    int violations = 0;
    int runs = 0;
    for (int s = 0; s < 10; ++s) {
        OperatorSpec spec = random_admissible_spec(3, rng);
        if (!validate(spec).accepted) {
            ++violations;   // construction failed its own guarantee
            continue;
        }
        for (int f = 0; f < 100; ++f) {
            ProbeFunction probe = ProbeFunction::random(3, 7000 + 100 * s + f);
            ProbeOptions opts;
            opts.seed = 90000 + 100 * s + f;
            ProbeReport rep = pmp_probe(spec, probe, opts);
            ++runs;
            if (!rep.ok()) ++violations;
        }
    }
    double elapsed = seconds_since(t0);
    std::ostringstream d;
    d << violations << " violations in " << runs << " probes, " << elapsed << " s";
    report(6, "maximum-principle probes", violations == 0 && elapsed < 120.0, d.str());
}

// ---------------------------------------------------------------------------
// 7. validator soundness

void criterion_7() {
    bool ok = true;
    std::ostringstream d;

    // coupled pi/beta construction is admissible
    int m = 4;
    OperatorSpec coupled(Grid::labels(m));
    std::mt19937_64 rng(70707);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            double ahat = u(rng);
            coupled.pi(i, j) = ahat;
            coupled.pi(j, i) = ahat;
            coupled.beta(i, j) = -ahat;
            coupled.beta(j, i) = -ahat;
        }
    if (!validate(coupled).accepted) {
        ok = false;
        d << "coupled example rejected; ";
    }

    auto rejected_naming = [](OperatorSpec spec, const char* name) {
        ValidationReport rep = validate(spec);
        const ConditionCheck* c = rep.find(name);
        return !rep.accepted && c && !c->passed;
    };

    OperatorSpec bad_b1(Grid::labels(2));
    bad_b1.B1(0, 1) = -0.25;
    if (!rejected_naming(bad_b1, "positive minimum principle")) {
        ok = false;
        d << "negative B1 off-diagonal not caught; ";
    }

    OperatorSpec bad_alpha(Grid::labels(2));
    bad_alpha.alpha(1) = -0.5;
    if (!rejected_naming(bad_alpha, "alpha nonnegative")) {
        ok = false;
        d << "negative alpha not caught; ";
    }

    OperatorSpec bad_beta(Grid::labels(2));
    bad_beta.beta << 0.0, -1.0, -1.0, 0.0;
    if (!rejected_naming(bad_beta, "beta-pi copositivity")) {
        ok = false;
        d << "indefinite beta not caught; ";
    }

    if (ok) d << "coupled example accepted, all three violations named";
    report(7, "validator soundness", ok, d.str());
}

// ---------------------------------------------------------------------------
// 8. positive-group action: group law and positivity

void criterion_8() {
    Grid grid = Grid::uniform(0.5, 2.0, 151);
    TauGroupSpec flow{[](double x) { return x; }, [](double) { return 0.0; }, 0.0,
                      std::numeric_limits<double>::infinity()};
    std::vector<double> g(151);
    for (int i = 0; i < 151; ++i) g[static_cast<size_t>(i)] = std::sin(grid.point(i)) + 1.5;

    GroupActionResult half = group_action(flow, grid, g, 0.25);
    GroupActionResult twice = group_action(flow, grid, half.values, 0.25);
    GroupActionResult whole = group_action(flow, grid, g, 0.5);
    double margin = grid.point(150) - 3.0 * grid.spacing();
    double sup = 0;
    for (int i = 0; i < 151; ++i) {
        if (grid.point(i) * std::exp(0.5) > margin) continue;
        sup = std::max(sup, std::abs(whole.values[static_cast<size_t>(i)] -
                                     twice.values[static_cast<size_t>(i)]));
    }

    std::mt19937_64 rng(80808);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TauGroupSpec general{[](double x) { return 0.3 * x * (2.5 - x); },
                         [](double x) { return -0.2 + 0.1 * x; }, 0.0,
                         std::numeric_limits<double>::infinity()};
    bool positive = true;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> rg(151);
        for (double& v : rg) v = u(rng);
        GroupActionResult res = group_action(general, grid, rg, 0.3);
        for (double v : res.values) positive = positive && v >= 0.0;
    }

    std::ostringstream d;
    d << "group-law defect " << sup << (positive ? ", positivity held" : ", positivity BROKEN");
    report(8, "positive group action", sup <= 1e-4 && positive, d.str());
}

// ---------------------------------------------------------------------------
// 9. moment engine matches the Laplace-transform derivative

void criterion_9() {
    std::mt19937_64 rng(90909);
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
        int m = 1 + static_cast<int>(rng() % 3);
        OperatorSpec spec = random_affine_spec(m, rng);
        MeasureVec nu = random_state(m, rng, 0.1, 2.0);
        Eigen::VectorXd h(m);
        std::uniform_real_distribution<double> u(0.1, 1.0);
        for (int i = 0; i < m; ++i) h(i) = u(rng);
        std::vector<double> hv(h.data(), h.data() + m);
        double mean = moment(spec, PolyRep::linear(hv), nu, 1.0);
        double eps = 1e-5;
        double up = laplace(spec, (-2.0 * eps) * h, nu, 1.0);
        double deriv = (up - 1.0) / (2.0 * eps);   // laplace at g = 0 is exactly 1
        worst = std::max(worst, std::abs(-deriv - mean) / std::max(1.0, std::abs(mean)));
    }
    std::ostringstream d;
    d << "max gap " << worst;
    report(9, "moment vs Laplace bridge", worst <= 1e-4, d.str());
}

// ---------------------------------------------------------------------------
// 10. futures pipeline through the CLI

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_10() {
    bool ok = true;
    std::ostringstream d;

    fs::path dir = fs::temp_directory_path() / "mvpd_acceptance_futures";
    fs::remove_all(dir);
    fs::create_directories(dir);
    double sigma = 0.2, T = 1.0;
    long paths = 20000;
    std::string cfg_text = R"({
      "version": 1,
      "grid": {"points": [0.6, 0.8, 1.0, 1.2]},
      "operator": {"loadings": [[0.2, 0.2, 0.2, 0.2]]},
      "initial_weights": [1.0, 1.2, 1.1, 0.9],
      "horizon": 1.0,
      "seed": 99,
      "solver": {"steps": 1000, "paths": 20000},
      "futures": {"periods": [{"tau1": 0.5, "tau2": 1.25}], "bands": true}
    })";
    fs::path cfg = dir / "lift.json";
    {
        std::ofstream os(cfg);
        os << cfg_text;
    }
    auto run_once = [&](const fs::path& out) {
        fs::create_directories(out);
        std::string cmd = std::string(MVPD_CLI_PATH) + " price-futures --config " + cfg.string() +
                          " --out " + out.string() + " >/dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str())) == 0;
    };
    if (!run_once(dir / "a") || !run_once(dir / "b")) {
        report(10, "futures pipeline", false, "CLI run failed");
        fs::remove_all(dir);
        return;
    }
    std::string csv_a = slurp(dir / "a" / "futures.csv");
    std::string csv_b = slurp(dir / "b" / "futures.csv");
    if (csv_a != csv_b || csv_a.empty()) {
        ok = false;
        d << "CSV not deterministic; ";
    }

    // parse the single data row
    std::stringstream ss(csv_a);
    std::string header, row;
    std::getline(ss, header);
    std::getline(ss, row);
    std::vector<double> fields;
    {
        std::stringstream rs(row);
        std::string field;
        while (std::getline(rs, field, ',')) fields.push_back(std::stod(field));
    }
    double mean = fields[3], stdev = fields[4], p05 = fields[5], p50 = fields[6], p95 = fields[7];

    double f0 = (1.0 + 1.2 + 1.1 + 0.9) / 4.0;   // uniform weights, all four nodes inside
    double var_exact = f0 * f0 * (std::exp(sigma * sigma * T) - 1.0);
    double mean_rel = std::abs(mean / f0 - 1.0);
    double var_rel = std::abs(stdev * stdev / var_exact - 1.0);
    if (mean_rel > 1e-6 || var_rel > 1e-6) {
        ok = false;
        d << "moment-path errors mean " << mean_rel << " var " << var_rel << "; ";
    }

    // lognormal quantiles of F = F0 * S_T with 3-SE bands for sample quantiles
    auto quantile_check = [&](double est, double alpha) {
        double z = (alpha == 0.5) ? 0.0 : (alpha < 0.5 ? -1.6448536269514722 : 1.6448536269514722);
        double q = f0 * std::exp(-0.5 * sigma * sigma * T + sigma * std::sqrt(T) * z);
        double dens = std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI) / (q * sigma * std::sqrt(T));
        double se = std::sqrt(alpha * (1 - alpha) / static_cast<double>(paths)) / dens;
        return std::abs(est - q) <= 3.0 * se;
    };
    if (!quantile_check(p05, 0.05) || !quantile_check(p50, 0.5) || !quantile_check(p95, 0.95)) {
        ok = false;
        d << "MC bands off; ";
    }
    // MC mean consistency: lognormal mean f0, sd of the estimator
    double mc_sd = f0 * std::sqrt(std::exp(sigma * sigma * T) - 1.0) / std::sqrt(static_cast<double>(paths));
    if (std::abs(p50) > 0 && std::abs(mean - f0) > 3.0 * mc_sd + 1e-9) {
        // mean comes from the moment engine; this guards the pipe wiring only
        ok = false;
        d << "mean inconsistent; ";
    }

    if (ok) d << "variance rel err " << var_rel << ", bands within 3 SE, deterministic CSV";
    report(10, "futures pipeline", ok, d.str());
    fs::remove_all(dir);
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criterion(s) failed\n", g_failures);
    }
    return g_failures;
}
