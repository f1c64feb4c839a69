// Command-line front end for the mvpd shared library. One JSON config file
// per run; results land as CSV files in the output directory. Exit codes:
// 0 success, 1 domain failure (rejected spec, non-affine request, blowup),
// 2 usage or schema errors.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mvpd.h"

using nlohmann::json;

namespace {

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check_status(mvpd_status st) {
    if (st == MVPD_OK) return;
    std::string msg = mvpd_last_error();
    if (st == MVPD_ERR_INVALID_ARGUMENT || st == MVPD_ERR_DIMENSION ||
        st == MVPD_ERR_DEGREE_CAP || st == MVPD_ERR_UNKNOWN_NAME)
        throw SchemaError(msg);
    throw DomainError(msg);
}

struct SpecDeleter {
    void operator()(mvpd_spec* s) const { mvpd_spec_free(s); }
};
struct PolyDeleter {
    void operator()(mvpd_poly* p) const { mvpd_poly_free(p); }
};
struct EnsembleDeleter {
    void operator()(mvpd_ensemble* e) const { mvpd_ensemble_free(e); }
};
struct RiccatiDeleter {
    void operator()(mvpd_riccati* r) const { mvpd_riccati_free(r); }
};

using SpecPtr = std::unique_ptr<mvpd_spec, SpecDeleter>;
using PolyPtr = std::unique_ptr<mvpd_poly, PolyDeleter>;
using EnsemblePtr = std::unique_ptr<mvpd_ensemble, EnsembleDeleter>;
using RiccatiPtr = std::unique_ptr<mvpd_riccati, RiccatiDeleter>;

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open config file: " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw SchemaError("config root must be an object");
    if (cfg.value("version", 1) != 1) throw SchemaError("unsupported config version");
    return cfg;
}

std::vector<double> number_array(const json& j, const std::string& what) {
    if (!j.is_array()) throw SchemaError(what + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw SchemaError(what + " must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<double> matrix_rowmajor(const json& j, int m, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != m)
        throw SchemaError(what + " must be an " + std::to_string(m) + "-row matrix");
    std::vector<double> out;
    for (const auto& row : j) {
        std::vector<double> r = number_array(row, what + " row");
        if (static_cast<int>(r.size()) != m)
            throw SchemaError(what + " rows must have " + std::to_string(m) + " entries");
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

struct Run {
    SpecPtr spec;
    int m = 0;
    std::vector<double> grid;
    std::vector<double> initial;
    double horizon = 1.0;
    uint64_t seed = 1;
    int steps = 1000;
    long paths = 10000;
};

Run build_run(const json& cfg) {
    Run run;
    if (!cfg.contains("grid")) throw SchemaError("config needs a grid section");
    const json& grid = cfg["grid"];
    mvpd_spec* raw = nullptr;
    bool from_preset = false;
    if (grid.contains("preset")) {
        std::string name = grid["preset"].get<std::string>();
        int nodes = grid.value("nodes", 11);
        check_status(mvpd_spec_preset(name.c_str(), nodes, &raw));
        from_preset = true;
    } else if (grid.contains("points")) {
        std::vector<double> pts = number_array(grid["points"], "grid.points");
        check_status(mvpd_spec_create(pts.data(), static_cast<int>(pts.size()), &raw));
    } else {
        throw SchemaError("grid needs either points or preset");
    }
    run.spec.reset(raw);
    run.m = mvpd_spec_dim(raw);
    run.grid.resize(static_cast<size_t>(run.m));
    check_status(mvpd_spec_grid(raw, run.grid.data()));

    if (cfg.contains("operator")) {
        const json& op = cfg["operator"];
        if (!op.is_object()) throw SchemaError("operator must be an object");
        auto vec = [&](const char* key, mvpd_status (*set)(mvpd_spec*, const double*)) {
            if (!op.contains(key)) return;
            std::vector<double> v = number_array(op[key], std::string("operator.") + key);
            if (static_cast<int>(v.size()) != run.m)
                throw SchemaError(std::string("operator.") + key + " has wrong length");
            check_status(set(raw, v.data()));
        };
        auto mat = [&](const char* key, mvpd_status (*set)(mvpd_spec*, const double*)) {
            if (!op.contains(key)) return;
            std::vector<double> v = matrix_rowmajor(op[key], run.m, std::string("operator.") + key);
            check_status(set(raw, v.data()));
        };
        vec("b", mvpd_spec_set_b);
        vec("alpha", mvpd_spec_set_alpha);
        mat("B1", mvpd_spec_set_b1);
        mat("beta", mvpd_spec_set_beta);
        mat("pi", mvpd_spec_set_pi);
        if (op.contains("loadings")) {
            if (!op["loadings"].is_array()) throw SchemaError("operator.loadings must be an array");
            for (const auto& l : op["loadings"]) {
                std::vector<double> v = number_array(l, "operator.loadings entry");
                if (static_cast<int>(v.size()) != run.m)
                    throw SchemaError("operator.loadings entry has wrong length");
                check_status(mvpd_spec_add_loading(raw, v.data()));
            }
        }
    }

    if (cfg.contains("initial_weights")) {
        run.initial = number_array(cfg["initial_weights"], "initial_weights");
        if (static_cast<int>(run.initial.size()) != run.m)
            throw SchemaError("initial_weights has wrong length");
        for (double w : run.initial)
            if (w < 0) throw SchemaError("initial_weights must be non-negative");
    } else if (from_preset) {
        run.initial.resize(static_cast<size_t>(run.m));
        check_status(mvpd_spec_default_initial(raw, run.initial.data()));
    } else {
        throw SchemaError("config needs initial_weights (or a preset grid)");
    }

    run.horizon = cfg.value("horizon", 1.0);
    if (run.horizon < 0) throw SchemaError("horizon must be non-negative");
    run.seed = cfg.value("seed", 1ull);
    if (cfg.contains("solver")) {
        run.steps = cfg["solver"].value("steps", 1000);
        run.paths = cfg["solver"].value("paths", 10000l);
        if (run.steps < 1 || run.paths < 1) throw SchemaError("solver.steps/paths must be positive");
    }
    return run;
}

PolyPtr build_poly(const json& j, int m) {
    if (!j.is_object()) throw SchemaError("polynomial must be an object");
    mvpd_poly* raw = nullptr;
    check_status(mvpd_poly_create(m, &raw));
    PolyPtr poly(raw);
    bool any = false;
    if (j.contains("terms")) {
        for (const auto& term : j["terms"]) {
            int degree = term.value("degree", -1);
            if (degree < 0) throw SchemaError("polynomial term needs a degree");
            if (!term.contains("values")) throw SchemaError("polynomial term needs values");
            std::vector<double> vals = number_array(term["values"], "polynomial term values");
            size_t expect = 1;
            for (int i = 0; i < degree; ++i) expect *= static_cast<size_t>(m);
            if (vals.size() != expect)
                throw SchemaError("polynomial term values must have m^degree entries");
            check_status(mvpd_poly_add_term(raw, degree, vals.data()));
            any = true;
        }
    }
    if (j.contains("rank_one")) {
        for (const auto& r : j["rank_one"]) {
            if (!r.contains("g")) throw SchemaError("rank_one entry needs g");
            std::vector<double> g = number_array(r["g"], "rank_one g");
            if (static_cast<int>(g.size()) != m) throw SchemaError("rank_one g has wrong length");
            int power = r.value("power", 1);
            check_status(mvpd_poly_add_rank_one(raw, g.data(), power));
            any = true;
        }
    }
    if (!any) throw SchemaError("polynomial has no terms");
    return poly;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_file(const std::string& dir, const std::string& name, const std::string& body) {
    std::filesystem::path p = std::filesystem::path(dir) / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw DomainError("cannot open output file " + p.string());
    os << body;
    if (!os) throw DomainError("failed writing " + p.string());
    std::cout << "wrote " << p.string() << "\n";
}

void require_admissible(const Run& run) {
    int accepted = 0;
    check_status(mvpd_spec_validate(run.spec.get(), &accepted, nullptr));
    if (!accepted) throw DomainError("operator spec failed admissibility validation");
}

// ---------------------------------------------------------------- validate

int cmd_validate(const Run& run) {
    int accepted = 0;
    char* report = nullptr;
    check_status(mvpd_spec_validate(run.spec.get(), &accepted, &report));
    std::cout << report << "\n";
    mvpd_string_free(report);
    return accepted ? 0 : 1;
}

// ----------------------------------------------------------------- moments

int cmd_moments(const Run& run, const json& cfg, const std::string& out_dir) {
    if (!cfg.contains("moments")) throw SchemaError("config needs a moments section");
    const json& mc = cfg["moments"];
    require_admissible(run);
    PolyPtr poly = build_poly(mc.contains("polynomial") ? mc["polynomial"] : json(), run.m);

    std::vector<double> times;
    if (mc.contains("times")) {
        times = number_array(mc["times"], "moments.times");
    } else {
        int n = 20;
        for (int i = 0; i <= n; ++i) times.push_back(run.horizon * i / n);
    }
    for (double t : times)
        if (t < 0) throw SchemaError("moments.times must be non-negative");

    std::vector<double> values(times.size());
    check_status(mvpd_moment_surface(run.spec.get(), poly.get(), run.initial.data(), times.data(),
                                     static_cast<int>(times.size()), run.steps, values.data()));

    std::ostringstream os;
    os << "t,value\n";
    for (size_t i = 0; i < times.size(); ++i)
        os << format_number(times[i]) << "," << format_number(values[i]) << "\n";
    write_file(out_dir, "moments.csv", os.str());

    if (mc.value("coefficients_csv", false)) {
        mvpd_moments* sol = nullptr;
        check_status(mvpd_moment_solve(run.spec.get(), poly.get(), run.horizon, run.steps, &sol));
        std::filesystem::path p = std::filesystem::path(out_dir) / "moment_coefficients.csv";
        mvpd_status st = mvpd_moments_write_csv(sol, p.string().c_str(), run.steps / 100 + 1);
        mvpd_moments_free(sol);
        check_status(st);
        std::cout << "wrote " << p.string() << "\n";
    }
    return 0;
}

// ----------------------------------------------------------------- laplace

int cmd_laplace(const Run& run, const json& cfg, const std::string& out_dir) {
    if (!cfg.contains("laplace")) throw SchemaError("config needs a laplace section");
    const json& lc = cfg["laplace"];
    require_admissible(run);

    int affine = 0;
    check_status(mvpd_spec_is_affine(run.spec.get(), &affine));
    if (!affine)
        throw DomainError("spec is not of affine type (Q2 != 0): Laplace transform unavailable");

    if (!lc.contains("g")) throw SchemaError("laplace section needs g");
    std::vector<double> g = number_array(lc["g"], "laplace.g");
    if (static_cast<int>(g.size()) != run.m) throw SchemaError("laplace.g has wrong length");
    for (double v : g)
        if (v > 0) throw DomainError("laplace.g must be non-positive");

    mvpd_riccati* raw = nullptr;
    check_status(mvpd_riccati_solve(run.spec.get(), g.data(), run.horizon, run.steps, &raw));
    RiccatiPtr sol(raw);
    if (mvpd_riccati_blowup(raw)) throw DomainError("finite-time explosion (numerical)");

    int stride = lc.value("output_stride", std::max(1, run.steps / 100));
    int nodes = mvpd_riccati_nodes(raw);
    std::vector<double> psi(static_cast<size_t>(run.m));
    std::ostringstream os;
    os << "t";
    for (int i = 1; i <= run.m; ++i) os << ",psi_" << i;
    os << ",phi,laplace\n";
    for (int n = 0; n < nodes; ++n) {
        if (stride > 1 && n % stride != 0 && n + 1 != nodes) continue;
        double t, phi;
        check_status(mvpd_riccati_node(raw, n, &t, psi.data(), &phi));
        double dot = 0;
        for (int i = 0; i < run.m; ++i)
            dot += psi[static_cast<size_t>(i)] * run.initial[static_cast<size_t>(i)];
        os << format_number(t);
        for (int i = 0; i < run.m; ++i) os << "," << format_number(psi[static_cast<size_t>(i)]);
        os << "," << format_number(phi) << "," << format_number(std::exp(phi + dot)) << "\n";
    }
    write_file(out_dir, "laplace.csv", os.str());
    return 0;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Run& run, const json& cfg, const std::string& out_dir) {
    require_admissible(run);
    const json sc = cfg.value("simulate", json::object());

    mvpd_ensemble* raw = nullptr;
    check_status(mvpd_simulate(run.spec.get(), run.initial.data(), run.horizon, run.steps,
                               run.paths, run.seed, sc.value("store_stride", 0), &raw));
    EnsemblePtr ens(raw);

    std::vector<PolyPtr> polys;
    std::vector<std::string> labels;
    if (sc.contains("polynomials")) {
        int k = 0;
        for (const auto& pj : sc["polynomials"]) {
            polys.push_back(build_poly(pj, run.m));
            labels.push_back(pj.value("label", "poly_" + std::to_string(k++)));
        }
    } else {
        mvpd_poly* mass = nullptr;
        check_status(mvpd_poly_create(run.m, &mass));
        PolyPtr holder(mass);
        std::vector<double> ones(static_cast<size_t>(run.m), 1.0);
        check_status(mvpd_poly_add_rank_one(mass, ones.data(), 1));
        polys.push_back(std::move(holder));
        labels.push_back("total_mass");
    }

    int slices = mvpd_ensemble_slices(raw);
    long paths = mvpd_ensemble_paths(raw);
    std::vector<double> times(static_cast<size_t>(slices));
    check_status(mvpd_ensemble_times(raw, times.data()));

    // per-slice mean and standard error of each requested polynomial
    std::ostringstream os;
    os << "t";
    for (const auto& l : labels) os << "," << l << "_mean," << l << "_se";
    os << "\n";
    std::vector<double> w(static_cast<size_t>(run.m));
    std::vector<std::vector<double>> vals(polys.size(),
                                          std::vector<double>(static_cast<size_t>(paths)));
    for (int s = 0; s < slices; ++s) {
        for (long p = 0; p < paths; ++p) {
            check_status(mvpd_ensemble_slice(raw, p, s, w.data()));
            for (size_t k = 0; k < polys.size(); ++k) {
                double v = 0;
                check_status(mvpd_poly_eval(polys[k].get(), w.data(), &v));
                vals[k][static_cast<size_t>(p)] = v;
            }
        }
        os << format_number(times[static_cast<size_t>(s)]);
        for (size_t k = 0; k < polys.size(); ++k) {
            double mean = 0;
            for (double v : vals[k]) mean += v;
            mean /= static_cast<double>(paths);
            double var = 0;
            for (double v : vals[k]) var += (v - mean) * (v - mean);
            double se = paths > 1 ? std::sqrt(var / (paths - 1) / paths) : 0.0;
            os << "," << format_number(mean) << "," << format_number(se);
        }
        os << "\n";
    }
    write_file(out_dir, "simulate_summary.csv", os.str());

    if (sc.contains("dump_paths")) {
        std::filesystem::path p =
            std::filesystem::path(out_dir) / sc["dump_paths"].get<std::string>();
        check_status(mvpd_ensemble_write_paths(raw, p.string().c_str()));
        std::cout << "wrote " << p.string() << "\n";
    }
    return 0;
}

// ------------------------------------------------------------ price-futures

int cmd_price_futures(const Run& run, const json& cfg, const std::string& out_dir) {
    if (!cfg.contains("futures")) throw SchemaError("config needs a futures section");
    const json& fc = cfg["futures"];
    if (!fc.contains("periods") || !fc["periods"].is_array() || fc["periods"].empty())
        throw SchemaError("futures.periods must be a non-empty array");
    require_admissible(run);

    bool bands = fc.value("bands", true);
    EnsemblePtr ens;
    if (bands) {
        mvpd_ensemble* raw = nullptr;
        check_status(mvpd_simulate(run.spec.get(), run.initial.data(), run.horizon, run.steps,
                                   run.paths, run.seed, -1, &raw));
        ens.reset(raw);
    }

    std::ostringstream os;
    os << "period,tau1,tau2,mean,std,p05,p50,p95\n";
    int period_index = 0;
    for (const auto& pj : fc["periods"]) {
        double tau1 = pj.value("tau1", 0.0);
        double tau2 = pj.value("tau2", 0.0);
        if (!(tau1 < tau2)) throw SchemaError("futures period needs tau1 < tau2");

        std::vector<int> nodes;
        for (int i = 0; i < run.m; ++i)
            if (run.grid[static_cast<size_t>(i)] >= tau1 && run.grid[static_cast<size_t>(i)] <= tau2)
                nodes.push_back(i);
        if (nodes.empty())
            throw DomainError("delivery period [" + format_number(tau1) + ", " +
                              format_number(tau2) + "] contains no grid nodes");

        // weight function on the nodes inside the period; uniform average by
        // default so the future is the mean instantaneous forward
        std::vector<double> w(static_cast<size_t>(run.m), 0.0);
        if (pj.contains("weights")) {
            std::vector<double> pw = number_array(pj["weights"], "futures period weights");
            if (pw.size() != nodes.size())
                throw SchemaError("futures period weights must match the nodes inside the period");
            for (size_t k = 0; k < nodes.size(); ++k) {
                if (pw[k] < 0) throw SchemaError("futures period weights must be non-negative");
                w[static_cast<size_t>(nodes[k])] = pw[k];
            }
        } else {
            for (int i : nodes) w[static_cast<size_t>(i)] = 1.0 / static_cast<double>(nodes.size());
        }

        mvpd_poly* lin_raw = nullptr;
        check_status(mvpd_poly_create(run.m, &lin_raw));
        PolyPtr lin(lin_raw);
        check_status(mvpd_poly_add_rank_one(lin_raw, w.data(), 1));
        mvpd_poly* sq_raw = nullptr;
        check_status(mvpd_poly_create(run.m, &sq_raw));
        PolyPtr sq(sq_raw);
        check_status(mvpd_poly_add_rank_one(sq_raw, w.data(), 2));

        double mean = 0, second = 0;
        check_status(mvpd_moment(run.spec.get(), lin_raw, run.initial.data(), run.horizon,
                                 run.steps, &mean));
        check_status(mvpd_moment(run.spec.get(), sq_raw, run.initial.data(), run.horizon,
                                 run.steps, &second));
        double var = std::max(0.0, second - mean * mean);

        double p05 = 0, p50 = 0, p95 = 0;
        if (bands) {
            long paths = mvpd_ensemble_paths(ens.get());
            int last = mvpd_ensemble_slices(ens.get()) - 1;
            std::vector<double> f(static_cast<size_t>(paths));
            std::vector<double> state(static_cast<size_t>(run.m));
            for (long p = 0; p < paths; ++p) {
                check_status(mvpd_ensemble_slice(ens.get(), p, last, state.data()));
                double v = 0;
                for (int i = 0; i < run.m; ++i)
                    v += w[static_cast<size_t>(i)] * state[static_cast<size_t>(i)];
                f[static_cast<size_t>(p)] = v;
            }
            std::sort(f.begin(), f.end());
            auto quantile = [&f](double q) {
                double pos = q * (static_cast<double>(f.size()) - 1);
                size_t lo = static_cast<size_t>(pos);
                size_t hi = std::min(lo + 1, f.size() - 1);
                double t = pos - static_cast<double>(lo);
                return (1 - t) * f[lo] + t * f[hi];
            };
            p05 = quantile(0.05);
            p50 = quantile(0.50);
            p95 = quantile(0.95);
        }

        os << period_index++ << "," << format_number(tau1) << "," << format_number(tau2) << ","
           << format_number(mean) << "," << format_number(std::sqrt(var)) << ","
           << format_number(p05) << "," << format_number(p50) << "," << format_number(p95) << "\n";
    }
    write_file(out_dir, "futures.csv", os.str());
    return 0;
}

// ------------------------------------------------------------------- probe

int cmd_probe(const Run& run, const json& cfg) {
    const json pc = cfg.value("probe", json::object());
    require_admissible(run);
    int count = pc.value("count", 20);
    int restarts = pc.value("restarts", 20);
    double tol = pc.value("tol", 1e-6);
    if (count < 1 || restarts < 1) throw SchemaError("probe.count/restarts must be positive");

    int violations = 0;
    char* report = nullptr;
    check_status(
        mvpd_pmp_probe(run.spec.get(), run.seed, count, restarts, tol, &violations, &report));
    std::cout << report << "\n";
    mvpd_string_free(report);
    return violations == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"measure-valued polynomial diffusion toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::optional<uint64_t> seed_override;
    std::optional<long> paths_override;
    std::optional<int> steps_override;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--paths", paths_override, "override the Monte Carlo path count");
    app.add_option("--steps", steps_override, "override the solver step count");

    CLI::App* validate = app.add_subcommand("validate", "check operator admissibility");
    CLI::App* moments = app.add_subcommand("moments", "conditional moments over a time grid");
    CLI::App* laplace = app.add_subcommand("laplace", "Riccati trajectory and Laplace transform");
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo paths and summaries");
    CLI::App* futures = app.add_subcommand("price-futures", "delivery-period futures statistics");
    CLI::App* probe = app.add_subcommand("probe", "maximum-principle probe on random functions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        json cfg = load_config(config_path);
        Run run = build_run(cfg);
        if (seed_override) run.seed = *seed_override;
        if (paths_override) {
            if (*paths_override < 1) throw SchemaError("--paths must be positive");
            run.paths = *paths_override;
        }
        if (steps_override) {
            if (*steps_override < 1) throw SchemaError("--steps must be positive");
            run.steps = *steps_override;
        }
        if (out_dir.empty()) {
            if (const char* env = std::getenv("MVPD_OUT_DIR")) out_dir = env;
            if (out_dir.empty()) out_dir = cfg.value("out_dir", ".");
        }

        if (validate->parsed()) return cmd_validate(run);
        if (moments->parsed()) return cmd_moments(run, cfg, out_dir);
        if (laplace->parsed()) return cmd_laplace(run, cfg, out_dir);
        if (simulate->parsed()) return cmd_simulate(run, cfg, out_dir);
        if (futures->parsed()) return cmd_price_futures(run, cfg, out_dir);
        if (probe->parsed()) return cmd_probe(run, cfg);
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
