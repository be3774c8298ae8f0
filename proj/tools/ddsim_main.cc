#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ddsim/bounds.h"
#include "ddsim/config.h"
#include "ddsim/control_group.h"
#include "ddsim/errors.h"
#include "ddsim/json_io.h"
#include "ddsim/rng.h"
#include "ddsim/sweep.h"
#include "ddsim/tolerances.h"

namespace {

using ddsim::Json;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRegime = 3;
constexpr int kExitConvergence = 4;

std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw ddsim::ConfigError("cannot read " + path.string());
    }
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_simulate(const std::string& path, std::size_t workers) {
    std::filesystem::path p(path);
    Json cfg = ddsim::load_json_file(p);
    ddsim::SimulationConfig config = ddsim::parse_simulation_config(cfg, p.parent_path());
    if (workers != 0) {
        config.ensemble.workers = workers;
    }
    ddsim::ConvergenceReport conv;
    ddsim::ErrorEstimate e = ddsim::run_simulation(config, &conv);
    Json out = ddsim::to_json(e);
    out["convergence"] = ddsim::to_json(conv);
    out["k"] = config.k;
    print_json(out);
    return kExitOk;
}

int cmd_sweep(const std::string& path, std::size_t workers) {
    std::filesystem::path p(path);
    Json spec_json = ddsim::load_json_file(p);
    ddsim::SweepSpec spec = ddsim::parse_sweep_spec(spec_json, p.parent_path());
    auto rows = ddsim::run_sweep_to_files(spec, workers);
    Json out;
    out["rows"] = rows.size();
    out["csv"] = spec.output.string() + ".csv";
    out["json"] = spec.output.string() + ".json";
    Json plots = Json::array();
    for (const auto& k : spec.plots) {
        plots.push_back(spec.output.string() + "." + k + ".dat");
    }
    out["plots"] = plots;
    print_json(out);
    return kExitOk;
}

int cmd_bounds(double total_time, double delta_t, double k, std::size_t group_order, bool strict) {
    ddsim::BoundReport r = ddsim::figure_of_merit(total_time, delta_t, k, group_order);
    print_json(ddsim::to_json(r));
    if (strict && (!r.random_bound || (group_order > 0 && !r.deterministic_bound))) {
        std::cerr << "regime violation: a requested bound is outside its regime\n";
        return kExitRegime;
    }
    return kExitOk;
}

int cmd_twirl_check(const std::string& path, std::size_t samples, uint64_t seed) {
    std::filesystem::path p(path);
    ddsim::ControlGroup g = ddsim::group_from_json(ddsim::load_json_file(p), p.filename().string());
    ddsim::Rng rng(seed);
    std::optional<std::size_t> n;
    if (!g.is_finite()) {
        n = samples;
    }
    double basis_max = 0;
    for (const auto& x : ddsim::traceless_hermitian_basis(g.dim())) {
        basis_max = std::max(basis_max, ddsim::spectral_norm(ddsim::twirl(g, x, n, &rng)));
    }
    Json out;
    out["dim"] = g.dim();
    out["order"] = g.order();
    out["kind"] = g.is_finite() ? "finite" : "haar";
    out["irreducible"] = g.is_finite() ? Json(ddsim::is_irreducible(g)) : Json(true);
    out["max_residual"] = basis_max;
    out["tolerance"] = ddsim::tol::irreducible_residual;
    if (n) {
        out["n_samples"] = *n;
    }
    print_json(out);
    return kExitOk;
}

int cmd_volume(int n, int m, double total_time, double delta_t, std::size_t samples, uint64_t seed,
               std::size_t workers) {
    print_json(ddsim::to_json(ddsim::w1_volume_estimate(n, m, total_time, delta_t, samples, seed, workers)));
    return kExitOk;
}

int cmd_fit(const std::string& path, const std::string& x, const std::string& y, const std::string& protocol) {
    ddsim::Table table = ddsim::parse_csv_table(read_text(path));
    if (!protocol.empty()) {
        std::size_t col = table.column("protocol");
        std::erase_if(table.cells, [&](const auto& row) { return row[col] != protocol; });
    }
    ddsim::FitResult f = ddsim::fit_scaling(table, x, y);
    Json out;
    out["slope"] = f.slope;
    out["intercept"] = f.intercept;
    out["r_squared"] = f.r_squared;
    out["rows_used"] = f.rows_used;
    Json ex = Json::array();
    for (const auto& [row, reason] : f.excluded) {
        ex.push_back({{"row", row}, {"reason", reason}});
    }
    out["excluded"] = ex;
    print_json(out);
    return kExitOk;
}

int cmd_plot_data(const std::string& path, const std::string& kind, const std::string& out_path) {
    auto rows = ddsim::rows_from_csv(read_text(path));
    if (out_path.empty()) {
        std::cout << ddsim::plot_data(rows, kind);
    } else {
        ddsim::emit_plot_data(rows, kind, out_path);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamical decoupling simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    std::size_t workers = 0;
    app.add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");

    std::string sim_path;
    auto* sim = app.add_subcommand("simulate", "Run one config, print the error estimate as JSON");
    sim->add_option("config", sim_path, "Config file")->required();

    std::string sweep_path;
    auto* sweep = app.add_subcommand("sweep", "Run a sweep spec, write CSV and JSON tables");
    sweep->add_option("spec", sweep_path, "Sweep spec file")->required();

    double b_t = 0;
    double b_dt = 0;
    double b_k = 0;
    std::size_t b_order = 0;
    bool b_strict = false;
    auto* bounds = app.add_subcommand("bounds", "Print the bound report for the given parameters");
    bounds->add_option("--T", b_t, "Total time")->required();
    bounds->add_option("--delta-t", b_dt, "Pulse interval")->required();
    bounds->add_option("--k", b_k, "Uniform drift bound")->required();
    bounds->add_option("--group-order", b_order, "Group order (0 = Haar)")->required();
    bounds->add_flag("--strict", b_strict, "Exit with status 3 when a bound is outside its regime");

    std::string tw_path;
    std::size_t tw_samples = 4096;
    uint64_t tw_seed = 0;
    auto* tw = app.add_subcommand("twirl-check", "Twirl a traceless basis and report the largest residual");
    tw->add_option("group", tw_path, "Group file")->required();
    tw->add_option("--samples", tw_samples, "Haar samples per twirl");
    tw->add_option("--seed", tw_seed, "Seed for Haar sampling");

    int v_n = 1;
    int v_m = 1;
    double v_t = 1;
    double v_dt = 0.1;
    std::size_t v_samples = 1000000;
    uint64_t v_seed = 0;
    auto* vol = app.add_subcommand("volume", "Monte Carlo volume of the pairing set");
    vol->add_option("--n", v_n, "Points in the first list")->required();
    vol->add_option("--m", v_m, "Points in the second list")->required();
    vol->add_option("--T", v_t, "Total time")->required();
    vol->add_option("--delta-t", v_dt, "Pairing distance")->required();
    vol->add_option("--samples", v_samples, "Sample count");
    vol->add_option("--seed", v_seed, "Seed");

    std::string fit_path;
    std::string fit_x = "delta_t";
    std::string fit_y = "eps_mean";
    auto* fit = app.add_subcommand("fit", "Log-log least-squares fit of two CSV columns");
    fit->add_option("csv", fit_path, "CSV table")->required();
    fit->add_option("--x", fit_x, "x column");
    fit->add_option("--y", fit_y, "y column");
    std::string fit_protocol;
    fit->add_option("--protocol", fit_protocol, "Keep only rows of this protocol (row indices refer to the kept rows)");

    std::string pd_path;
    std::string pd_kind;
    std::string pd_out;
    auto* pd = app.add_subcommand("plot-data", "Write plot data from a sweep CSV");
    pd->add_option("csv", pd_path, "Sweep CSV")->required();
    pd->add_option("--kind", pd_kind, "scaling, crossover or bound-vs-mc")->required();
    pd->add_option("--out", pd_out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*sim) {
            return cmd_simulate(sim_path, workers);
        }
        if (*sweep) {
            return cmd_sweep(sweep_path, workers);
        }
        if (*bounds) {
            return cmd_bounds(b_t, b_dt, b_k, b_order, b_strict);
        }
        if (*tw) {
            return cmd_twirl_check(tw_path, tw_samples, tw_seed);
        }
        if (*vol) {
            return cmd_volume(v_n, v_m, v_t, v_dt, v_samples, v_seed, workers);
        }
        if (*fit) {
            return cmd_fit(fit_path, fit_x, fit_y, fit_protocol);
        }
        if (*pd) {
            return cmd_plot_data(pd_path, pd_kind, pd_out);
        }
    } catch (const ddsim::RegimeViolation& e) {
        std::cerr << "regime violation: " << e.what() << "\n";
        return kExitRegime;
    } catch (const ddsim::ConvergenceFailure& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const ddsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ddsim::DimensionMismatch& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ddsim::InvalidOperator& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ddsim::ClosureViolation& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ddsim::NonUnitaryElement& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
    return kExitOther;
}
