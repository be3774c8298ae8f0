#ifndef DDSIM_SWEEP_H
#define DDSIM_SWEEP_H

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddsim/config.h"
#include "ddsim/json_io.h"

namespace ddsim {

/// A parameter sweep: the simulate-config keys plus
///   "sweep": {"parameter": "delta_t" | "T" | "n_qubits" | "gamma", "values": [...]},
///   "protocol": name or list of names (one row per value and protocol),
///   "output": path prefix for <prefix>.csv and <prefix>.json,
///   "plots": optional list of plot kinds written to <prefix>.<kind>.dat,
///   "record_timing": include wall_time_s in the JSON output (breaks byte-identical reruns).
struct SweepSpec {
    Json base;
    std::string parameter;
    std::vector<double> values;
    std::vector<std::string> protocols;
    std::filesystem::path output;
    std::vector<std::string> plots;
    bool record_timing = false;
    uint64_t master_seed = 0;
};

struct SweepRow {
    std::string protocol;
    std::string parameter;
    double value = 0;
    double delta_t = 0;
    double total_time = 0;
    std::optional<double> gamma;
    std::optional<long> n_qubits;
    double k = 0;
    std::size_t group_order = 0;
    std::size_t substeps = 0;
    std::size_t n_traj = 0;
    uint64_t seed = 0;
    bool worst_case = false;
    double eps_mean = 0;
    double eps_stderr = 0;
    double r = 0;
    std::optional<double> g2r;
    std::optional<double> random_bound;
    std::optional<double> deterministic_bound;
    /// Not written to CSV.
    double wall_time_s = 0;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

SweepSpec parse_sweep_spec(const Json& spec, const std::filesystem::path& base_dir = ".");

/// Simulation config of row `index`, with the derived seed stream_seed(master_seed, index).
Json row_config(const SweepSpec& spec, std::size_t index);
std::size_t row_count(const SweepSpec& spec);

/// Runs every row in sweep order. `workers` overrides the config's worker count when non-zero.
/// All row configs are validated before the first simulation.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::size_t workers = 0);

/// Runs the sweep and writes CSV, JSON and the requested plot files, each atomically.
std::vector<SweepRow> run_sweep_to_files(const SweepSpec& spec, std::size_t workers = 0);

/// Comma separated, header row, 17 significant digits, LF endings; empty field = not applicable.
std::string rows_to_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> rows_from_csv(const std::string& text);
Json rows_to_json(const std::vector<SweepRow>& rows, bool include_timing);

/// Header plus string cells.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> cells;

    std::size_t column(const std::string& name) const;
};

Table parse_csv_table(const std::string& text);

struct FitResult {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
    std::size_t rows_used = 0;
    /// Row index and reason for every excluded row.
    std::vector<std::pair<std::size_t, std::string>> excluded;
};

/// Least-squares line through (log x, log y). When y is "<name>_mean" and a "<name>_stderr" column
/// exists, rows with mean < 3 stderr are excluded as below the noise floor; rows with x <= 0 or
/// y <= 0 are excluded too. Throws ConfigError when fewer than 3 rows remain.
FitResult fit_scaling(const Table& table, const std::string& x_column, const std::string& y_column);
FitResult fit_scaling(const std::vector<SweepRow>& rows, const std::string& x_column, const std::string& y_column);

/// Self-describing plot-data text: comment lines naming columns and units, then a CSV header.
///   scaling:      x, eps_mean, eps_lo, eps_hi, bound   (noise-floor rows dropped)
///   crossover:    tau_corr, eps_random, eps_cyclic     (gamma sweeps with both protocols)
///   bound-vs-mc:  x, eps_mean, eps_stderr, random_bound, deterministic_bound
std::string plot_data(const std::vector<SweepRow>& rows, const std::string& kind);
void emit_plot_data(const std::vector<SweepRow>& rows, const std::string& kind, const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomically(const std::filesystem::path& path, const std::string& content);

/// printf("%.17g").
std::string format_double(double x);

}  // namespace ddsim

#endif
