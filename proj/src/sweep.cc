#include "ddsim/sweep.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "ddsim/bounds.h"
#include "ddsim/errors.h"
#include "ddsim/rng.h"
#include "ddsim/tolerances.h"

namespace ddsim {
namespace {

const std::vector<std::string> kCsvColumns = {
    "protocol", "parameter", "value",    "delta_t",     "T",          "gamma",        "n_qubits",
    "k",        "group_order", "substeps", "n_traj",    "seed",       "worst_case",   "eps_mean",
    "eps_stderr", "R",       "g2R",      "random_bound", "deterministic_bound"};

const std::vector<std::string> kSweepParameters = {"delta_t", "T", "n_qubits", "gamma"};

std::string opt_field(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    if (s.empty()) {
        throw ConfigError(where + ": empty numeric field");
    }
    char* end = nullptr;
    double x = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) {
        throw ConfigError(where + ": not a number: '" + s + "'");
    }
    return x;
}

uint64_t parse_u64(const std::string& s, const std::string& where) {
    if (s.empty() || s[0] == '-') {
        throw ConfigError(where + ": not an unsigned integer: '" + s + "'");
    }
    char* end = nullptr;
    unsigned long long x = std::strtoull(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size()) {
        throw ConfigError(where + ": not an unsigned integer: '" + s + "'");
    }
    return x;
}

std::optional<double> parse_opt_double(const std::string& s, const std::string& where) {
    if (s.empty()) {
        return std::nullopt;
    }
    return parse_double(s, where);
}

bool below_noise_floor(double mean, double stderr_) { return mean < 3.0 * stderr_; }

std::size_t value_count(const SweepSpec& spec) { return spec.values.size(); }

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::size_t Table::column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        throw ConfigError("no column named '" + name + "'");
    }
    return static_cast<std::size_t>(it - columns.begin());
}

SweepSpec parse_sweep_spec(const Json& spec, const std::filesystem::path& base_dir) {
    if (!spec.is_object()) {
        throw ConfigError("sweep spec must be a JSON object");
    }
    SweepSpec out;
    out.base = resolve_config_references(spec, base_dir);

    const Json& sw = require_key(spec, "sweep", "");
    out.parameter = get_string(sw, "parameter", "sweep");
    if (std::find(kSweepParameters.begin(), kSweepParameters.end(), out.parameter) == kSweepParameters.end()) {
        throw ConfigError("sweep/parameter: expected one of delta_t, T, n_qubits, gamma, got '" + out.parameter + "'");
    }
    const Json& vals = require_key(sw, "values", "sweep");
    if (!vals.is_array() || vals.empty()) {
        throw ConfigError("sweep/values: must be a nonempty list");
    }
    for (std::size_t i = 0; i < vals.size(); i++) {
        if (!vals[i].is_number()) {
            throw ConfigError("sweep/values/" + std::to_string(i) + ": must be a number");
        }
        out.values.push_back(vals[i].get<double>());
    }
    if (out.values.size() > 1) {
        bool up = out.values[1] > out.values[0];
        for (std::size_t i = 1; i < out.values.size(); i++) {
            if (up ? !(out.values[i] > out.values[i - 1]) : !(out.values[i] < out.values[i - 1])) {
                throw ConfigError("sweep/values: must be strictly monotone");
            }
        }
    }
    if (out.parameter == "n_qubits") {
        for (double v : out.values) {
            if (v != std::floor(v) || v < 1) {
                throw ConfigError("sweep/values: n_qubits values must be positive integers");
            }
        }
    }

    const Json& prot = require_key(spec, "protocol", "");
    if (prot.is_string()) {
        out.protocols.push_back(prot.get<std::string>());
    } else if (prot.is_array() && !prot.empty()) {
        for (std::size_t i = 0; i < prot.size(); i++) {
            if (!prot[i].is_string()) {
                throw ConfigError("protocol/" + std::to_string(i) + ": must be a protocol name");
            }
            out.protocols.push_back(prot[i].get<std::string>());
        }
    } else {
        throw ConfigError("protocol: must be a protocol name or a nonempty list of names");
    }
    for (const auto& p : out.protocols) {
        protocol_from_string(p);
    }

    out.output = base_dir / get_string(spec, "output", "");
    if (spec.contains("plots")) {
        const Json& plots = spec.at("plots");
        if (!plots.is_array()) {
            throw ConfigError("plots: must be a list of plot kinds");
        }
        for (const auto& p : plots) {
            std::string kind = p.is_string() ? p.get<std::string>() : std::string();
            if (kind != "scaling" && kind != "crossover" && kind != "bound-vs-mc") {
                throw ConfigError("plots: unknown plot kind (expected scaling, crossover or bound-vs-mc)");
            }
            out.plots.push_back(kind);
        }
    }
    out.record_timing = get_bool_or(spec, "record_timing", false, "");
    out.master_seed = get_u64_or(spec, "master_seed", 0, "");
    if (out.parameter == "gamma" &&
        !(out.base.contains("model") && out.base["model"].is_object() &&
          out.base["model"].value("variant", "") == "telegraph")) {
        throw ConfigError("sweep/parameter: gamma sweeps need a telegraph model");
    }
    return out;
}

std::size_t row_count(const SweepSpec& spec) { return value_count(spec) * spec.protocols.size(); }

Json row_config(const SweepSpec& spec, std::size_t index) {
    if (index >= row_count(spec)) {
        throw ConfigError("row index out of range");
    }
    std::size_t vi = index / spec.protocols.size();
    std::size_t pi = index % spec.protocols.size();
    double v = spec.values[vi];

    Json cfg = spec.base;
    cfg.erase("sweep");
    cfg.erase("output");
    cfg.erase("plots");
    cfg.erase("record_timing");
    cfg["protocol"] = spec.protocols[pi];
    if (spec.parameter == "delta_t") {
        cfg["delta_t"] = v;
    } else if (spec.parameter == "T") {
        cfg["T"] = v;
        if (spec.protocols[pi] == "none") {
            cfg.erase("delta_t");
        }
    } else if (spec.parameter == "n_qubits") {
        cfg["n_qubits"] = static_cast<long>(v);
    } else {
        cfg["model"]["gamma"] = v;
    }
    cfg["master_seed"] = stream_seed(spec.master_seed, index);
    return cfg;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::size_t workers) {
    std::size_t n = row_count(spec);
    std::vector<SimulationConfig> configs;
    configs.reserve(n);
    for (std::size_t i = 0; i < n; i++) {
        try {
            configs.push_back(parse_simulation_config(row_config(spec, i)));
        } catch (const ConfigError& e) {
            throw ConfigError("sweep row " + std::to_string(i) + ": " + e.what());
        }
        if (workers != 0) {
            configs.back().ensemble.workers = workers;
        }
    }

    std::vector<SweepRow> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; i++) {
        const SimulationConfig& c = configs[i];
        auto start = std::chrono::steady_clock::now();
        ErrorEstimate e = run_simulation(c);
        auto stop = std::chrono::steady_clock::now();

        SweepRow r;
        r.protocol = to_string(c.protocol.kind);
        r.parameter = spec.parameter;
        r.value = spec.values[i / spec.protocols.size()];
        r.delta_t = c.protocol.delta_t;
        r.total_time = c.protocol.total_time;
        if (const auto* tg = std::get_if<TelegraphDrift>(&c.model)) {
            r.gamma = tg->gamma;
        }
        if (c.n_qubits) {
            r.n_qubits = *c.n_qubits;
        }
        r.k = c.k;
        r.group_order = protocol_group_order(c.protocol);
        r.substeps = c.ensemble.substeps;
        r.n_traj = c.ensemble.n_traj;
        r.seed = c.ensemble.master_seed;
        r.worst_case = c.worst_case;
        r.eps_mean = e.mean;
        r.eps_stderr = e.standard_error;
        BoundReport b = figure_of_merit(r.total_time, r.delta_t, r.k, r.group_order);
        r.r = b.r;
        r.g2r = b.g2r;
        r.random_bound = b.random_bound;
        r.deterministic_bound = b.deterministic_bound;
        r.wall_time_s = std::chrono::duration<double>(stop - start).count();
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<SweepRow> run_sweep_to_files(const SweepSpec& spec, std::size_t workers) {
    std::vector<SweepRow> rows = run_sweep(spec, workers);
    std::vector<std::pair<std::filesystem::path, std::string>> files;
    files.emplace_back(spec.output.string() + ".csv", rows_to_csv(rows));
    files.emplace_back(spec.output.string() + ".json", rows_to_json(rows, spec.record_timing).dump(2) + "\n");
    for (const auto& kind : spec.plots) {
        files.emplace_back(spec.output.string() + "." + kind + ".dat", plot_data(rows, kind));
    }
    for (const auto& [path, content] : files) {
        write_atomically(path, content);
    }
    return rows;
}

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
    std::string out;
    for (std::size_t i = 0; i < kCsvColumns.size(); i++) {
        out += (i ? "," : "") + kCsvColumns[i];
    }
    out += "\n";
    for (const auto& r : rows) {
        std::vector<std::string> f = {r.protocol,
                                      r.parameter,
                                      format_double(r.value),
                                      format_double(r.delta_t),
                                      format_double(r.total_time),
                                      opt_field(r.gamma),
                                      r.n_qubits ? std::to_string(*r.n_qubits) : std::string(),
                                      format_double(r.k),
                                      std::to_string(r.group_order),
                                      std::to_string(r.substeps),
                                      std::to_string(r.n_traj),
                                      std::to_string(r.seed),
                                      r.worst_case ? "true" : "false",
                                      format_double(r.eps_mean),
                                      format_double(r.eps_stderr),
                                      format_double(r.r),
                                      opt_field(r.g2r),
                                      opt_field(r.random_bound),
                                      opt_field(r.deterministic_bound)};
        for (std::size_t i = 0; i < f.size(); i++) {
            out += (i ? "," : "") + f[i];
        }
        out += "\n";
    }
    return out;
}

Table parse_csv_table(const std::string& text) {
    std::vector<std::string> lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    if (lines.empty()) {
        throw ConfigError("CSV: missing header row");
    }
    Table t;
    t.columns = split(lines[0], ',');
    for (std::size_t i = 1; i < lines.size(); i++) {
        auto cells = split(lines[i], ',');
        if (cells.size() != t.columns.size()) {
            throw ConfigError("CSV line " + std::to_string(i + 1) + ": expected " + std::to_string(t.columns.size()) +
                              " fields, got " + std::to_string(cells.size()));
        }
        t.cells.push_back(std::move(cells));
    }
    return t;
}

std::vector<SweepRow> rows_from_csv(const std::string& text) {
    Table t = parse_csv_table(text);
    if (t.columns != kCsvColumns) {
        throw ConfigError("CSV: header does not match the sweep row schema");
    }
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < t.cells.size(); i++) {
        const auto& c = t.cells[i];
        std::string at = "CSV line " + std::to_string(i + 2);
        SweepRow r;
        r.protocol = c[0];
        r.parameter = c[1];
        r.value = parse_double(c[2], at);
        r.delta_t = parse_double(c[3], at);
        r.total_time = parse_double(c[4], at);
        r.gamma = parse_opt_double(c[5], at);
        if (!c[6].empty()) {
            r.n_qubits = static_cast<long>(parse_u64(c[6], at));
        }
        r.k = parse_double(c[7], at);
        r.group_order = parse_u64(c[8], at);
        r.substeps = parse_u64(c[9], at);
        r.n_traj = parse_u64(c[10], at);
        r.seed = parse_u64(c[11], at);
        if (c[12] != "true" && c[12] != "false") {
            throw ConfigError(at + ": worst_case must be true or false");
        }
        r.worst_case = c[12] == "true";
        r.eps_mean = parse_double(c[13], at);
        r.eps_stderr = parse_double(c[14], at);
        r.r = parse_double(c[15], at);
        r.g2r = parse_opt_double(c[16], at);
        r.random_bound = parse_opt_double(c[17], at);
        r.deterministic_bound = parse_opt_double(c[18], at);
        rows.push_back(std::move(r));
    }
    return rows;
}

Json rows_to_json(const std::vector<SweepRow>& rows, bool include_timing) {
    auto opt = [](const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); };
    Json out = Json::array();
    for (const auto& r : rows) {
        Json j;
        j["protocol"] = r.protocol;
        j["parameter"] = r.parameter;
        j["value"] = r.value;
        j["delta_t"] = r.delta_t;
        j["T"] = r.total_time;
        j["gamma"] = opt(r.gamma);
        j["n_qubits"] = r.n_qubits ? Json(*r.n_qubits) : Json(nullptr);
        j["k"] = r.k;
        j["group_order"] = r.group_order;
        j["substeps"] = r.substeps;
        j["n_traj"] = r.n_traj;
        j["seed"] = r.seed;
        j["worst_case"] = r.worst_case;
        j["eps_mean"] = r.eps_mean;
        j["eps_stderr"] = r.eps_stderr;
        j["R"] = r.r;
        j["g2R"] = opt(r.g2r);
        j["random_bound"] = opt(r.random_bound);
        j["deterministic_bound"] = opt(r.deterministic_bound);
        if (include_timing) {
            j["wall_time_s"] = r.wall_time_s;
        }
        out.push_back(std::move(j));
    }
    return out;
}

FitResult fit_scaling(const Table& table, const std::string& x_column, const std::string& y_column) {
    std::size_t xi = table.column(x_column);
    std::size_t yi = table.column(y_column);
    std::optional<std::size_t> si;
    const std::string suffix = "_mean";
    if (y_column.size() > suffix.size() && y_column.ends_with(suffix)) {
        std::string s = y_column.substr(0, y_column.size() - suffix.size()) + "_stderr";
        if (std::find(table.columns.begin(), table.columns.end(), s) != table.columns.end()) {
            si = table.column(s);
        }
    }

    FitResult fit;
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < table.cells.size(); i++) {
        const auto& row = table.cells[i];
        std::string at = "row " + std::to_string(i);
        double x = parse_double(row[xi], at);
        double y = parse_double(row[yi], at);
        if (!(x > 0) || !(y > 0)) {
            fit.excluded.emplace_back(i, "non-positive value");
            continue;
        }
        if (si && below_noise_floor(y, parse_double(row[*si], at))) {
            fit.excluded.emplace_back(i, "below noise floor (mean < 3 stderr)");
            continue;
        }
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    if (lx.size() < 3) {
        throw ConfigError("fit needs at least 3 usable rows, got " + std::to_string(lx.size()));
    }
    auto n = static_cast<double>(lx.size());
    double mx = 0;
    double my = 0;
    for (std::size_t i = 0; i < lx.size(); i++) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0;
    double sxy = 0;
    double syy = 0;
    for (std::size_t i = 0; i < lx.size(); i++) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0) {
        throw ConfigError("fit needs at least two distinct x values");
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < lx.size(); i++) {
        double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
    fit.rows_used = lx.size();
    return fit;
}

FitResult fit_scaling(const std::vector<SweepRow>& rows, const std::string& x_column, const std::string& y_column) {
    return fit_scaling(parse_csv_table(rows_to_csv(rows)), x_column, y_column);
}

std::string plot_data(const std::vector<SweepRow>& rows, const std::string& kind) {
    if (rows.empty()) {
        throw ConfigError("plot data needs at least one row");
    }
    std::ostringstream out;
    if (kind == "scaling" || kind == "bound-vs-mc") {
        const std::string& param = rows.front().parameter;
        out << "# kind: " << kind << "\n";
        out << "# x: swept parameter " << param << (param == "n_qubits" || param == "gamma" ? "" : " (time units)")
            << (param == "gamma" ? " (switching rate, inverse time units)" : "") << "\n";
        out << "# eps_*: error probability (dimensionless)\n";
        if (kind == "scaling") {
            out << "# eps_lo, eps_hi: eps_mean -/+ " << tol::z99 << " eps_stderr\n";
            out << "# bound: random_bound for random protocols, deterministic_bound for cyclic ones\n";
            out << "protocol,x,eps_mean,eps_lo,eps_hi,bound\n";
            std::vector<std::string> dropped;
            std::size_t kept = 0;
            for (std::size_t i = 0; i < rows.size(); i++) {
                const SweepRow& r = rows[i];
                if (!(r.eps_mean > 0) || below_noise_floor(r.eps_mean, r.eps_stderr)) {
                    dropped.push_back("row " + std::to_string(i) + " (" + r.protocol + ", x=" + format_double(r.value) +
                                      ")");
                    continue;
                }
                std::optional<double> bound;
                if (r.protocol == "random" || r.protocol == "hybrid-cycle" || r.protocol == "hybrid-decoupler") {
                    bound = r.random_bound;
                } else if (r.protocol == "cyclic") {
                    bound = r.deterministic_bound;
                }
                out << r.protocol << "," << format_double(r.value) << "," << format_double(r.eps_mean) << ","
                    << format_double(r.eps_mean - tol::z99 * r.eps_stderr) << ","
                    << format_double(r.eps_mean + tol::z99 * r.eps_stderr) << "," << opt_field(bound) << "\n";
                kept++;
            }
            if (kept == 0) {
                std::string msg = "scaling plot is empty after noise-floor filtering; dropped:";
                for (const auto& d : dropped) {
                    msg += " " + d;
                }
                throw ConfigError(msg);
            }
        } else {
            out << "# random_bound, deterministic_bound: empty outside the bound's regime\n";
            out << "protocol,x,eps_mean,eps_stderr,random_bound,deterministic_bound\n";
            for (const auto& r : rows) {
                out << r.protocol << "," << format_double(r.value) << "," << format_double(r.eps_mean) << ","
                    << format_double(r.eps_stderr) << "," << opt_field(r.random_bound) << ","
                    << opt_field(r.deterministic_bound) << "\n";
            }
        }
        return out.str();
    }
    if (kind == "crossover") {
        std::map<double, std::pair<std::optional<double>, std::optional<double>>> by_gamma;
        std::vector<double> order;
        for (const auto& r : rows) {
            if (!r.gamma) {
                throw ConfigError("crossover plot needs rows from a telegraph model");
            }
            if (!by_gamma.contains(*r.gamma)) {
                order.push_back(*r.gamma);
            }
            auto& slot = by_gamma[*r.gamma];
            if (r.protocol == "random") {
                slot.first = r.eps_mean;
            } else if (r.protocol == "cyclic") {
                slot.second = r.eps_mean;
            }
        }
        out << "# kind: crossover\n";
        out << "# tau_corr: telegraph correlation time 1/(2 gamma) (time units)\n";
        out << "# eps_random, eps_cyclic: error probability (dimensionless)\n";
        out << "tau_corr,eps_random,eps_cyclic\n";
        for (double g : order) {
            const auto& [er, ec] = by_gamma[g];
            if (!er || !ec) {
                throw ConfigError("crossover plot needs both random and cyclic rows at gamma=" + format_double(g));
            }
            out << format_double(1.0 / (2.0 * g)) << "," << format_double(*er) << "," << format_double(*ec) << "\n";
        }
        return out.str();
    }
    throw ConfigError("unknown plot kind '" + kind + "' (expected scaling, crossover or bound-vs-mc)");
}

void emit_plot_data(const std::vector<SweepRow>& rows, const std::string& kind, const std::filesystem::path& path) {
    write_atomically(path, plot_data(rows, kind));
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
    static std::atomic<unsigned long> counter{0};
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(counter.fetch_add(1));
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw Error("cannot open " + tmp.string() + " for writing");
        }
        f << content;
        f.flush();
        if (!f) {
            f.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot move output into place at " + path.string());
    }
}

}  // namespace ddsim
