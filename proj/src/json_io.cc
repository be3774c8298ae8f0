#include "ddsim/json_io.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ddsim/errors.h"

namespace ddsim {

namespace {

bool is_number_pair(const Json& j) {
    return j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number();
}

Complex entry_from_json(const Json& j, const std::string& where) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (is_number_pair(j)) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ConfigError(where + ": expected a number or a [re, im] pair");
}

std::string key_path(const std::string& where, const std::string& key) {
    return where + "/" + key;
}

std::string type_error(const std::string& where, const char* expected) {
    return where + ": expected " + expected;
}

// Line and column of a byte offset, both 1-based.
std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t offset) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(offset, text.size()); i++) {
        if (text[i] == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
    }
    return {line, col};
}

// Coupling operators are read as given (no trace removal): the trace of J_a is not a global phase.
SystemTerm system_term_from_json(const Json& j, const std::string& where) {
    if (j.is_object() && j.contains("variant")) {
        std::string variant = get_string(j, "variant", where);
        if (variant == "static") {
            return StaticDrift{operator_from_json(require_key(j, "H", where), where + "/H")};
        }
        if (variant == "piecewise") {
            const Json& hs = require_key(j, "H", where);
            if (!hs.is_array()) {
                throw ConfigError(where + "/H: expected a list of matrices");
            }
            PiecewiseDrift p;
            p.boundaries = require_key(j, "boundaries", where).get<std::vector<double>>();
            for (std::size_t i = 0; i < hs.size(); i++) {
                p.hs.push_back(operator_from_json(hs[i], where + "/H/" + std::to_string(i)));
            }
            return p;
        }
        throw ConfigError(where + ": coupling system operators must be static or piecewise");
    }
    return StaticDrift{operator_from_json(j, where)};
}

}  // namespace

const Json& require_key(const Json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError(type_error(where, "an object"));
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError(where + ": missing required key '" + key + "'");
    }
    return *it;
}

double get_double(const Json& obj, const std::string& key, const std::string& where) {
    const Json& v = require_key(obj, key, where);
    if (!v.is_number()) {
        throw ConfigError(type_error(key_path(where, key), "a number"));
    }
    return v.get<double>();
}

double get_double_or(const Json& obj, const std::string& key, double fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    return get_double(obj, key, where);
}

std::size_t get_size_or(const Json& obj, const std::string& key, std::size_t fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const Json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigError(type_error(key_path(where, key), "a non-negative integer"));
    }
    return v.get<std::size_t>();
}

uint64_t get_u64_or(const Json& obj, const std::string& key, uint64_t fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const Json& v = obj.at(key);
    if (v.is_number_unsigned()) {
        return v.get<uint64_t>();
    }
    if (v.is_number_integer() && v.get<long long>() >= 0) {
        return static_cast<uint64_t>(v.get<long long>());
    }
    throw ConfigError(type_error(key_path(where, key), "an unsigned 64-bit integer"));
}

bool get_bool_or(const Json& obj, const std::string& key, bool fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_boolean()) {
        throw ConfigError(type_error(key_path(where, key), "a boolean"));
    }
    return obj.at(key).get<bool>();
}

std::string get_string(const Json& obj, const std::string& key, const std::string& where) {
    const Json& v = require_key(obj, key, where);
    if (!v.is_string()) {
        throw ConfigError(type_error(key_path(where, key), "a string"));
    }
    return v.get<std::string>();
}

Operator operator_from_json(const Json& j, const std::string& where) {
    if (j.is_object()) {
        const Json& terms = require_key(j, "pauli_sum", where);
        if (!terms.is_array() || terms.empty()) {
            throw ConfigError(type_error(key_path(where, "pauli_sum"), "a nonempty list of [coef, label]"));
        }
        Operator out;
        for (std::size_t i = 0; i < terms.size(); i++) {
            std::string at = key_path(where, "pauli_sum/" + std::to_string(i));
            const Json& term = terms[i];
            if (!term.is_array() || term.size() != 2 || !term[1].is_string()) {
                throw ConfigError(type_error(at, "[coef, \"PAULI\"]"));
            }
            Operator p;
            try {
                p = pauli::from_label(term[1].get<std::string>());
            } catch (const Error& e) {
                throw ConfigError(at + ": " + e.what());
            }
            Complex c = entry_from_json(term[0], at + "/0");
            if (out.size() == 0) {
                out = Operator::Zero(p.rows(), p.cols());
            } else if (out.rows() != p.rows()) {
                throw ConfigError(at + ": Pauli labels differ in length");
            }
            out += c * p;
        }
        return out;
    }
    if (!j.is_array() || j.empty()) {
        throw ConfigError(type_error(where, "a matrix (nonempty list)"));
    }
    bool all_pairs = true;
    for (const auto& e : j) {
        all_pairs = all_pairs && is_number_pair(e);
    }
    auto n = j.size();
    auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (all_pairs && n >= 4 && d * d == n) {
        Operator out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < n; i++) {
            out(static_cast<Eigen::Index>(i / d), static_cast<Eigen::Index>(i % d)) =
                entry_from_json(j[i], where + "/" + std::to_string(i));
        }
        return out;
    }
    auto rows = static_cast<Eigen::Index>(n);
    Operator out(rows, rows);
    for (std::size_t r = 0; r < n; r++) {
        const Json& row = j[r];
        std::string at = where + "/" + std::to_string(r);
        if (!row.is_array() || row.size() != n) {
            throw ConfigError(at + ": expected a row of " + std::to_string(n) + " entries (matrix must be square)");
        }
        for (std::size_t c = 0; c < n; c++) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                entry_from_json(row[c], at + "/" + std::to_string(c));
        }
    }
    return out;
}

Json operator_to_json(const Operator& a) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < a.rows(); r++) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < a.cols(); c++) {
            row.push_back({a(r, c).real(), a(r, c).imag()});
        }
        rows.push_back(row);
    }
    return rows;
}

StateVector state_from_json(const Json& j, std::size_t dim, const std::string& where) {
    if (j.is_string()) {
        try {
            return named_state(j.get<std::string>(), dim);
        } catch (const Error& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    if (!j.is_array() || j.size() != dim) {
        throw ConfigError(where + ": expected \"zero\", \"plus\", or a list of " + std::to_string(dim) + " amplitudes");
    }
    StateVector psi(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; i++) {
        psi(static_cast<Eigen::Index>(i)) = entry_from_json(j[i], where + "/" + std::to_string(i));
    }
    try {
        require_normalized(psi, where);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return psi;
}

Json state_to_json(const StateVector& psi) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < psi.size(); i++) {
        out.push_back({psi(i).real(), psi(i).imag()});
    }
    return out;
}

ControlGroup group_from_json(const Json& j, const std::string& where) {
    std::string kind = get_string(j, "kind", where);
    try {
        if (kind == "pauli") {
            return pauli_group(static_cast<int>(get_size_or(j, "n", 0, where)));
        }
        if (kind == "haar") {
            return ControlGroup::haar(get_size_or(j, "dim", 0, where));
        }
        if (kind == "trivial") {
            return trivial_group(get_size_or(j, "dim", 0, where));
        }
        if (kind == "custom") {
            const Json& elems = require_key(j, "elements", where);
            if (!elems.is_array()) {
                throw ConfigError(type_error(key_path(where, "elements"), "a list of matrices"));
            }
            std::vector<Operator> ops;
            for (std::size_t i = 0; i < elems.size(); i++) {
                ops.push_back(operator_from_json(elems[i], key_path(where, "elements/" + std::to_string(i))));
            }
            std::vector<std::string> labels;
            if (j.contains("labels")) {
                labels = j.at("labels").get<std::vector<std::string>>();
            }
            return custom_group(ops, labels);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const Json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    throw ConfigError(key_path(where, "kind") + ": unknown group kind '" + kind + "'");
}

DriftModel model_from_json(const Json& j, const std::string& where) {
    std::string variant = get_string(j, "variant", where);
    try {
        if (variant == "static") {
            return make_static(operator_from_json(require_key(j, "H", where), key_path(where, "H")));
        }
        if (variant == "piecewise") {
            const Json& b = require_key(j, "boundaries", where);
            const Json& hs = require_key(j, "H", where);
            if (!b.is_array() || !hs.is_array()) {
                throw ConfigError(where + ": 'boundaries' and 'H' must be lists");
            }
            std::vector<Operator> ops;
            for (std::size_t i = 0; i < hs.size(); i++) {
                ops.push_back(operator_from_json(hs[i], key_path(where, "H/" + std::to_string(i))));
            }
            return make_piecewise(b.get<std::vector<double>>(), ops);
        }
        if (variant == "telegraph") {
            DriftModel m = make_telegraph(operator_from_json(require_key(j, "H_A", where), key_path(where, "H_A")),
                                          operator_from_json(require_key(j, "H_B", where), key_path(where, "H_B")),
                                          get_double(j, "gamma", where));
            if (j.contains("switches")) {
                auto& tg = std::get<TelegraphDrift>(m);
                tg.switches = j.at("switches").get<std::vector<double>>();
                tg.horizon = get_double(j, "horizon", where);
                for (std::size_t i = 0; i < tg.switches->size(); i++) {
                    double s = (*tg.switches)[i];
                    if (s < 0 || s >= tg.horizon || (i > 0 && s <= (*tg.switches)[i - 1])) {
                        throw ConfigError(key_path(where, "switches") +
                                          ": switch times must be strictly increasing within [0, horizon)");
                    }
                }
            }
            return m;
        }
        if (variant == "open-system") {
            std::size_t d_s = get_size_or(j, "d_S", 0, where);
            std::size_t d_e = get_size_or(j, "d_E", 0, where);
            Operator h_env = j.contains("H_E") ? operator_from_json(j.at("H_E"), key_path(where, "H_E"))
                                               : zero_operator(d_e);
            std::vector<Coupling> couplings;
            if (j.contains("couplings")) {
                const Json& cs = j.at("couplings");
                if (!cs.is_array()) {
                    throw ConfigError(type_error(key_path(where, "couplings"), "a list"));
                }
                for (std::size_t i = 0; i < cs.size(); i++) {
                    std::string at = key_path(where, "couplings/" + std::to_string(i));
                    couplings.push_back({system_term_from_json(require_key(cs[i], "J", at), key_path(at, "J")),
                                         operator_from_json(require_key(cs[i], "B", at), key_path(at, "B"))});
                }
            }
            return make_open_system(d_s, d_e, h_env, std::move(couplings));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const Json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    throw ConfigError(key_path(where, "variant") + ": unknown model variant '" + variant + "'");
}

Json parse_json_text(const std::string& text, const std::string& name) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        std::ostringstream msg;
        msg << name << ":" << line << ":" << col << ": JSON syntax error";
        std::string what = e.what();
        auto pos = what.find("syntax error");
        if (pos != std::string::npos) {
            msg << " (" << what.substr(pos) << ")";
        }
        throw ConfigError(msg.str());
    }
}

Json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_json_text(buf.str(), path.string());
}

Json resolve_reference(const Json& j, const std::filesystem::path& base_dir, const std::string& where) {
    if (j.is_string()) {
        std::filesystem::path p = j.get<std::string>();
        if (p.is_relative()) {
            p = base_dir / p;
        }
        if (!std::filesystem::exists(p)) {
            throw ConfigError(where + ": referenced file '" + p.string() + "' does not exist");
        }
        return load_json_file(p);
    }
    return j;
}

Json to_json(const ErrorEstimate& e) {
    Json out{{"mean", e.mean}, {"stderr", e.standard_error}, {"n_traj", e.n_traj}, {"seed", e.seed}};
    if (e.argmax_state) {
        out["argmax_state"] = state_to_json(*e.argmax_state);
    }
    if (e.grid_oracle) {
        out["grid_oracle"] = *e.grid_oracle;
    }
    if (e.lower_bound) {
        out["note"] = "worst-case value found by multistart search over initial states; a lower bound on the "
                      "true maximum of the estimated mean error";
    }
    return out;
}

Json to_json(const BoundReport& r) {
    auto opt = [](const std::optional<double>& v) -> Json { return v ? Json(*v) : Json("regime violated"); };
    Json out{{"T", r.total_time},
             {"delta_t", r.delta_t},
             {"k", r.k},
             {"group_order", r.group_order},
             {"R", r.r},
             {"g2R", r.g2r ? Json(*r.g2r) : Json(nullptr)},
             {"random_bound", opt(r.random_bound)},
             {"deterministic_bound", opt(r.deterministic_bound)},
             {"hbar_norm_bound", opt(r.hbar_norm_bound)},
             {"regime",
              {{"4Tdtk2_lt_1", r.random_regime},
               {"kTc_lt_1", r.convergence_regime},
               {"HbarT_lt_1", r.short_time_regime}}},
             {"recommendation", r.recommendation}};
    if (r.group_order == 0) {
        out["deterministic_bound"] = nullptr;
        out["hbar_norm_bound"] = nullptr;
    }
    return out;
}

Json to_json(const VolumeEstimate& v) {
    return Json{{"estimate", v.estimate},
                {"stderr", v.standard_error},
                {"appendix_bound", v.appendix_bound},
                {"n_samples", v.n_samples},
                {"hits", v.hits}};
}

Json to_json(const ConvergenceReport& c) {
    return Json{{"substeps", c.substeps}, {"exact", c.exact}, {"halving_difference", c.difference}};
}

}  // namespace ddsim
