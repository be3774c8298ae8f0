#include "ddsim/config.h"

#include <cmath>
#include <sstream>

#include "ddsim/errors.h"

namespace ddsim {

namespace {

Operator lift(const Operator& h, int n_qubits, int qubit) {
    Operator out = identity(1);
    for (int q = 0; q < n_qubits; q++) {
        out = tensor(out, q == qubit ? h : pauli::i2());
    }
    return out;
}

Operator lift_sum(const Operator& h, int n_qubits) {
    Operator out = Operator::Zero(Eigen::Index{1} << n_qubits, Eigen::Index{1} << n_qubits);
    for (int q = 0; q < n_qubits; q++) {
        out += lift(h, n_qubits, q);
    }
    return out;
}

std::vector<std::size_t> order_from_json(const Json& j, const ControlGroup& group, const std::string& where) {
    if (!j.is_array()) {
        throw ConfigError(where + ": expected a list of element labels");
    }
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < j.size(); i++) {
        if (j[i].is_string()) {
            try {
                order.push_back(group.index_of_label(j[i].get<std::string>()));
            } catch (const ConfigError& e) {
                throw ConfigError(where + "/" + std::to_string(i) + ": " + e.what());
            }
        } else if (j[i].is_number_unsigned()) {
            order.push_back(j[i].get<std::size_t>());
        } else {
            throw ConfigError(where + "/" + std::to_string(i) + ": expected a label or an element index");
        }
    }
    return order;
}

Json group_json_with_qubits(Json g, std::optional<int> n_qubits) {
    if (n_qubits && g.is_object() && g.value("kind", "") == "pauli") {
        g["n"] = *n_qubits;
    }
    if (n_qubits && g.is_object() && (g.value("kind", "") == "haar" || g.value("kind", "") == "trivial")) {
        g["dim"] = std::size_t{1} << *n_qubits;
    }
    return g;
}

}  // namespace

DriftModel collective_model(const DriftModel& single_qubit, int n_qubits) {
    if (n_qubits < 1 || n_qubits > 6) {
        throw ConfigError("n_qubits must be in [1, 6]");
    }
    if (system_dim(single_qubit) != 2 || is_open_system(single_qubit)) {
        throw ConfigError("n_qubits needs a closed one-qubit model to lift");
    }
    if (const auto* s = std::get_if<StaticDrift>(&single_qubit)) {
        return make_static(lift_sum(s->h, n_qubits));
    }
    if (const auto* p = std::get_if<PiecewiseDrift>(&single_qubit)) {
        std::vector<Operator> hs;
        for (const auto& h : p->hs) {
            hs.push_back(lift_sum(h, n_qubits));
        }
        return make_piecewise(p->boundaries, hs);
    }
    const auto& t = std::get<TelegraphDrift>(single_qubit);
    return make_telegraph(lift_sum(t.h_a, n_qubits), lift_sum(t.h_b, n_qubits), t.gamma);
}

Json resolve_config_references(const Json& config, const std::filesystem::path& base_dir) {
    if (!config.is_object()) {
        throw ConfigError("config: expected a JSON object at top level");
    }
    Json out = config;
    if (out.contains("model")) {
        out["model"] = resolve_reference(out["model"], base_dir, "/model");
    }
    if (out.contains("group")) {
        out["group"] = resolve_reference(out["group"], base_dir, "/group");
    }
    if (out.contains("decouplers") && out["decouplers"].is_array()) {
        for (std::size_t i = 0; i < out["decouplers"].size(); i++) {
            Json& d = out["decouplers"][i];
            if (d.is_object() && d.contains("group")) {
                d["group"] = resolve_reference(d["group"], base_dir, "/decouplers/" + std::to_string(i) + "/group");
            }
        }
    }
    return out;
}

SimulationConfig parse_simulation_config(const Json& raw, const std::filesystem::path& base_dir) {
    Json config = resolve_config_references(raw, base_dir);
    SimulationConfig out;
    const std::string root;

    if (config.contains("n_qubits")) {
        out.n_qubits = static_cast<int>(get_size_or(config, "n_qubits", 1, root));
    }
    DriftModel model = model_from_json(require_key(config, "model", root), "/model");
    if (out.n_qubits) {
        model = collective_model(model, *out.n_qubits);
    }
    if (config.contains("k_scale")) {
        double k = get_double(config, "k_scale", root);
        if (!(k >= 0)) {
            throw ConfigError("/k_scale: must be >= 0");
        }
        model = rescale(model, k);
    }
    out.model = std::move(model);
    out.k = is_open_system(out.model) ? noise_strength_lambda(out.model) : uniform_bound_k(out.model);
    const std::size_t dim = system_dim(out.model);

    ProtocolSpec& p = out.protocol;
    p.kind = config.contains("protocol") ? protocol_from_string(get_string(config, "protocol", root))
                                         : ProtocolKind::none;
    p.total_time = get_double(config, "T", root);
    if (!(p.total_time > 0)) {
        throw ConfigError("/T: must be positive");
    }
    p.delta_t = get_double_or(config, "delta_t", p.kind == ProtocolKind::none ? p.total_time : 0.0, root);
    if (!(p.delta_t > 0)) {
        throw ConfigError("/delta_t: must be positive");
    }
    p.close_frame = get_bool_or(config, "close_frame", false, root);
    if (p.kind == ProtocolKind::random || p.kind == ProtocolKind::cyclic || p.kind == ProtocolKind::hybrid_cycle) {
        Json g = group_json_with_qubits(require_key(config, "group", root), out.n_qubits);
        p.group = group_from_json(g, "/group");
        if (p.group->dim() != dim) {
            throw ConfigError("/group: dimension " + std::to_string(p.group->dim()) + " does not match the system (" +
                              std::to_string(dim) + ")");
        }
        if (p.kind == ProtocolKind::cyclic && config.contains("order")) {
            p.order = order_from_json(config.at("order"), *p.group, "/order");
        }
    }
    if (p.kind == ProtocolKind::hybrid_decoupler) {
        const Json& ds = require_key(config, "decouplers", root);
        if (!ds.is_array() || ds.empty()) {
            throw ConfigError("/decouplers: expected a nonempty list");
        }
        for (std::size_t i = 0; i < ds.size(); i++) {
            std::string at = "/decouplers/" + std::to_string(i);
            ControlGroup g = group_from_json(group_json_with_qubits(require_key(ds[i], "group", at), out.n_qubits),
                                             at + "/group");
            std::vector<std::size_t> order =
                ds[i].contains("order") ? order_from_json(ds[i].at("order"), g, at + "/order") : default_order(g);
            p.decouplers.push_back({std::move(g), std::move(order)});
        }
    }
    // Validate the path shape once (interval count, cycle multiple, order) before any run.
    {
        Rng probe(0);
        try {
            make_path(p, dim, probe);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("protocol: ") + e.what());
        }
    }

    out.worst_case = get_bool_or(config, "worst_case", false, root);
    if (config.contains("search")) {
        const Json& s = config.at("search");
        out.search.n_starts = get_size_or(s, "n_starts", out.search.n_starts, "/search");
        out.search.n_iters = get_size_or(s, "n_iters", out.search.n_iters, "/search");
        out.search.grid_oracle = get_bool_or(s, "grid_oracle", false, "/search");
    }
    if (config.contains("psi")) {
        out.psi = state_from_json(config.at("psi"), dim, "/psi");
    } else if (!out.worst_case) {
        throw ConfigError("/psi: required unless worst_case is true");
    }
    if (const auto* open = std::get_if<OpenSystemDrift>(&out.model)) {
        if (config.contains("rho_env")) {
            if (config.contains("psi_env")) {
                throw ConfigError("/rho_env: give either psi_env or rho_env, not both");
            }
            Operator rho = operator_from_json(config.at("rho_env"), "/rho_env");
            Eigen::SelfAdjointEigenSolver<Operator> solver(0.5 * (rho + rho.adjoint()));
            bool pure = std::abs(solver.eigenvalues().maxCoeff() - 1.0) < 1e-10;
            if (pure) {
                out.psi_env = solver.eigenvectors().col(solver.eigenvalues().size() - 1);
            } else if (get_bool_or(config, "purify", false, root)) {
                auto [purified, psi_e] = purify_environment(*open, rho);
                out.model = purified;
                out.psi_env = psi_e;
            } else {
                throw ConfigError("/rho_env: mixed environment state; set \"purify\": true to purify it");
            }
        } else {
            out.psi_env = state_from_json(require_key(config, "psi_env", root), open->d_e, "/psi_env");
        }
    }

    out.ensemble.n_traj = get_size_or(config, "n_traj", 1, root);
    if (out.ensemble.n_traj < 1) {
        throw ConfigError("/n_traj: must be >= 1");
    }
    out.ensemble.substeps = get_size_or(config, "substeps", 16, root);
    if (out.ensemble.substeps < 1) {
        throw ConfigError("/substeps: must be >= 1");
    }
    out.ensemble.master_seed = get_u64_or(config, "master_seed", 0, root);
    out.ensemble.workers = get_size_or(config, "workers", 0, root);
    out.convergence_tol = get_double_or(config, "convergence_tol", 1e-6, root);
    return out;
}

ErrorEstimate run_simulation(const SimulationConfig& config, ConvergenceReport* convergence) {
    ConvergenceReport report =
        substep_convergence(config.model, config.protocol, config.ensemble.substeps, config.ensemble.master_seed);
    if (convergence != nullptr) {
        *convergence = report;
    }
    if (!report.exact && report.difference > config.convergence_tol) {
        std::ostringstream msg;
        msg << "substep halving changed the propagator by " << report.difference << " > convergence_tol "
            << config.convergence_tol << "; increase substeps";
        throw ConvergenceFailure(msg.str());
    }
    auto trajectories = run_ensemble(config.model, config.protocol, config.ensemble);
    const std::size_t d_s = system_dim(config.model);
    if (config.worst_case) {
        return worst_case_from_trajectories(trajectories, d_s, config.psi_env, config.search,
                                            config.ensemble.master_seed);
    }
    return summarize(trajectory_errors(trajectories, *config.psi, config.psi_env, d_s), config.ensemble.master_seed);
}

}  // namespace ddsim
