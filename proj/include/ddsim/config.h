#ifndef DDSIM_CONFIG_H
#define DDSIM_CONFIG_H

#include <cstddef>
#include <filesystem>
#include <optional>

#include "ddsim/error_metrics.h"
#include "ddsim/evolution.h"
#include "ddsim/json_io.h"

namespace ddsim {

/// A fully resolved single-point experiment.
///
/// Config keys: model, group (object or path), protocol, delta_t, T, order (labels), close_frame,
/// decouplers ([{group, order}]), k_scale, n_qubits, psi, psi_env, rho_env + purify, worst_case,
/// search {n_starts, n_iters, grid_oracle}, n_traj, substeps, master_seed, workers, convergence_tol.
struct SimulationConfig {
    DriftModel model;
    ProtocolSpec protocol;
    /// Uniform bound k (closed) or noise strength lambda (open) after any k_scale rescaling.
    double k = 0;
    std::optional<int> n_qubits;
    std::optional<StateVector> psi;
    std::optional<StateVector> psi_env;
    bool worst_case = false;
    SearchOptions search;
    EnsembleOptions ensemble;
    double convergence_tol = 1e-6;
};

/// Replaces string-valued "model", "group" and decoupler "group" entries by the referenced files'
/// contents, so that every file is loaded before any simulation starts.
Json resolve_config_references(const Json& config, const std::filesystem::path& base_dir);

/// Validates and builds a configuration. Throws ConfigError naming the offending key.
SimulationConfig parse_simulation_config(const Json& config, const std::filesystem::path& base_dir = ".");

/// Lifts a one-qubit closed model to sum_i h^(i) on n qubits.
DriftModel collective_model(const DriftModel& single_qubit, int n_qubits);

/// Runs the configured estimate. Throws ConvergenceFailure when the halve-and-compare substep check
/// exceeds convergence_tol.
ErrorEstimate run_simulation(const SimulationConfig& config, ConvergenceReport* convergence = nullptr);

}  // namespace ddsim

#endif
