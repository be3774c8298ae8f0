#ifndef DDSIM_EVOLUTION_H
#define DDSIM_EVOLUTION_H

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ddsim/control_path.h"
#include "ddsim/drift_model.h"

namespace ddsim {

/// Everything needed to draw a control path for one trajectory.
struct ProtocolSpec {
    ProtocolKind kind = ProtocolKind::none;
    /// Group for random, cyclic and hybrid-cycle protocols.
    std::optional<ControlGroup> group;
    /// Cycle order for the cyclic protocol; empty means default_order(group).
    std::vector<std::size_t> order;
    std::vector<Decoupler> decouplers;
    /// Interval length; 0 with kind == none means a single interval of length T.
    double delta_t = 0;
    double total_time = 0;
    bool close_frame = false;
};

/// True when every trajectory gets the same control path.
bool is_deterministic(const ProtocolSpec& protocol);

/// |G| of the protocol's group (1 for none, 0 for Haar).
std::size_t protocol_group_order(const ProtocolSpec& protocol);

/// Draws the control path of one trajectory. `dim` is the system dimension (used by kind == none).
ControlPath make_path(const ProtocolSpec& protocol, std::size_t dim, Rng& rng);

struct TrajectoryResult {
    /// Logical-frame propagator U~(T), or the doubly-rotating U~'(T) for open models.
    Operator propagator;
    std::size_t trajectory_index = 0;
    /// Seed of the trajectory's random stream.
    uint64_t seed = 0;
    /// Midpoint sub-steps per interval; 1 when every factor is an exact exponential.
    std::size_t substeps_used = 1;
    /// U_c(T+) of the path, embedded in the joint space for open models.
    Operator final_frame;
};

/// U~(T) = prod_j exp(-i F_j^dagger H0 F_j dt_j) over constant stretches of the closed drift. Drift
/// breakpoints (piecewise boundaries, telegraph switches) split intervals exactly, so every factor is
/// exact and `substeps` is not needed.
TrajectoryResult propagate_logical(const DriftModel& model, const ControlPath& path, std::size_t substeps = 16);

/// U~'(T) = U_E^dagger(T) U_c^dagger(T) U(T) for an open model, integrating
/// H~'(t) = sum_a F^dagger J_a(t) F (x) U_E^dagger(t) B_a U_E(t) with `substeps` midpoint steps per
/// interval (per stretch of constant J_a).
TrajectoryResult propagate_doubly_rotating(const DriftModel& model, const ControlPath& path, std::size_t substeps);

/// U_E^dagger(T) U~(T) with U~ the logical propagator of the joint drift (H_E kept). Exact
/// reference for propagate_doubly_rotating().
Operator doubly_rotating_reference(const OpenSystemDrift& model, const ControlPath& path);

/// Logical propagator of the joint drift 1 (x) H_E + sum_a J_a (x) B_a with the control acting as
/// U_c (x) 1_E.
Operator logical_open_propagator(const OpenSystemDrift& model, const ControlPath& path);

struct EnsembleOptions {
    std::size_t n_traj = 1;
    std::size_t substeps = 16;
    uint64_t master_seed = 0;
    /// 0 = one worker per hardware thread. Results do not depend on this value.
    std::size_t workers = 0;
};

/// Trajectory i draws its telegraph realization (unless the model already carries one) and then its
/// control path from the stream stream_seed(master_seed, i). Results are indexed by i.
std::vector<TrajectoryResult> run_ensemble(const DriftModel& model, const ProtocolSpec& protocol,
                                           const EnsembleOptions& options);

/// Single trajectory of an ensemble, as run_ensemble computes it.
TrajectoryResult run_trajectory(const DriftModel& model, const ProtocolSpec& protocol, std::size_t substeps,
                                uint64_t master_seed, std::size_t index);

struct ConvergenceReport {
    std::size_t substeps = 0;
    /// Spectral-norm difference between runs with `substeps` and half as many.
    double difference = 0;
    /// True when the propagation has no midpoint error at all.
    bool exact = false;
};

/// Halve-and-compare check on trajectory 0.
ConvergenceReport substep_convergence(const DriftModel& model, const ProtocolSpec& protocol, std::size_t substeps,
                                      uint64_t master_seed);

}  // namespace ddsim

#endif
