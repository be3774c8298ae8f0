#ifndef DDSIM_ERROR_METRICS_H
#define DDSIM_ERROR_METRICS_H

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddsim/evolution.h"
#include "ddsim/operator.h"

namespace ddsim {

/// Monte Carlo estimate of an error probability.
struct ErrorEstimate {
    double mean = 0;
    /// Sample standard deviation over trajectories divided by sqrt(n_traj).
    double standard_error = 0;
    std::size_t n_traj = 0;
    uint64_t seed = 0;
    /// Worst-case searches: the best state found.
    std::optional<StateVector> argmax_state;
    /// Worst-case searches on a qubit with the grid oracle enabled: the grid maximum.
    std::optional<double> grid_oracle;
    /// True for worst-case searches, whose value is a lower bound on the true maximum.
    bool lower_bound = false;
};

/// 1 - |<psi|U|psi>|^2.
double error_fixed(const Operator& u, const StateVector& psi);

/// tr(P_perp U P U^dagger) with P = |psi><psi|; equal to error_fixed() for rank-1 P.
double error_fixed_trace_form(const Operator& u, const StateVector& psi);

/// tr(P_perp rho_S) with rho_S = tr_E(U (P_S (x) P_E) U^dagger).
double reduced_error(const Operator& u, const StateVector& psi_s, const StateVector& psi_e);

/// "zero" -> |0...0>, "plus" -> |+...+> on dimension `dim` (a power of two for "plus").
StateVector named_state(const std::string& name, std::size_t dim);

/// Throws InvalidOperator unless ||psi|| = 1 within tolerance.
void require_normalized(const StateVector& psi, const std::string& what);

/// Mean and standard error of per-trajectory samples.
ErrorEstimate summarize(const std::vector<double>& samples, uint64_t seed);

/// Ensemble estimate of the fixed-state error for a closed model.
ErrorEstimate error_ensemble(const DriftModel& model, const ProtocolSpec& protocol, const StateVector& psi,
                             const EnsembleOptions& options);

/// Ensemble estimate of the reduced error for an open model and pure product initial state.
ErrorEstimate error_ensemble_open(const DriftModel& model, const ProtocolSpec& protocol, const StateVector& psi_s,
                                  const StateVector& psi_e, const EnsembleOptions& options);

/// Per-trajectory error samples at a fixed state (closed: psi_e ignored).
std::vector<double> trajectory_errors(const std::vector<TrajectoryResult>& trajectories, const StateVector& psi,
                                      const std::optional<StateVector>& psi_e, std::size_t d_s);

/// Phi(rho) = (1/N) sum_i sum_e K_ie rho K_ie^dagger estimated from a trajectory sample.
class EmpiricalChannel {
   public:
    /// Closed trajectories: one Kraus operator U~_i each. Open trajectories (psi_e given):
    /// K_ie = (1 (x) <e|) U~'_i (1 (x) |psi_e>).
    EmpiricalChannel(const std::vector<TrajectoryResult>& trajectories, std::size_t d_s,
                     const std::optional<StateVector>& psi_e = std::nullopt);
    /// Channel from explicit Kraus groups, each group being one equally weighted trajectory.
    explicit EmpiricalChannel(std::vector<std::vector<Operator>> kraus_groups);

    std::size_t dim() const { return dim_; }
    std::size_t n_traj() const { return groups_.size(); }

    Operator apply(const Operator& rho) const;
    Operator apply_adjoint(const Operator& rho) const;
    /// <psi| Phi(|psi><psi|) |psi>.
    double fidelity(const StateVector& psi) const;
    /// 1 - fidelity(psi).
    double error(const StateVector& psi) const { return 1.0 - fidelity(psi); }
    /// Per-trajectory errors at psi.
    std::vector<double> errors(const StateVector& psi) const;

   private:
    void build_superoperator();

    std::size_t dim_ = 0;
    std::vector<std::vector<Operator>> groups_;
    std::optional<Operator> super_;
};

struct SearchOptions {
    std::size_t n_starts = 16;
    std::size_t n_iters = 50;
    bool grid_oracle = false;
    std::size_t grid_polar = 200;
    std::size_t grid_azimuthal = 400;
};

struct StateSearchResult {
    double value = 0;
    StateVector state;
};

/// Multistart ascent of 1 - <psi|Phi(psi psi^dagger)|psi>. Each iteration takes the better of an
/// alternating-eigenvector step (lowest eigenvector of Phi(rho)) and a geodesic
/// line search along the projected gradient; it stops after n_iters or when the state moves less
/// than tol::search_converged.
StateSearchResult maximize_error(const EmpiricalChannel& channel, const SearchOptions& options, Rng& rng);

/// Exhaustive Bloch-sphere grid (qubit channels only). Polar angles include both poles.
StateSearchResult bloch_grid_maximum(const EmpiricalChannel& channel, std::size_t n_polar, std::size_t n_azimuthal);

/// Worst case over pure initial states of the estimated mean error. The search stream is
/// stream_seed(master_seed, 2^64 - 1), disjoint from all trajectory streams. For open models
/// `psi_e` is the pure initial environment state.
ErrorEstimate worst_case_error(const DriftModel& model, const ProtocolSpec& protocol, const EnsembleOptions& options,
                               const SearchOptions& search, const std::optional<StateVector>& psi_e = std::nullopt);

/// Same, on an already computed trajectory sample.
ErrorEstimate worst_case_from_trajectories(const std::vector<TrajectoryResult>& trajectories, std::size_t d_s,
                                           const std::optional<StateVector>& psi_e, const SearchOptions& search,
                                           uint64_t master_seed);

}  // namespace ddsim

#endif
