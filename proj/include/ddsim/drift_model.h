#ifndef DDSIM_DRIFT_MODEL_H
#define DDSIM_DRIFT_MODEL_H

#include <cstddef>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "ddsim/operator.h"
#include "ddsim/rng.h"

namespace ddsim {

/// Time-independent drift H0.
struct StaticDrift {
    Operator h;
};

/// H0(t) = hs[j] for t in [boundaries[j], boundaries[j + 1]).
struct PiecewiseDrift {
    std::vector<double> boundaries;
    std::vector<Operator> hs;
};

/// Random telegraph drift: starts at h_a and toggles between h_a and h_b at Poisson times of rate
/// gamma. The autocorrelation time of the switching signal is 1 / (2 gamma).
struct TelegraphDrift {
    Operator h_a;
    Operator h_b;
    double gamma = 0;
    /// Realized switch times on [0, horizon); empty until sampled.
    std::optional<std::vector<double>> switches;
    double horizon = 0;
};

/// Time dependence allowed for a system-side coupling operator J_a(t).
using SystemTerm = std::variant<StaticDrift, PiecewiseDrift>;

struct Coupling {
    SystemTerm system;
    Operator bath;
};

/// H0(t) = 1 (x) H_E + sum_a J_a(t) (x) B_a on H_S (x) H_E, system index major.
struct OpenSystemDrift {
    std::size_t d_s = 0;
    std::size_t d_e = 0;
    Operator h_env;
    std::vector<Coupling> couplings;
};

using DriftModel = std::variant<StaticDrift, PiecewiseDrift, TelegraphDrift, OpenSystemDrift>;

/// One stretch on which a closed drift is constant. `id` identifies the operator for caching:
/// equal ids within one model mean equal operators.
struct DriftSegment {
    double start;
    double end;
    const Operator* h;
    std::size_t id;
};

// Builders. Closed-system Hamiltonians must be Hermitian; their identity component only adds a
// global phase and is removed. Coupling operators J_a must already be traceless.
DriftModel make_static(const Operator& h);
DriftModel make_piecewise(std::vector<double> boundaries, const std::vector<Operator>& hs);
DriftModel make_telegraph(const Operator& h_a, const Operator& h_b, double gamma);
DriftModel make_open_system(std::size_t d_s, std::size_t d_e, const Operator& h_env, std::vector<Coupling> couplings);

bool is_open_system(const DriftModel& model);
/// Dimension of the controlled system (d_S for open models).
std::size_t system_dim(const DriftModel& model);
/// Dimension of the operator returned by evaluate().
std::size_t joint_dim(const DriftModel& model);
/// End of the time range on which the model is defined (+inf if unbounded).
double horizon_end(const DriftModel& model);

/// H0(t). For open-system models the full joint operator.
Operator evaluate(const DriftModel& model, double t);
Operator evaluate(const SystemTerm& term, double t);

/// Uniform spectral-norm bound k of a closed model.
double uniform_bound_k(const DriftModel& model);

/// Uniform spectral-norm bound lambda of sum_a J_a(t) (x) B_a (H_E excluded).
double noise_strength_lambda(const DriftModel& model);

/// A copy of the telegraph model with fresh Poisson switch times on [0, horizon).
DriftModel sample_telegraph(const DriftModel& model, double horizon, Rng& rng);

/// Closed drift split into constant stretches covering [t0, t1).
std::vector<DriftSegment> constant_segments(const DriftModel& model, double t0, double t1);

/// Times in (t0, t1) where some coupling J_a(t) changes value.
std::vector<double> coupling_breakpoints(const OpenSystemDrift& model, double t0, double t1);

/// Rescale a closed model to uniform bound k, or an open model's couplings to noise strength k.
/// Models with zero bound are returned unchanged.
DriftModel rescale(const DriftModel& model, double k);

/// Replace a mixed environment state by a purification: the environment becomes E (x) E' with
/// d_E^2 levels, every environment operator acts as X (x) 1, and the returned vector is the
/// purification sum_i sqrt(p_i) |i>|i> in the eigenbasis of rho_env.
std::pair<OpenSystemDrift, StateVector> purify_environment(const OpenSystemDrift& model, const Operator& rho_env);

}  // namespace ddsim

#endif
