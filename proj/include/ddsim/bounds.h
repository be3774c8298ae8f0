#ifndef DDSIM_BOUNDS_H
#define DDSIM_BOUNDS_H

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "ddsim/control_group.h"
#include "ddsim/operator.h"

namespace ddsim {

/// Worst-case error bound for random decoupling with frames independent beyond dt:
/// 4 T dt k^2 (1 + 8 dt k + 4 T dt k^2) / (1 - 4 T dt k^2)^2. Requires 4 T dt k^2 < 1.
double random_bound(double total_time, double delta_t, double k);

/// Norm bound on the cycle-average Hamiltonian when its leading term vanishes:
/// k^2 T_c / (1 - k T_c). Requires k T_c < 1.
double hbar_norm_bound(double cycle_time, double k);

/// Worst-case error bound for cyclic decoupling: (h T)^2 / (1 - h T)^2 with h = hbar_norm_bound().
/// Requires k T_c < 1 and h T < 1; the RegimeViolation message names the failing condition.
double deterministic_bound(double total_time, double cycle_time, double k);

struct BoundReport {
    double total_time = 0;
    double delta_t = 0;
    double k = 0;
    /// 0 for a continuous group.
    std::size_t group_order = 0;
    /// R = T dt k^2.
    double r = 0;
    /// |G|^2 R; absent for continuous groups.
    std::optional<double> g2r;
    std::optional<double> random_bound;
    std::optional<double> deterministic_bound;
    std::optional<double> hbar_norm_bound;
    bool random_regime = false;       // 4 T dt k^2 < 1
    bool convergence_regime = false;  // k T_c < 1
    bool short_time_regime = false;   // ||H_bar|| T < 1
    std::string recommendation;
};

/// R, |G|^2 R and both bounds with T_c = |G| dt. Regime violations are reported, not thrown.
BoundReport figure_of_merit(double total_time, double delta_t, double k, std::size_t group_order);

/// Cycle average (1/|G|) sum_j g_j^dagger H g_j of a static Hamiltonian (the twirl of H).
Operator avg_hamiltonian_first_order(const Operator& h, const ControlGroup& group);

/// True when both lists are non-decreasing and every point of the merged list has another point
/// within dt.
bool in_w1(std::span<const double> u, std::span<const double> t, double delta_t);

/// Closed-form bound 2^ceil((n+m)/2) T^floor((n+m)/2) (2 dt)^ceil((n+m)/2).
double w1_appendix_bound(int n, int m, double total_time, double delta_t);

struct VolumeEstimate {
    double estimate = 0;
    double standard_error = 0;
    double appendix_bound = 0;
    std::size_t n_samples = 0;
    std::size_t hits = 0;
};

/// Monte Carlo volume of W1^(n,m)(dt): uniform points in [0,T]^(n+m), hit when in_w1() holds.
/// Samples are drawn in blocks of 65536, block b using stream_seed(seed, b), so the result does
/// not depend on `workers`.
VolumeEstimate w1_volume_estimate(int n, int m, double total_time, double delta_t, std::size_t n_samples,
                                  uint64_t seed, std::size_t workers = 0);

}  // namespace ddsim

#endif
