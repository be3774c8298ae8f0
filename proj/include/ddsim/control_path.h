#ifndef DDSIM_CONTROL_PATH_H
#define DDSIM_CONTROL_PATH_H

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ddsim/control_group.h"
#include "ddsim/operator.h"
#include "ddsim/rng.h"

namespace ddsim {

enum class ProtocolKind { random, cyclic, hybrid_cycle, hybrid_decoupler, none };

std::string to_string(ProtocolKind kind);
ProtocolKind protocol_from_string(const std::string& name);

/// Piecewise-constant control propagator U_c(t).
///
/// frames[j] is U_c on [j dt, (j+1) dt); pulses[j] = frames[j] frames[j-1]^dagger is the ideal
/// instantaneous pulse at j dt (with frames[-1] = 1). Pulses appended at t = T by
/// close_to_physical_frame() live in terminal_pulses; cycle-based paths carry one pulse there that
/// starts the next cycle, so U_c(T+) is in the identity class.
struct ControlPath {
    double delta_t = 0;
    std::vector<Operator> frames;
    /// Group element index of each frame (-1 for Haar draws). The random-decoupler hybrid offsets
    /// decoupler c by c * |G|.
    std::vector<long> element_index;
    std::vector<Operator> pulses;
    std::vector<Operator> terminal_pulses;
    ProtocolKind protocol = ProtocolKind::none;
    uint64_t seed = 0;

    std::size_t n_intervals() const { return frames.size(); }
    double duration() const { return delta_t * static_cast<double>(frames.size()); }
    /// U_c(T+) after all terminal pulses.
    Operator final_frame() const;
};

/// One decoupler of the random-decoupler hybrid: a group and its traversal order.
struct Decoupler {
    ControlGroup group;
    std::vector<std::size_t> order;
};

/// Number of dt intervals in T; throws ConfigError unless T / dt is an integer within tolerance.
std::size_t interval_count(double delta_t, double total_time);

/// I.i.d. uniform frame per interval (Haar draw for the continuous kind).
ControlPath random_path(const ControlGroup& group, double delta_t, double total_time, Rng& rng);

/// Deterministic cycling through `order`, which must be a permutation of the elements starting at the
/// identity class. T must be a multiple of |G| dt.
ControlPath cyclic_path(const ControlGroup& group, const std::vector<std::size_t>& order, double delta_t,
                        double total_time);

/// Every cycle follows a fresh uniformly random permutation of the elements.
ControlPath hybrid_random_cycle_path(const ControlGroup& group, double delta_t, double total_time, Rng& rng);

/// Every cycle runs the cycle of a uniformly chosen decoupler.
ControlPath hybrid_decoupler_choice_path(const std::vector<Decoupler>& decouplers, double delta_t, double total_time,
                                         Rng& rng);

/// Appends the pulse final_frame()^dagger at t = T, so that U_c(T+) = 1.
ControlPath close_to_physical_frame(const ControlPath& path);

/// Element order 0, 1, ..., |G|-1 rotated so that it starts at the identity class.
std::vector<std::size_t> default_order(const ControlGroup& group);

/// Rebuilds frames[j] = pulses[j] ... pulses[0].
std::vector<Operator> recompose_frames(const std::vector<Operator>& pulses);

}  // namespace ddsim

#endif
