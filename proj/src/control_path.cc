#include "ddsim/control_path.h"

#include <cmath>
#include <numeric>

#include "ddsim/errors.h"
#include "ddsim/tolerances.h"

namespace ddsim {

namespace {

void derive_pulses(ControlPath& path) {
    path.pulses.clear();
    path.pulses.reserve(path.frames.size());
    for (std::size_t j = 0; j < path.frames.size(); j++) {
        if (j == 0) {
            path.pulses.push_back(path.frames[0]);
        } else {
            path.pulses.push_back(path.frames[j] * path.frames[j - 1].adjoint());
        }
    }
}

void check_order(const ControlGroup& group, const std::vector<std::size_t>& order) {
    if (!group.is_finite()) {
        throw ConfigError("cyclic protocols need a finite group");
    }
    if (order.size() != group.order()) {
        throw ConfigError("cycle order has " + std::to_string(order.size()) + " entries, group has " +
                          std::to_string(group.order()) + " elements");
    }
    std::vector<bool> seen(order.size(), false);
    for (std::size_t idx : order) {
        if (idx >= order.size() || seen[idx]) {
            throw ConfigError("cycle order is not a permutation of the group elements");
        }
        seen[idx] = true;
    }
    if (order.front() != group.identity_index()) {
        throw ConfigError("cycle order must start at the identity class");
    }
}

std::size_t cycle_count(const ControlGroup& group, double delta_t, double total_time) {
    std::size_t n = interval_count(delta_t, total_time);
    if (n % group.order() != 0) {
        throw ConfigError("T = " + std::to_string(total_time) + " is not a multiple of the cycle time |G| dt = " +
                          std::to_string(static_cast<double>(group.order()) * delta_t));
    }
    return n / group.order();
}

// `offset` keeps element indices of different decouplers distinct.
void append_cycle(ControlPath& path, const ControlGroup& group, const std::vector<std::size_t>& order,
                  std::size_t offset = 0) {
    for (std::size_t idx : order) {
        path.frames.push_back(group.elements()[idx]);
        path.element_index.push_back(static_cast<long>(offset + idx));
    }
}

// The pulse at T that starts the next cycle, returning U_c to the identity class.
void complete_cycle(ControlPath& path) {
    path.terminal_pulses.push_back(path.frames.front() * path.frames.back().adjoint());
}

}  // namespace

std::string to_string(ProtocolKind kind) {
    switch (kind) {
        case ProtocolKind::random: return "random";
        case ProtocolKind::cyclic: return "cyclic";
        case ProtocolKind::hybrid_cycle: return "hybrid-cycle";
        case ProtocolKind::hybrid_decoupler: return "hybrid-decoupler";
        case ProtocolKind::none: return "none";
    }
    return "?";
}

ProtocolKind protocol_from_string(const std::string& name) {
    for (auto kind : {ProtocolKind::random, ProtocolKind::cyclic, ProtocolKind::hybrid_cycle,
                      ProtocolKind::hybrid_decoupler, ProtocolKind::none}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ConfigError("unknown protocol '" + name + "'");
}

Operator ControlPath::final_frame() const {
    Operator u = frames.empty() ? Operator() : frames.back();
    for (const auto& p : terminal_pulses) {
        u = p * u;
    }
    return u;
}

std::size_t interval_count(double delta_t, double total_time) {
    if (!(delta_t > 0) || !(total_time > 0)) {
        throw ConfigError("delta_t and T must be positive");
    }
    double ratio = total_time / delta_t;
    double n = std::round(ratio);
    if (n < 1 || std::abs(ratio - n) > tol::integral_ratio * std::max(1.0, n)) {
        throw ConfigError("T / delta_t = " + std::to_string(ratio) + " is not an integer");
    }
    return static_cast<std::size_t>(n);
}

ControlPath random_path(const ControlGroup& group, double delta_t, double total_time, Rng& rng) {
    std::size_t n = interval_count(delta_t, total_time);
    ControlPath path;
    path.delta_t = total_time / static_cast<double>(n);
    path.protocol = ProtocolKind::random;
    path.seed = rng.seed();
    path.frames.reserve(n);
    path.element_index.reserve(n);
    for (std::size_t j = 0; j < n; j++) {
        if (group.is_finite()) {
            std::size_t idx = rng.index_below(group.order());
            path.frames.push_back(group.elements()[idx]);
            path.element_index.push_back(static_cast<long>(idx));
        } else {
            path.frames.push_back(haar_sample(group.dim(), rng));
            path.element_index.push_back(-1);
        }
    }
    derive_pulses(path);
    return path;
}

ControlPath cyclic_path(const ControlGroup& group, const std::vector<std::size_t>& order, double delta_t,
                        double total_time) {
    check_order(group, order);
    std::size_t cycles = cycle_count(group, delta_t, total_time);
    ControlPath path;
    path.delta_t = total_time / static_cast<double>(cycles * group.order());
    path.protocol = ProtocolKind::cyclic;
    for (std::size_t c = 0; c < cycles; c++) {
        append_cycle(path, group, order);
    }
    derive_pulses(path);
    complete_cycle(path);
    return path;
}

ControlPath hybrid_random_cycle_path(const ControlGroup& group, double delta_t, double total_time, Rng& rng) {
    if (!group.is_finite()) {
        throw ConfigError("hybrid-cycle protocol needs a finite group");
    }
    std::size_t cycles = cycle_count(group, delta_t, total_time);
    ControlPath path;
    path.delta_t = total_time / static_cast<double>(cycles * group.order());
    path.protocol = ProtocolKind::hybrid_cycle;
    path.seed = rng.seed();
    std::vector<std::size_t> order(group.order());
    for (std::size_t c = 0; c < cycles; c++) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        // Fisher-Yates with the library's own index sampler.
        for (std::size_t i = order.size(); i > 1; i--) {
            std::swap(order[i - 1], order[rng.index_below(i)]);
        }
        append_cycle(path, group, order);
    }
    derive_pulses(path);
    return path;
}

ControlPath hybrid_decoupler_choice_path(const std::vector<Decoupler>& decouplers, double delta_t, double total_time,
                                         Rng& rng) {
    if (decouplers.empty()) {
        throw ConfigError("hybrid-decoupler protocol needs at least one decoupler");
    }
    const ControlGroup& first = decouplers.front().group;
    for (const auto& d : decouplers) {
        check_order(d.group, d.order);
        if (d.group.order() != first.order() || d.group.dim() != first.dim()) {
            throw ConfigError("hybrid-decoupler: decouplers must share dimension and group order");
        }
    }
    std::size_t cycles = cycle_count(first, delta_t, total_time);
    ControlPath path;
    path.delta_t = total_time / static_cast<double>(cycles * first.order());
    path.protocol = ProtocolKind::hybrid_decoupler;
    path.seed = rng.seed();
    for (std::size_t c = 0; c < cycles; c++) {
        std::size_t choice = rng.index_below(decouplers.size());
        const Decoupler& d = decouplers[choice];
        append_cycle(path, d.group, d.order, choice * first.order());
    }
    derive_pulses(path);
    complete_cycle(path);
    return path;
}

ControlPath close_to_physical_frame(const ControlPath& path) {
    ControlPath out = path;
    out.terminal_pulses.push_back(path.final_frame().adjoint());
    return out;
}

std::vector<std::size_t> default_order(const ControlGroup& group) {
    std::vector<std::size_t> order(group.order());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t id = group.identity_index();
    std::rotate(order.begin(), order.begin() + static_cast<long>(id), order.end());
    return order;
}

std::vector<Operator> recompose_frames(const std::vector<Operator>& pulses) {
    std::vector<Operator> frames;
    frames.reserve(pulses.size());
    for (const auto& p : pulses) {
        frames.push_back(frames.empty() ? p : Operator(p * frames.back()));
    }
    return frames;
}

}  // namespace ddsim
