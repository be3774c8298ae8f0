#include "ddsim/evolution.h"

#include <bit>
#include <cmath>
#include <map>
#include <tuple>

#include "ddsim/errors.h"
#include "ddsim/parallel.h"

namespace ddsim {

namespace {

// Interval j covers [j dt, (j+1) dt). The last boundary is pinned to T so that roundoff in j * dt
// never leaves a sliver uncovered.
double interval_start(const ControlPath& path, std::size_t j) {
    return path.delta_t * static_cast<double>(j);
}

double interval_end(const ControlPath& path, std::size_t j) {
    return j + 1 == path.n_intervals() ? path.duration() : path.delta_t * static_cast<double>(j + 1);
}

void check_horizon(const DriftModel& model, const ControlPath& path) {
    double end = horizon_end(model);
    if (path.duration() > end * (1 + 1e-12)) {
        throw ConfigError("model horizon " + std::to_string(end) + " does not cover the evolution time " +
                          std::to_string(path.duration()));
    }
}

// exp(-i H dt) keyed by (segment id, duration bits), and the conjugated factor additionally keyed by
// the group element. Valid for one model only.
class FactorCache {
   public:
    const Operator& bare(const DriftSegment& seg, double dt) {
        auto key = std::make_tuple(seg.id, std::bit_cast<uint64_t>(dt), -1L);
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            it = cache_.emplace(key, expm_hermitian(*seg.h, dt)).first;
        }
        return it->second;
    }

    Operator toggled(const DriftSegment& seg, double dt, const Operator& frame, long element) {
        if (element < 0) {
            return frame.adjoint() * bare(seg, dt) * frame;
        }
        auto key = std::make_tuple(seg.id, std::bit_cast<uint64_t>(dt), element);
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            Operator f = frame.adjoint() * bare(seg, dt) * frame;
            it = cache_.emplace(key, std::move(f)).first;
        }
        return it->second;
    }

   private:
    std::map<std::tuple<std::size_t, uint64_t, long>, Operator> cache_;
};

bool bath_frame_is_static(const OpenSystemDrift& model) {
    double scale = std::max(1.0, max_abs(model.h_env));
    for (const auto& c : model.couplings) {
        if (max_abs(model.h_env * c.bath - c.bath * model.h_env) > 1e-14 * scale * std::max(1.0, max_abs(c.bath))) {
            return false;
        }
    }
    return true;
}

Operator embed_frame(const Operator& frame, std::size_t d_e) {
    return tensor(frame, identity(d_e));
}

}  // namespace

bool is_deterministic(const ProtocolSpec& protocol) {
    return protocol.kind == ProtocolKind::none || protocol.kind == ProtocolKind::cyclic;
}

std::size_t protocol_group_order(const ProtocolSpec& protocol) {
    switch (protocol.kind) {
        case ProtocolKind::none: return 1;
        case ProtocolKind::hybrid_decoupler:
            return protocol.decouplers.empty() ? 0 : protocol.decouplers.front().group.order();
        default: return protocol.group ? protocol.group->order() : 0;
    }
}

ControlPath make_path(const ProtocolSpec& protocol, std::size_t dim, Rng& rng) {
    auto need_group = [&]() -> const ControlGroup& {
        if (!protocol.group) {
            throw ConfigError("protocol '" + to_string(protocol.kind) + "' needs a group");
        }
        if (protocol.group->dim() != dim) {
            throw DimensionMismatch("group dimension " + std::to_string(protocol.group->dim()) +
                                    " != system dimension " + std::to_string(dim));
        }
        return *protocol.group;
    };
    ControlPath path;
    switch (protocol.kind) {
        case ProtocolKind::none: {
            double dt = protocol.delta_t > 0 ? protocol.delta_t : protocol.total_time;
            ControlGroup trivial = trivial_group(dim);
            path = cyclic_path(trivial, {0}, dt, protocol.total_time);
            path.protocol = ProtocolKind::none;
            break;
        }
        case ProtocolKind::random: path = random_path(need_group(), protocol.delta_t, protocol.total_time, rng); break;
        case ProtocolKind::cyclic: {
            const ControlGroup& g = need_group();
            path = cyclic_path(g, protocol.order.empty() ? default_order(g) : protocol.order, protocol.delta_t,
                               protocol.total_time);
            break;
        }
        case ProtocolKind::hybrid_cycle:
            path = hybrid_random_cycle_path(need_group(), protocol.delta_t, protocol.total_time, rng);
            break;
        case ProtocolKind::hybrid_decoupler:
            for (const auto& d : protocol.decouplers) {
                if (d.group.dim() != dim) {
                    throw DimensionMismatch("decoupler dimension does not match the system dimension");
                }
            }
            path = hybrid_decoupler_choice_path(protocol.decouplers, protocol.delta_t, protocol.total_time, rng);
            break;
    }
    if (protocol.close_frame) {
        path = close_to_physical_frame(path);
    }
    return path;
}

TrajectoryResult propagate_logical(const DriftModel& model, const ControlPath& path, std::size_t substeps) {
    if (is_open_system(model)) {
        throw ConfigError("propagate_logical needs a closed model; use propagate_doubly_rotating");
    }
    if (substeps < 1) {
        throw ConfigError("substeps must be >= 1");
    }
    check_horizon(model, path);
    const auto dim = static_cast<Eigen::Index>(system_dim(model));
    FactorCache cache;
    Operator u = Operator::Identity(dim, dim);
    for (std::size_t j = 0; j < path.n_intervals(); j++) {
        const Operator& frame = path.frames[j];
        long element = path.element_index.empty() ? -1 : path.element_index[j];
        auto segments = constant_segments(model, interval_start(path, j), interval_end(path, j));
        if (segments.size() == 1) {
            u = cache.toggled(segments.front(), path.delta_t, frame, element) * u;
            continue;
        }
        for (const auto& seg : segments) {
            double len = seg.end - seg.start;
            if (len <= 0) {
                continue;
            }
            u = cache.toggled(seg, len, frame, element) * u;
        }
    }
    return TrajectoryResult{std::move(u), 0, path.seed, 1, path.final_frame()};
}

Operator logical_open_propagator(const OpenSystemDrift& model, const ControlPath& path) {
    const auto dim = static_cast<Eigen::Index>(model.d_s * model.d_e);
    Operator env = tensor(identity(model.d_s), model.h_env);
    Operator u = Operator::Identity(dim, dim);
    for (std::size_t j = 0; j < path.n_intervals(); j++) {
        double t0 = interval_start(path, j);
        double t1 = interval_end(path, j);
        std::vector<double> cuts{t0};
        auto inner = coupling_breakpoints(model, t0, t1);
        cuts.insert(cuts.end(), inner.begin(), inner.end());
        cuts.push_back(t1);
        Operator f = embed_frame(path.frames[j], model.d_e);
        for (std::size_t s = 0; s + 1 < cuts.size(); s++) {
            double mid = 0.5 * (cuts[s] + cuts[s + 1]);
            Operator h = env;
            for (const auto& c : model.couplings) {
                h += tensor(evaluate(c.system, mid), c.bath);
            }
            Operator toggled = f.adjoint() * h * f;
            u = expm_hermitian(0.5 * (toggled + toggled.adjoint()), cuts[s + 1] - cuts[s]) * u;
        }
    }
    return u;
}

Operator doubly_rotating_reference(const OpenSystemDrift& model, const ControlPath& path) {
    Operator u_env = tensor(identity(model.d_s), expm_hermitian(model.h_env, path.duration()));
    return u_env.adjoint() * logical_open_propagator(model, path);
}

TrajectoryResult propagate_doubly_rotating(const DriftModel& model, const ControlPath& path, std::size_t substeps) {
    const auto* open = std::get_if<OpenSystemDrift>(&model);
    if (open == nullptr) {
        throw ConfigError("propagate_doubly_rotating needs an open-system model");
    }
    if (substeps < 1) {
        throw ConfigError("substeps must be >= 1");
    }
    check_horizon(model, path);
    const std::size_t d_s = open->d_s;
    const std::size_t d_e = open->d_e;
    if (!path.frames.empty() && static_cast<std::size_t>(path.frames.front().rows()) != d_s) {
        throw DimensionMismatch("control path dimension does not match d_S");
    }
    const auto dim = static_cast<Eigen::Index>(d_s * d_e);
    const bool static_bath = bath_frame_is_static(*open);
    const std::size_t steps = static_bath ? 1 : substeps;

    // B_a(t) = U_E^dagger(t) B_a U_E(t) = V diag(e^{iwt}) (V^dagger B_a V) diag(e^{-iwt}) V^dagger.
    Eigen::SelfAdjointEigenSolver<Operator> env_solver(0.5 * (open->h_env + open->h_env.adjoint()));
    const Operator& v = env_solver.eigenvectors();
    const Eigen::VectorXd& w = env_solver.eigenvalues();
    std::vector<Operator> bath_eig;
    for (const auto& c : open->couplings) {
        bath_eig.push_back(v.adjoint() * c.bath * v);
    }
    auto rotated_bath = [&](std::size_t a, double t) -> Operator {
        if (static_bath) {
            return open->couplings[a].bath;
        }
        Operator m = bath_eig[a];
        for (Eigen::Index k = 0; k < m.rows(); k++) {
            for (Eigen::Index l = 0; l < m.cols(); l++) {
                m(k, l) *= std::polar(1.0, (w(k) - w(l)) * t);
            }
        }
        return v * m * v.adjoint();
    };

    Operator u = Operator::Identity(dim, dim);
    for (std::size_t j = 0; j < path.n_intervals(); j++) {
        const Operator& frame = path.frames[j];
        double t0 = interval_start(path, j);
        double t1 = interval_end(path, j);
        std::vector<double> cuts{t0};
        auto inner = coupling_breakpoints(*open, t0, t1);
        cuts.insert(cuts.end(), inner.begin(), inner.end());
        cuts.push_back(t1);
        for (std::size_t p = 0; p + 1 < cuts.size(); p++) {
            double a = cuts[p];
            double b = cuts[p + 1];
            double piece_mid = 0.5 * (a + b);
            std::vector<Operator> toggled_system;
            for (const auto& c : open->couplings) {
                toggled_system.push_back(frame.adjoint() * evaluate(c.system, piece_mid) * frame);
            }
            double h = (b - a) / static_cast<double>(steps);
            for (std::size_t s = 0; s < steps; s++) {
                double mid = a + (static_cast<double>(s) + 0.5) * h;
                Operator gen = Operator::Zero(dim, dim);
                for (std::size_t c = 0; c < open->couplings.size(); c++) {
                    gen += tensor(toggled_system[c], rotated_bath(c, mid));
                }
                u = expm_hermitian(0.5 * (gen + gen.adjoint()), h) * u;
            }
        }
    }
    return TrajectoryResult{std::move(u), 0, path.seed, steps, embed_frame(path.final_frame(), d_e)};
}

TrajectoryResult run_trajectory(const DriftModel& model, const ProtocolSpec& protocol, std::size_t substeps,
                                uint64_t master_seed, std::size_t index) {
    Rng rng(stream_seed(master_seed, index));
    const DriftModel* drift = &model;
    DriftModel realized;
    if (const auto* tg = std::get_if<TelegraphDrift>(&model); tg != nullptr && !tg->switches) {
        realized = sample_telegraph(model, protocol.total_time, rng);
        drift = &realized;
    }
    ControlPath path = make_path(protocol, system_dim(model), rng);
    TrajectoryResult r = is_open_system(*drift) ? propagate_doubly_rotating(*drift, path, substeps)
                                                : propagate_logical(*drift, path, substeps);
    r.trajectory_index = index;
    r.seed = stream_seed(master_seed, index);
    return r;
}

std::vector<TrajectoryResult> run_ensemble(const DriftModel& model, const ProtocolSpec& protocol,
                                           const EnsembleOptions& options) {
    if (options.n_traj < 1) {
        throw ConfigError("n_traj must be >= 1");
    }
    std::vector<TrajectoryResult> results(options.n_traj);
    parallel_for(options.n_traj, options.workers, [&](std::size_t i) {
        results[i] = run_trajectory(model, protocol, options.substeps, options.master_seed, i);
    });
    return results;
}

ConvergenceReport substep_convergence(const DriftModel& model, const ProtocolSpec& protocol, std::size_t substeps,
                                      uint64_t master_seed) {
    ConvergenceReport report;
    report.substeps = substeps;
    TrajectoryResult full = run_trajectory(model, protocol, substeps, master_seed, 0);
    if (full.substeps_used <= 1) {
        report.exact = true;
        return report;
    }
    TrajectoryResult half = run_trajectory(model, protocol, std::max<std::size_t>(1, substeps / 2), master_seed, 0);
    report.difference = spectral_norm(full.propagator - half.propagator);
    return report;
}

}  // namespace ddsim
