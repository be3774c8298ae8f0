#include "ddsim/error_metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ddsim/errors.h"
#include "ddsim/tolerances.h"

namespace ddsim {

namespace {

// Largest dimension for which the channel is stored as a d^2 x d^2 superoperator.
constexpr std::size_t kMaxSuperoperatorDim = 16;

StateVector random_state(std::size_t dim, Rng& rng) {
    StateVector psi(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < psi.size(); i++) {
        psi(i) = rng.complex_normal();
    }
    return psi.normalized();
}

double clamp_probability(double p) {
    return std::clamp(p, 0.0, 1.0);
}

std::vector<Operator> kraus_of(const TrajectoryResult& r, std::size_t d_s, const std::optional<StateVector>& psi_e) {
    if (!psi_e) {
        return {r.propagator};
    }
    const auto ds = static_cast<Eigen::Index>(d_s);
    const auto de = psi_e->size();
    if (r.propagator.rows() != ds * de) {
        throw DimensionMismatch("environment state does not match the propagator dimension");
    }
    Operator embed = Operator::Zero(ds * de, ds);
    for (Eigen::Index i = 0; i < ds; i++) {
        embed.block(i * de, i, de, 1) = *psi_e;
    }
    Operator m = r.propagator * embed;
    std::vector<Operator> out;
    for (Eigen::Index e = 0; e < de; e++) {
        Operator k(ds, ds);
        for (Eigen::Index i = 0; i < ds; i++) {
            k.row(i) = m.row(i * de + e);
        }
        out.push_back(std::move(k));
    }
    return out;
}

StateVector geodesic(const StateVector& psi, const StateVector& dir, double s) {
    return (std::cos(s) * psi + std::sin(s) * dir).normalized();
}

}  // namespace

double error_fixed(const Operator& u, const StateVector& psi) {
    require_normalized(psi, "initial state");
    if (u.rows() != psi.size()) {
        throw DimensionMismatch("error_fixed: state and propagator dimensions differ");
    }
    Complex amp = psi.dot(u * psi);
    return clamp_probability(1.0 - std::norm(amp));
}

double error_fixed_trace_form(const Operator& u, const StateVector& psi) {
    require_normalized(psi, "initial state");
    Operator p = projector_onto(psi);
    Operator perp = identity(static_cast<std::size_t>(psi.size())) - p;
    return (perp * u * p * u.adjoint()).trace().real();
}

double reduced_error(const Operator& u, const StateVector& psi_s, const StateVector& psi_e) {
    require_normalized(psi_s, "system state");
    require_normalized(psi_e, "environment state");
    StateVector out = u * StateVector(tensor(psi_s, psi_e));
    Operator rho_s = partial_trace_env(out * out.adjoint(), static_cast<std::size_t>(psi_s.size()),
                                       static_cast<std::size_t>(psi_e.size()));
    return clamp_probability(1.0 - psi_s.dot(rho_s * psi_s).real());
}

StateVector named_state(const std::string& name, std::size_t dim) {
    auto d = static_cast<Eigen::Index>(dim);
    if (name == "zero") {
        StateVector psi = StateVector::Zero(d);
        psi(0) = 1;
        return psi;
    }
    if (name == "plus") {
        if (dim == 0 || (dim & (dim - 1)) != 0) {
            throw ConfigError("state 'plus' needs a qubit-register dimension");
        }
        return StateVector::Constant(d, Complex(1.0 / std::sqrt(static_cast<double>(dim))));
    }
    throw ConfigError("unknown named state '" + name + "' (expected 'zero' or 'plus')");
}

void require_normalized(const StateVector& psi, const std::string& what) {
    if (std::abs(psi.norm() - 1.0) > tol::state_norm) {
        throw InvalidOperator(what + " is not normalized (norm " + std::to_string(psi.norm()) + ")");
    }
}

ErrorEstimate summarize(const std::vector<double>& samples, uint64_t seed) {
    ErrorEstimate e;
    e.n_traj = samples.size();
    e.seed = seed;
    if (samples.empty()) {
        return e;
    }
    double sum = 0;
    for (double x : samples) {
        sum += x;
    }
    double n = static_cast<double>(samples.size());
    e.mean = clamp_probability(sum / n);
    if (samples.size() > 1) {
        double ss = 0;
        for (double x : samples) {
            ss += (x - sum / n) * (x - sum / n);
        }
        e.standard_error = std::sqrt(ss / (n - 1)) / std::sqrt(n);
    }
    return e;
}

std::vector<double> trajectory_errors(const std::vector<TrajectoryResult>& trajectories, const StateVector& psi,
                                      const std::optional<StateVector>& psi_e, std::size_t d_s) {
    std::vector<double> out;
    out.reserve(trajectories.size());
    for (const auto& r : trajectories) {
        if (psi_e) {
            out.push_back(reduced_error(r.propagator, psi, *psi_e));
        } else {
            if (static_cast<std::size_t>(psi.size()) != d_s) {
                throw DimensionMismatch("initial state dimension does not match the system");
            }
            out.push_back(error_fixed(r.propagator, psi));
        }
    }
    return out;
}

ErrorEstimate error_ensemble(const DriftModel& model, const ProtocolSpec& protocol, const StateVector& psi,
                             const EnsembleOptions& options) {
    if (is_open_system(model)) {
        throw ConfigError("error_ensemble needs a closed model; use error_ensemble_open");
    }
    require_normalized(psi, "initial state");
    auto trajectories = run_ensemble(model, protocol, options);
    return summarize(trajectory_errors(trajectories, psi, std::nullopt, system_dim(model)), options.master_seed);
}

ErrorEstimate error_ensemble_open(const DriftModel& model, const ProtocolSpec& protocol, const StateVector& psi_s,
                                  const StateVector& psi_e, const EnsembleOptions& options) {
    const auto* open = std::get_if<OpenSystemDrift>(&model);
    if (open == nullptr) {
        throw ConfigError("error_ensemble_open needs an open-system model");
    }
    require_normalized(psi_s, "system state");
    require_normalized(psi_e, "environment state");
    if (static_cast<std::size_t>(psi_s.size()) != open->d_s || static_cast<std::size_t>(psi_e.size()) != open->d_e) {
        throw DimensionMismatch("initial states do not match d_S / d_E");
    }
    auto trajectories = run_ensemble(model, protocol, options);
    return summarize(trajectory_errors(trajectories, psi_s, psi_e, open->d_s), options.master_seed);
}

EmpiricalChannel::EmpiricalChannel(const std::vector<TrajectoryResult>& trajectories, std::size_t d_s,
                                   const std::optional<StateVector>& psi_e)
    : dim_(d_s) {
    if (trajectories.empty()) {
        throw ConfigError("empirical channel needs at least one trajectory");
    }
    groups_.reserve(trajectories.size());
    for (const auto& r : trajectories) {
        groups_.push_back(kraus_of(r, d_s, psi_e));
    }
    build_superoperator();
}

EmpiricalChannel::EmpiricalChannel(std::vector<std::vector<Operator>> kraus_groups) : groups_(std::move(kraus_groups)) {
    if (groups_.empty() || groups_.front().empty()) {
        throw ConfigError("empirical channel needs at least one Kraus operator");
    }
    dim_ = static_cast<std::size_t>(groups_.front().front().rows());
    build_superoperator();
}

void EmpiricalChannel::build_superoperator() {
    if (dim_ > kMaxSuperoperatorDim) {
        return;
    }
    auto d2 = static_cast<Eigen::Index>(dim_ * dim_);
    Operator s = Operator::Zero(d2, d2);
    for (const auto& group : groups_) {
        for (const auto& k : group) {
            s += tensor(k.conjugate(), k);
        }
    }
    super_ = s / static_cast<double>(groups_.size());
}

Operator EmpiricalChannel::apply(const Operator& rho) const {
    auto d = static_cast<Eigen::Index>(dim_);
    if (super_) {
        Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho.data(), d * d);
        Eigen::VectorXcd out = *super_ * v;
        return Eigen::Map<const Operator>(out.data(), d, d);
    }
    Operator acc = Operator::Zero(d, d);
    for (const auto& group : groups_) {
        for (const auto& k : group) {
            acc.noalias() += k * rho * k.adjoint();
        }
    }
    return acc / static_cast<double>(groups_.size());
}

Operator EmpiricalChannel::apply_adjoint(const Operator& rho) const {
    auto d = static_cast<Eigen::Index>(dim_);
    if (super_) {
        Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho.data(), d * d);
        Eigen::VectorXcd out = super_->adjoint() * v;
        return Eigen::Map<const Operator>(out.data(), d, d);
    }
    Operator acc = Operator::Zero(d, d);
    for (const auto& group : groups_) {
        for (const auto& k : group) {
            acc.noalias() += k.adjoint() * rho * k;
        }
    }
    return acc / static_cast<double>(groups_.size());
}

double EmpiricalChannel::fidelity(const StateVector& psi) const {
    if (super_) {
        Operator rho = projector_onto(psi);
        auto d2 = static_cast<Eigen::Index>(dim_ * dim_);
        Eigen::Map<const Eigen::VectorXcd> v(rho.data(), d2);
        return v.dot(*super_ * v).real();
    }
    double acc = 0;
    for (const auto& group : groups_) {
        for (const auto& k : group) {
            acc += std::norm(psi.dot(k * psi));
        }
    }
    return acc / static_cast<double>(groups_.size());
}

std::vector<double> EmpiricalChannel::errors(const StateVector& psi) const {
    std::vector<double> out;
    out.reserve(groups_.size());
    for (const auto& group : groups_) {
        double f = 0;
        for (const auto& k : group) {
            f += std::norm(psi.dot(k * psi));
        }
        out.push_back(clamp_probability(1.0 - f));
    }
    return out;
}

StateSearchResult maximize_error(const EmpiricalChannel& channel, const SearchOptions& options, Rng& rng) {
    StateSearchResult best{-1.0, StateVector()};
    const std::size_t dim = channel.dim();
    const double half_pi = 0.5 * M_PI;
    constexpr int kScan = 12;
    constexpr int kGolden = 30;
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);

    for (std::size_t start = 0; start < std::max<std::size_t>(1, options.n_starts); start++) {
        StateVector psi = random_state(dim, rng);
        double value = channel.error(psi);
        for (std::size_t it = 0; it < options.n_iters; it++) {
            Operator rho = projector_onto(psi);
            Operator image = channel.apply(rho);

            // Alternating-eigenvector candidate.
            Eigen::SelfAdjointEigenSolver<Operator> solver(0.5 * (image + image.adjoint()));
            StateVector cand = solver.eigenvectors().col(0);
            double cand_value = channel.error(cand);

            // Geodesic line search along the projected ascent direction of the error.
            Operator a = image + channel.apply_adjoint(rho);
            StateVector grad = a * psi;
            grad -= psi.dot(grad) * psi;
            double gnorm = grad.norm();
            if (gnorm > 1e-300) {
                StateVector dir = -grad / gnorm;
                int best_k = 0;
                double best_scan = value;
                for (int k = 1; k <= kScan; k++) {
                    double v = channel.error(geodesic(psi, dir, half_pi * k / kScan));
                    if (v > best_scan) {
                        best_scan = v;
                        best_k = k;
                    }
                }
                if (best_k > 0) {
                    double lo = half_pi * std::max(0, best_k - 1) / kScan;
                    double hi = half_pi * std::min(kScan, best_k + 1) / kScan;
                    double x1 = hi - inv_phi * (hi - lo);
                    double x2 = lo + inv_phi * (hi - lo);
                    double f1 = channel.error(geodesic(psi, dir, x1));
                    double f2 = channel.error(geodesic(psi, dir, x2));
                    for (int g = 0; g < kGolden; g++) {
                        if (f1 > f2) {
                            hi = x2;
                            x2 = x1;
                            f2 = f1;
                            x1 = hi - inv_phi * (hi - lo);
                            f1 = channel.error(geodesic(psi, dir, x1));
                        } else {
                            lo = x1;
                            x1 = x2;
                            f1 = f2;
                            x2 = lo + inv_phi * (hi - lo);
                            f2 = channel.error(geodesic(psi, dir, x2));
                        }
                    }
                    double s = 0.5 * (lo + hi);
                    StateVector ls = geodesic(psi, dir, s);
                    double ls_value = channel.error(ls);
                    if (ls_value < best_scan) {
                        ls = geodesic(psi, dir, half_pi * best_k / kScan);
                        ls_value = best_scan;
                    }
                    if (ls_value > cand_value) {
                        cand = ls;
                        cand_value = ls_value;
                    }
                }
            }
            if (cand_value <= value) {
                break;
            }
            double moved = 1.0 - std::norm(psi.dot(cand));
            psi = cand;
            value = cand_value;
            if (moved < tol::search_converged) {
                break;
            }
        }
        if (value > best.value) {
            best = {value, psi};
        }
    }
    best.value = clamp_probability(best.value);
    return best;
}

StateSearchResult bloch_grid_maximum(const EmpiricalChannel& channel, std::size_t n_polar, std::size_t n_azimuthal) {
    if (channel.dim() != 2) {
        throw ConfigError("the Bloch-grid oracle is defined for qubits only");
    }
    if (n_polar < 2 || n_azimuthal < 1) {
        throw ConfigError("Bloch grid needs at least 2 polar and 1 azimuthal points");
    }
    StateSearchResult best{-1.0, StateVector()};
    StateVector psi(2);
    for (std::size_t i = 0; i < n_polar; i++) {
        double theta = M_PI * static_cast<double>(i) / static_cast<double>(n_polar - 1);
        for (std::size_t j = 0; j < n_azimuthal; j++) {
            double phi = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(n_azimuthal);
            psi(0) = std::cos(0.5 * theta);
            psi(1) = std::polar(std::sin(0.5 * theta), phi);
            double v = channel.error(psi);
            if (v > best.value) {
                best = {v, psi};
            }
        }
    }
    best.value = clamp_probability(best.value);
    return best;
}

ErrorEstimate worst_case_from_trajectories(const std::vector<TrajectoryResult>& trajectories, std::size_t d_s,
                                           const std::optional<StateVector>& psi_e, const SearchOptions& search,
                                           uint64_t master_seed) {
    EmpiricalChannel channel(trajectories, d_s, psi_e);
    Rng rng(stream_seed(master_seed, std::numeric_limits<uint64_t>::max()));
    StateSearchResult found = maximize_error(channel, search, rng);
    ErrorEstimate est = summarize(channel.errors(found.state), master_seed);
    est.mean = found.value;
    est.argmax_state = found.state;
    est.lower_bound = true;
    if (search.grid_oracle && d_s == 2) {
        est.grid_oracle = bloch_grid_maximum(channel, search.grid_polar, search.grid_azimuthal).value;
    }
    return est;
}

ErrorEstimate worst_case_error(const DriftModel& model, const ProtocolSpec& protocol, const EnsembleOptions& options,
                               const SearchOptions& search, const std::optional<StateVector>& psi_e) {
    std::optional<StateVector> env;
    if (const auto* open = std::get_if<OpenSystemDrift>(&model)) {
        if (!psi_e) {
            throw ConfigError("worst_case_error on an open model needs a pure environment state");
        }
        require_normalized(*psi_e, "environment state");
        if (static_cast<std::size_t>(psi_e->size()) != open->d_e) {
            throw DimensionMismatch("environment state does not match d_E");
        }
        env = psi_e;
    }
    auto trajectories = run_ensemble(model, protocol, options);
    return worst_case_from_trajectories(trajectories, system_dim(model), env, search, options.master_seed);
}

}  // namespace ddsim
