#include "ddsim/drift_model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ddsim/errors.h"
#include "ddsim/tolerances.h"

namespace ddsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Operator closed_hamiltonian(const Operator& h, const char* what) {
    require_hermitian(h, what);
    Operator out = traceless_part(0.5 * (h + h.adjoint()));
    return out;
}

void check_boundaries(const std::vector<double>& boundaries, std::size_t n_ops) {
    if (n_ops == 0 || boundaries.size() != n_ops + 1) {
        throw ConfigError("piecewise drift: need one more boundary than segment operators");
    }
    for (std::size_t i = 1; i < boundaries.size(); i++) {
        if (!(boundaries[i] > boundaries[i - 1])) {
            throw ConfigError("piecewise drift: boundaries must be strictly increasing");
        }
    }
}

std::size_t segment_index(const std::vector<double>& boundaries, double t) {
    if (t < boundaries.front() || t >= boundaries.back()) {
        throw ConfigError("time " + std::to_string(t) + " outside the piecewise horizon [" +
                          std::to_string(boundaries.front()) + ", " + std::to_string(boundaries.back()) + ")");
    }
    auto it = std::upper_bound(boundaries.begin(), boundaries.end(), t);
    return static_cast<std::size_t>(it - boundaries.begin()) - 1;
}

void check_coupling(const Coupling& c, std::size_t d_s, std::size_t d_e, std::size_t index) {
    auto check_system = [&](const Operator& j) {
        if (static_cast<std::size_t>(j.rows()) != d_s) {
            throw DimensionMismatch("coupling " + std::to_string(index) + ": system operator is not d_S x d_S");
        }
        require_hermitian(j, "coupling system operator");
        if (std::abs(j.trace()) > tol::traceless) {
            throw InvalidOperator("coupling " + std::to_string(index) +
                                  ": system operator must be traceless (move its trace into H_E)");
        }
    };
    std::visit(overloaded{[&](const StaticDrift& s) { check_system(s.h); },
                          [&](const PiecewiseDrift& p) {
                              check_boundaries(p.boundaries, p.hs.size());
                              for (const auto& h : p.hs) {
                                  check_system(h);
                              }
                          }},
               c.system);
    if (static_cast<std::size_t>(c.bath.rows()) != d_e) {
        throw DimensionMismatch("coupling " + std::to_string(index) + ": bath operator is not d_E x d_E");
    }
    require_hermitian(c.bath, "coupling bath operator");
}

double term_horizon(const SystemTerm& term) {
    if (const auto* p = std::get_if<PiecewiseDrift>(&term)) {
        return p->boundaries.back();
    }
    return std::numeric_limits<double>::infinity();
}

}  // namespace

DriftModel make_static(const Operator& h) {
    return StaticDrift{closed_hamiltonian(h, "static drift")};
}

DriftModel make_piecewise(std::vector<double> boundaries, const std::vector<Operator>& hs) {
    check_boundaries(boundaries, hs.size());
    PiecewiseDrift p{std::move(boundaries), {}};
    for (const auto& h : hs) {
        if (h.rows() != hs.front().rows()) {
            throw DimensionMismatch("piecewise drift: segment operators differ in dimension");
        }
        p.hs.push_back(closed_hamiltonian(h, "piecewise drift segment"));
    }
    return p;
}

DriftModel make_telegraph(const Operator& h_a, const Operator& h_b, double gamma) {
    if (h_a.rows() != h_b.rows()) {
        throw DimensionMismatch("telegraph drift: H_A and H_B differ in dimension");
    }
    if (!(gamma >= 0) || !std::isfinite(gamma)) {
        throw ConfigError("telegraph drift: switching rate must be finite and >= 0");
    }
    return TelegraphDrift{closed_hamiltonian(h_a, "telegraph H_A"), closed_hamiltonian(h_b, "telegraph H_B"), gamma,
                          std::nullopt, 0.0};
}

DriftModel make_open_system(std::size_t d_s, std::size_t d_e, const Operator& h_env,
                            std::vector<Coupling> couplings) {
    if (d_s < 1 || d_e < 1) {
        throw ConfigError("open-system drift: dimensions must be positive");
    }
    if (static_cast<std::size_t>(h_env.rows()) != d_e) {
        throw DimensionMismatch("open-system drift: H_E is not d_E x d_E");
    }
    require_hermitian(h_env, "H_E");
    for (std::size_t i = 0; i < couplings.size(); i++) {
        check_coupling(couplings[i], d_s, d_e, i);
    }
    return OpenSystemDrift{d_s, d_e, h_env, std::move(couplings)};
}

bool is_open_system(const DriftModel& model) {
    return std::holds_alternative<OpenSystemDrift>(model);
}

std::size_t system_dim(const DriftModel& model) {
    return std::visit(overloaded{[](const StaticDrift& s) { return static_cast<std::size_t>(s.h.rows()); },
                                 [](const PiecewiseDrift& p) { return static_cast<std::size_t>(p.hs.front().rows()); },
                                 [](const TelegraphDrift& t) { return static_cast<std::size_t>(t.h_a.rows()); },
                                 [](const OpenSystemDrift& o) { return o.d_s; }},
                      model);
}

std::size_t joint_dim(const DriftModel& model) {
    if (const auto* o = std::get_if<OpenSystemDrift>(&model)) {
        return o->d_s * o->d_e;
    }
    return system_dim(model);
}

double horizon_end(const DriftModel& model) {
    return std::visit(overloaded{[](const StaticDrift&) { return std::numeric_limits<double>::infinity(); },
                                 [](const PiecewiseDrift& p) { return p.boundaries.back(); },
                                 [](const TelegraphDrift& t) {
                                     return t.switches ? t.horizon : std::numeric_limits<double>::infinity();
                                 },
                                 [](const OpenSystemDrift& o) {
                                     double end = std::numeric_limits<double>::infinity();
                                     for (const auto& c : o.couplings) {
                                         end = std::min(end, term_horizon(c.system));
                                     }
                                     return end;
                                 }},
                      model);
}

Operator evaluate(const SystemTerm& term, double t) {
    return std::visit(overloaded{[&](const StaticDrift& s) -> Operator { return s.h; },
                                 [&](const PiecewiseDrift& p) -> Operator {
                                     return p.hs[segment_index(p.boundaries, t)];
                                 }},
                      term);
}

Operator evaluate(const DriftModel& model, double t) {
    if (t < 0) {
        throw ConfigError("evaluate: negative time " + std::to_string(t));
    }
    return std::visit(
        overloaded{[&](const StaticDrift& s) -> Operator { return s.h; },
                   [&](const PiecewiseDrift& p) -> Operator { return p.hs[segment_index(p.boundaries, t)]; },
                   [&](const TelegraphDrift& tg) -> Operator {
                       if (!tg.switches) {
                           throw ConfigError("telegraph drift evaluated before a realization was sampled");
                       }
                       if (t >= tg.horizon) {
                           throw ConfigError("time " + std::to_string(t) + " beyond the telegraph realization horizon");
                       }
                       auto n = std::upper_bound(tg.switches->begin(), tg.switches->end(), t) - tg.switches->begin();
                       return n % 2 == 0 ? tg.h_a : tg.h_b;
                   },
                   [&](const OpenSystemDrift& o) -> Operator {
                       Operator h = tensor(identity(o.d_s), o.h_env);
                       for (const auto& c : o.couplings) {
                           h += tensor(evaluate(c.system, t), c.bath);
                       }
                       return h;
                   }},
        model);
}

double uniform_bound_k(const DriftModel& model) {
    return std::visit(overloaded{[](const StaticDrift& s) { return spectral_norm(s.h); },
                                 [](const PiecewiseDrift& p) {
                                     double k = 0;
                                     for (const auto& h : p.hs) {
                                         k = std::max(k, spectral_norm(h));
                                     }
                                     return k;
                                 },
                                 [](const TelegraphDrift& t) {
                                     return std::max(spectral_norm(t.h_a), spectral_norm(t.h_b));
                                 },
                                 [](const OpenSystemDrift&) -> double {
                                     throw ConfigError(
                                         "uniform_bound_k is defined for closed models; use noise_strength_lambda");
                                 }},
                      model);
}

std::vector<double> coupling_breakpoints(const OpenSystemDrift& model, double t0, double t1) {
    std::vector<double> out;
    for (const auto& c : model.couplings) {
        if (const auto* p = std::get_if<PiecewiseDrift>(&c.system)) {
            for (double b : p->boundaries) {
                if (b > t0 && b < t1) {
                    out.push_back(b);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double noise_strength_lambda(const DriftModel& model) {
    const auto* o = std::get_if<OpenSystemDrift>(&model);
    if (o == nullptr) {
        throw ConfigError("noise_strength_lambda needs an open-system model");
    }
    if (o->couplings.empty()) {
        return 0.0;
    }
    // Couplings are piecewise constant, so the sup is attained at some segment start.
    std::vector<double> times{0.0};
    for (const auto& c : o->couplings) {
        if (const auto* p = std::get_if<PiecewiseDrift>(&c.system)) {
            times.insert(times.end(), p->boundaries.begin(), p->boundaries.end() - 1);
        }
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    double end = horizon_end(model);
    double lambda = 0;
    for (double t : times) {
        if (t < 0 || t >= end) {
            continue;
        }
        Operator v = Operator::Zero(static_cast<Eigen::Index>(o->d_s * o->d_e),
                                    static_cast<Eigen::Index>(o->d_s * o->d_e));
        for (const auto& c : o->couplings) {
            v += tensor(evaluate(c.system, t), c.bath);
        }
        lambda = std::max(lambda, spectral_norm(v));
    }
    return lambda;
}

DriftModel sample_telegraph(const DriftModel& model, double horizon, Rng& rng) {
    const auto* tg = std::get_if<TelegraphDrift>(&model);
    if (tg == nullptr) {
        throw ConfigError("sample_telegraph needs a telegraph model");
    }
    if (!(horizon > 0)) {
        throw ConfigError("sample_telegraph: horizon must be positive");
    }
    TelegraphDrift out = *tg;
    out.horizon = horizon;
    out.switches.emplace();
    if (tg->gamma > 0) {
        double t = rng.exponential(tg->gamma);
        while (t < horizon) {
            out.switches->push_back(t);
            t += rng.exponential(tg->gamma);
        }
    }
    return out;
}

std::vector<DriftSegment> constant_segments(const DriftModel& model, double t0, double t1) {
    std::vector<DriftSegment> out;
    std::visit(overloaded{[&](const StaticDrift& s) { out.push_back({t0, t1, &s.h, 0}); },
                          [&](const PiecewiseDrift& p) {
                              if (t0 < p.boundaries.front() || t1 > p.boundaries.back()) {
                                  throw ConfigError("piecewise drift horizon [" + std::to_string(p.boundaries.front()) +
                                                    ", " + std::to_string(p.boundaries.back()) +
                                                    ") does not cover the requested interval");
                              }
                              std::size_t j = segment_index(p.boundaries, t0);
                              double start = t0;
                              while (start < t1) {
                                  double end = std::min(t1, p.boundaries[j + 1]);
                                  out.push_back({start, end, &p.hs[j], j});
                                  start = end;
                                  j++;
                              }
                          },
                          [&](const TelegraphDrift& tg) {
                              if (!tg.switches) {
                                  throw ConfigError("telegraph drift propagated before a realization was sampled");
                              }
                              if (t1 > tg.horizon * (1 + 1e-12)) {
                                  throw ConfigError("telegraph realization horizon is shorter than the evolution time");
                              }
                              const auto& sw = *tg.switches;
                              auto it = std::upper_bound(sw.begin(), sw.end(), t0);
                              std::size_t state = static_cast<std::size_t>(it - sw.begin()) % 2;
                              double start = t0;
                              for (; it != sw.end() && *it < t1; ++it) {
                                  out.push_back({start, *it, state == 0 ? &tg.h_a : &tg.h_b, state});
                                  start = *it;
                                  state ^= 1;
                              }
                              out.push_back({start, t1, state == 0 ? &tg.h_a : &tg.h_b, state});
                          },
                          [&](const OpenSystemDrift&) {
                              throw ConfigError("constant_segments is defined for closed models only");
                          }},
               model);
    return out;
}

DriftModel rescale(const DriftModel& model, double k) {
    if (!(k >= 0)) {
        throw ConfigError("rescale: target bound must be >= 0");
    }
    if (const auto* o = std::get_if<OpenSystemDrift>(&model)) {
        double lambda = noise_strength_lambda(model);
        if (lambda == 0) {
            return model;
        }
        OpenSystemDrift out = *o;
        for (auto& c : out.couplings) {
            c.bath *= k / lambda;
        }
        return out;
    }
    double current = uniform_bound_k(model);
    if (current == 0) {
        return model;
    }
    double f = k / current;
    return std::visit(overloaded{[&](const StaticDrift& s) -> DriftModel { return StaticDrift{s.h * f}; },
                                 [&](const PiecewiseDrift& p) -> DriftModel {
                                     PiecewiseDrift out = p;
                                     for (auto& h : out.hs) {
                                         h *= f;
                                     }
                                     return out;
                                 },
                                 [&](const TelegraphDrift& t) -> DriftModel {
                                     TelegraphDrift out = t;
                                     out.h_a *= f;
                                     out.h_b *= f;
                                     return out;
                                 },
                                 [&](const OpenSystemDrift& o) -> DriftModel { return o; }},
                      model);
}

std::pair<OpenSystemDrift, StateVector> purify_environment(const OpenSystemDrift& model, const Operator& rho_env) {
    if (static_cast<std::size_t>(rho_env.rows()) != model.d_e) {
        throw DimensionMismatch("purify_environment: rho_E is not d_E x d_E");
    }
    require_hermitian(rho_env, "rho_E");
    if (std::abs(rho_env.trace() - Complex(1.0)) > 1e-10) {
        throw InvalidOperator("purify_environment: rho_E must have unit trace");
    }
    Eigen::SelfAdjointEigenSolver<Operator> solver(0.5 * (rho_env + rho_env.adjoint()));
    auto de = static_cast<Eigen::Index>(model.d_e);
    StateVector psi = StateVector::Zero(de * de);
    for (Eigen::Index i = 0; i < de; i++) {
        double p = solver.eigenvalues()(i);
        if (p < -1e-10) {
            throw InvalidOperator("purify_environment: rho_E is not positive semidefinite");
        }
        Eigen::VectorXcd basis_i = Eigen::VectorXcd::Zero(de);
        basis_i(i) = 1;
        psi += std::sqrt(std::max(p, 0.0)) * Eigen::VectorXcd(tensor(solver.eigenvectors().col(i), basis_i));
    }
    psi.normalize();
    OpenSystemDrift out = model;
    out.d_e = model.d_e * model.d_e;
    Operator ancilla = identity(model.d_e);
    out.h_env = tensor(model.h_env, ancilla);
    for (auto& c : out.couplings) {
        c.bath = tensor(c.bath, ancilla);
    }
    return {out, psi};
}

}  // namespace ddsim
