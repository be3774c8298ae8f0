#include "ddsim/evolution.h"

#include <gtest/gtest.h>

#include <cmath>

#include "ddsim/error_metrics.h"
#include "ddsim/errors.h"
#include "ddsim/rng.h"

namespace ddsim {
namespace {

ProtocolSpec spec(ProtocolKind kind, std::optional<ControlGroup> group, double delta_t, double total_time) {
    ProtocolSpec p;
    p.kind = kind;
    p.group = std::move(group);
    p.delta_t = delta_t;
    p.total_time = total_time;
    return p;
}

ControlPath embed(const ControlPath& path, std::size_t d_e) {
    ControlPath out = path;
    for (auto& f : out.frames) {
        f = tensor(f, identity(d_e));
    }
    for (auto& p : out.pulses) {
        p = tensor(p, identity(d_e));
    }
    for (auto& p : out.terminal_pulses) {
        p = tensor(p, identity(d_e));
    }
    return out;
}

DriftModel dephasing_model(double lambda, const Operator& h_env) {
    return make_open_system(2, 2, h_env, {Coupling{StaticDrift{lambda * pauli::z()}, pauli::x()}});
}

TEST(Logical, ZeroDriftIsIdentity) {
    Rng rng(1);
    ControlPath p = random_path(pauli_group(1), 0.1, 1.0, rng);
    TrajectoryResult r = propagate_logical(make_static(zero_operator(2)), p);
    EXPECT_EQ(max_abs(r.propagator - identity(2)), 0.0);
}

TEST(Logical, NoControlIsFreeEvolution) {
    Operator h = 0.4 * pauli::x() + 0.9 * pauli::z();
    Rng rng(1);
    ControlPath p = make_path(spec(ProtocolKind::none, std::nullopt, 0.0, 1.3), 2, rng);
    TrajectoryResult r = propagate_logical(make_static(h), p);
    EXPECT_LE(max_abs(r.propagator - expm_hermitian(h, 1.3)), 1e-12);
}

TEST(Logical, SpinEchoIdentity) {
    ControlGroup echo = custom_group({pauli::i2(), pauli::x()});
    for (double k : {0.3, 1.0, 2.2}) {
        ControlPath p = cyclic_path(echo, {0, 1}, 0.05, 0.1);
        TrajectoryResult r = propagate_logical(make_static(k * pauli::z()), p);
        Operator analytic = expm_hermitian(-k * pauli::z(), 0.05) * expm_hermitian(k * pauli::z(), 0.05);
        EXPECT_LE(max_abs(r.propagator - analytic), 1e-15);
        EXPECT_LE(max_abs(r.propagator - identity(2)), 1e-12);
    }
}

TEST(Logical, IntervalProductByHand) {
    Operator h = 0.7 * pauli::z() + 0.2 * pauli::y();
    Rng rng(4);
    ControlPath p = random_path(pauli_group(1), 0.25, 1.0, rng);
    Operator expected = identity(2);
    for (const auto& f : p.frames) {
        expected = expm_hermitian(f.adjoint() * h * f, 0.25) * expected;
    }
    EXPECT_LE(max_abs(propagate_logical(make_static(h), p).propagator - expected), 1e-13);
}

TEST(Logical, PiecewiseIndependentOfSubsteps) {
    DriftModel m = make_piecewise({0.0, 0.3, 0.55, 1.0}, {pauli::z(), pauli::x() + 0.1 * pauli::y(), pauli::y()});
    Rng rng(2);
    ControlPath p = random_path(pauli_group(1), 0.1, 1.0, rng);
    Operator a = propagate_logical(m, p, 1).propagator;
    Operator b = propagate_logical(m, p, 64).propagator;
    EXPECT_LE(max_abs(a - b), 1e-13);
    // Boundary at 0.55 splits an interval; check against a hand-built product.
    Operator expected = identity(2);
    for (std::size_t j = 0; j < p.n_intervals(); j++) {
        double t0 = 0.1 * static_cast<double>(j);
        double t1 = t0 + 0.1;
        for (double b0 : {0.3, 0.55}) {
            if (b0 > t0 + 1e-12 && b0 < t1 - 1e-12) {
                expected = expm_hermitian(p.frames[j].adjoint() * evaluate(m, t0) * p.frames[j], b0 - t0) * expected;
                t0 = b0;
            }
        }
        expected = expm_hermitian(p.frames[j].adjoint() * evaluate(m, t0) * p.frames[j], t1 - t0) * expected;
    }
    EXPECT_LE(max_abs(a - expected), 1e-13);
}

TEST(Logical, TelegraphSwitchesAreExactBoundaries) {
    DriftModel m = make_telegraph(pauli::z(), pauli::x(), 1.0);
    auto& tg = std::get<TelegraphDrift>(m);
    tg.switches = std::vector<double>{0.13, 0.61};
    tg.horizon = 1.0;
    ControlGroup g = pauli_group(1);
    ControlPath p = cyclic_path(g, default_order(g), 0.25, 1.0);
    Operator expected = identity(2);
    auto step = [&](const Operator& f, const Operator& h, double dt) {
        expected = expm_hermitian(f.adjoint() * h * f, dt) * expected;
    };
    step(p.frames[0], pauli::z(), 0.13);
    step(p.frames[0], pauli::x(), 0.12);
    step(p.frames[1], pauli::x(), 0.25);
    step(p.frames[2], pauli::x(), 0.11);
    step(p.frames[2], pauli::z(), 0.14);
    step(p.frames[3], pauli::z(), 0.25);
    EXPECT_LE(max_abs(propagate_logical(m, p).propagator - expected), 1e-13);
}

TEST(Logical, HorizonMismatch) {
    DriftModel m = make_piecewise({0.0, 0.5}, {pauli::z()});
    Rng rng(1);
    ControlPath p = random_path(pauli_group(1), 0.1, 1.0, rng);
    EXPECT_THROW(propagate_logical(m, p), ConfigError);
}

TEST(Logical, IdentityShiftIsGlobalPhase) {
    Operator h = 0.6 * pauli::x() + 0.3 * pauli::z();
    Rng rng(3);
    ControlPath p = random_path(pauli_group(1), 0.1, 1.0, rng);
    Operator u = propagate_logical(StaticDrift{h}, p).propagator;
    Operator v = propagate_logical(StaticDrift{h + 2.5 * identity(2)}, p).propagator;
    Rng srng(10);
    for (int i = 0; i < 5; i++) {
        StateVector psi = haar_sample(2, srng).col(0);
        EXPECT_NEAR(error_fixed(u, psi), error_fixed(v, psi), 1e-11);
    }
}

TEST(DoublyRotating, ZeroCouplingIsIdentity) {
    DriftModel m = make_open_system(2, 3, Operator(tensor(pauli::z(), pauli::i2()).block(0, 0, 3, 3)), {});
    Rng rng(5);
    ControlPath p = random_path(pauli_group(1), 0.1, 1.0, rng);
    TrajectoryResult r = propagate_doubly_rotating(m, p, 8);
    EXPECT_LE(max_abs(r.propagator - identity(6)), 1e-11);
}

TEST(DoublyRotating, CommutingBathMatchesClosedJointModel) {
    DriftModel m = make_open_system(2, 2, pauli::z(), {Coupling{StaticDrift{0.5 * pauli::x()}, pauli::z()}});
    Rng rng(6);
    ControlPath p = random_path(pauli_group(1), 0.1, 1.0, rng);
    TrajectoryResult r = propagate_doubly_rotating(m, p, 4);
    DriftModel joint = make_static(tensor(0.5 * pauli::x(), pauli::z()));
    Operator closed = propagate_logical(joint, embed(p, 2)).propagator;
    EXPECT_LE(max_abs(r.propagator - closed), 1e-12);
    EXPECT_EQ(r.substeps_used, 1u);
}

TEST(DoublyRotating, AgreesWithReferenceAndConvergesAtSecondOrder) {
    DriftModel m = dephasing_model(0.5, 3.0 * pauli::z());
    const auto& om = std::get<OpenSystemDrift>(m);
    Rng rng(7);
    ControlPath p = random_path(pauli_group(1), 0.1, 1.0, rng);
    Operator ref = doubly_rotating_reference(om, p);
    std::vector<double> errs;
    for (std::size_t s : {2, 4, 8, 16, 32}) {
        Operator u = propagate_doubly_rotating(m, p, s).propagator;
        EXPECT_TRUE(is_unitary(u, 1e-10));
        errs.push_back(spectral_norm(u - ref));
    }
    for (std::size_t i = 0; i + 1 < errs.size(); i++) {
        double ratio = errs[i] / errs[i + 1];
        EXPECT_GT(ratio, 3.5);
        EXPECT_LT(ratio, 4.5);
    }
    EXPECT_LE(spectral_norm(propagate_doubly_rotating(m, p, 512).propagator - ref), 1e-6);
}

TEST(DoublyRotating, SuccessiveDifferencesShrinkFourfold) {
    DriftModel m = dephasing_model(0.5, 2.0 * pauli::y() + pauli::x());
    Rng rng(8);
    ControlPath p = random_path(pauli_group(1), 0.1, 1.0, rng);
    std::vector<Operator> us;
    for (std::size_t s : {4, 8, 16, 32}) {
        us.push_back(propagate_doubly_rotating(m, p, s).propagator);
    }
    for (std::size_t i = 0; i + 2 < us.size(); i++) {
        double ratio = spectral_norm(us[i + 1] - us[i]) / spectral_norm(us[i + 2] - us[i + 1]);
        EXPECT_GT(ratio, 3.5);
        EXPECT_LT(ratio, 4.5);
    }
}

TEST(DoublyRotating, ReferenceUsesFullJointPropagator) {
    DriftModel m = dephasing_model(0.4, 0.7 * pauli::x());
    const auto& om = std::get<OpenSystemDrift>(m);
    Rng rng(9);
    ControlPath p = random_path(pauli_group(1), 0.2, 1.0, rng);
    // Physical propagator by brute force, then U_E^dagger U_c^dagger U.
    Operator u = identity(4);
    Operator h = evaluate(m, 0.0);
    Operator prev = identity(4);
    for (std::size_t j = 0; j < p.n_intervals(); j++) {
        Operator f = tensor(p.frames[j], identity(2));
        u = expm_hermitian(h, 0.2) * f * prev.adjoint() * u;
        prev = f;
    }
    Operator expected = tensor(identity(2), expm_hermitian(om.h_env, 1.0)).adjoint() * prev.adjoint() * u;
    EXPECT_LE(max_abs(doubly_rotating_reference(om, p) - expected), 1e-12);
}

TEST(Ensemble, CyclicTrajectoriesIdentical) {
    ControlGroup g = pauli_group(1);
    ProtocolSpec p = spec(ProtocolKind::cyclic, g, 0.05, 1.0);
    EnsembleOptions o;
    o.n_traj = 5;
    auto rs = run_ensemble(make_static(pauli::z() + 0.3 * pauli::x()), p, o);
    ASSERT_EQ(rs.size(), 5u);
    for (const auto& r : rs) {
        EXPECT_LE(max_abs(r.propagator - rs[0].propagator), 1e-13);
    }
}

TEST(Ensemble, DeterministicAcrossRunsAndWorkers) {
    ProtocolSpec p = spec(ProtocolKind::random, pauli_group(1), 0.05, 1.0);
    DriftModel m = make_telegraph(pauli::z(), pauli::x(), 10.0);
    EnsembleOptions o;
    o.n_traj = 40;
    o.master_seed = 1234;
    o.workers = 1;
    auto a = run_ensemble(m, p, o);
    o.workers = 8;
    auto b = run_ensemble(m, p, o);
    auto c = run_ensemble(m, p, o);
    for (std::size_t i = 0; i < a.size(); i++) {
        EXPECT_EQ(max_abs(a[i].propagator - b[i].propagator), 0.0);
        EXPECT_EQ(max_abs(b[i].propagator - c[i].propagator), 0.0);
        EXPECT_EQ(a[i].seed, stream_seed(1234, i));
        EXPECT_TRUE(is_unitary(a[i].propagator, 1e-10));
    }
    TrajectoryResult t = run_trajectory(m, p, o.substeps, 1234, 17);
    EXPECT_EQ(max_abs(t.propagator - a[17].propagator), 0.0);
    EXPECT_GT(max_abs(a[0].propagator - a[1].propagator), 0.0);
}

TEST(Ensemble, ProtocolValidation) {
    EnsembleOptions o;
    EXPECT_THROW(run_ensemble(make_static(pauli::z()), spec(ProtocolKind::random, std::nullopt, 0.1, 1.0), o),
                 ConfigError);
    EXPECT_THROW(run_ensemble(make_static(pauli::z()), spec(ProtocolKind::random, pauli_group(2), 0.1, 1.0), o),
                 DimensionMismatch);
    o.n_traj = 0;
    EXPECT_THROW(run_ensemble(make_static(pauli::z()), spec(ProtocolKind::none, std::nullopt, 0.0, 1.0), o),
                 ConfigError);
}

TEST(Convergence, ExactAndMidpoint) {
    ProtocolSpec p = spec(ProtocolKind::random, pauli_group(1), 0.1, 1.0);
    ConvergenceReport closed = substep_convergence(make_static(pauli::z()), p, 16, 3);
    EXPECT_TRUE(closed.exact);
    EXPECT_EQ(closed.difference, 0.0);
    ConvergenceReport open = substep_convergence(dephasing_model(0.5, 3.0 * pauli::z()), p, 16, 3);
    EXPECT_FALSE(open.exact);
    EXPECT_GT(open.difference, 0.0);
    EXPECT_LT(open.difference, 1e-3);
}

TEST(Protocol, GroupOrder) {
    EXPECT_EQ(protocol_group_order(spec(ProtocolKind::none, std::nullopt, 0.0, 1.0)), 1u);
    EXPECT_EQ(protocol_group_order(spec(ProtocolKind::random, pauli_group(2), 0.1, 1.0)), 16u);
    EXPECT_EQ(protocol_group_order(spec(ProtocolKind::random, ControlGroup::haar(2), 0.1, 1.0)), 0u);
    EXPECT_TRUE(is_deterministic(spec(ProtocolKind::cyclic, pauli_group(1), 0.1, 0.8)));
    EXPECT_FALSE(is_deterministic(spec(ProtocolKind::hybrid_cycle, pauli_group(1), 0.1, 0.8)));
}

}  // namespace
}  // namespace ddsim
