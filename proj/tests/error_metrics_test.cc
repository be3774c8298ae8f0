#include "ddsim/error_metrics.h"

#include <gtest/gtest.h>

#include <cmath>

#include "ddsim/bounds.h"
#include "ddsim/errors.h"
#include "ddsim/rng.h"
#include "ddsim/tolerances.h"

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

StateVector ket(std::initializer_list<Complex> amps) {
    StateVector v(static_cast<Eigen::Index>(amps.size()));
    Eigen::Index i = 0;
    for (auto a : amps) {
        v(i++) = a;
    }
    return v.normalized();
}

StateVector random_state(std::size_t d, Rng& rng) { return haar_sample(d, rng).col(0); }

// Bloch vector z-component of a qubit state.
double bloch_z(const StateVector& psi) { return std::norm(psi(0)) - std::norm(psi(1)); }

TEST(ErrorFixed, Examples) {
    Rng rng(1);
    StateVector psi = random_state(3, rng);
    EXPECT_NEAR(error_fixed(identity(3), psi), 0.0, 1e-15);
    EXPECT_NEAR(error_fixed(pauli::x(), ket({1, 0})), 1.0, 1e-15);
    for (double kt : {0.1, 0.4, 1.2}) {
        EXPECT_NEAR(error_fixed(expm_hermitian(pauli::z(), kt), ket({1, 1})), std::pow(std::sin(kt), 2), 1e-14);
    }
    EXPECT_THROW(error_fixed(pauli::x(), StateVector::Ones(2)), InvalidOperator);
    EXPECT_THROW(error_fixed(identity(3), ket({1, 0})), DimensionMismatch);
}

TEST(ErrorFixed, PhaseBlindRangeAndTraceForm) {
    Rng rng(2);
    for (int i = 0; i < 20; i++) {
        Operator u = haar_sample(4, rng);
        StateVector psi = random_state(4, rng);
        double e = error_fixed(u, psi);
        EXPECT_GE(e, 0.0);
        EXPECT_LE(e, 1.0);
        EXPECT_NEAR(e, error_fixed(std::polar(1.0, 0.37) * u, psi), 1e-14);
        EXPECT_NEAR(error_fixed_trace_form(u, psi), e, 1e-12);
    }
}

TEST(NamedState, Values) {
    EXPECT_LE((named_state("zero", 4) - ket({1, 0, 0, 0})).norm(), 1e-15);
    EXPECT_LE((named_state("plus", 2) - ket({1, 1})).norm(), 1e-15);
    EXPECT_THROW(named_state("plus", 3), ConfigError);
    EXPECT_THROW(named_state("minus", 2), ConfigError);
}

TEST(Summarize, SampleStandardError) {
    ErrorEstimate e = summarize({0.1, 0.2, 0.3, 0.6}, 9);
    EXPECT_NEAR(e.mean, 0.3, 1e-15);
    double var = (0.04 + 0.01 + 0.0 + 0.09) / 3.0;
    EXPECT_NEAR(e.standard_error, std::sqrt(var / 4.0), 1e-15);
    EXPECT_EQ(e.n_traj, 4u);
    EXPECT_EQ(e.seed, 9u);
    EXPECT_EQ(summarize({0.25}, 0).standard_error, 0.0);
}

TEST(Ensemble, ZeroDrift) {
    EnsembleOptions o;
    o.n_traj = 20;
    ErrorEstimate e =
        error_ensemble(make_static(zero_operator(2)), spec(ProtocolKind::random, pauli_group(1), 0.1, 1.0), ket({1, 1}), o);
    EXPECT_LE(e.mean, 1e-15);
    EXPECT_LE(e.standard_error, 1e-15);
}

TEST(Ensemble, SpinEcho) {
    EnsembleOptions o;
    o.n_traj = 3;
    ControlGroup echo = custom_group({pauli::i2(), pauli::x()});
    ErrorEstimate e = error_ensemble(make_static(pauli::z()), spec(ProtocolKind::cyclic, echo, 0.05, 0.1), ket({1, 1}), o);
    EXPECT_LE(e.mean, 1e-12);
    EXPECT_EQ(e.standard_error, 0.0);
}

TEST(Ensemble, FreeEvolutionClosedForm) {
    EnsembleOptions o;
    o.n_traj = 4;
    ErrorEstimate e =
        error_ensemble(make_static(pauli::z()), spec(ProtocolKind::none, std::nullopt, 0.0, 0.3), ket({1, 1}), o);
    EXPECT_NEAR(e.mean, std::pow(std::sin(0.3), 2), 1e-12);
    EXPECT_EQ(e.standard_error, 0.0);
}

TEST(Ensemble, MeanInUnitInterval) {
    EnsembleOptions o;
    o.n_traj = 50;
    ErrorEstimate e = error_ensemble(make_static(3.0 * pauli::x() + pauli::z()),
                                     spec(ProtocolKind::random, ControlGroup::haar(2), 0.25, 5.0), ket({1, 0}), o);
    EXPECT_GE(e.mean, 0.0);
    EXPECT_LE(e.mean, 1.0);
    EXPECT_GT(e.standard_error, 0.0);
    EXPECT_THROW(error_ensemble(make_open_system(2, 2, pauli::z(), {}), spec(ProtocolKind::none, std::nullopt, 0, 1),
                                ket({1, 0}), o),
                 ConfigError);
}

TEST(OpenEnsemble, ZeroCoupling) {
    EnsembleOptions o;
    o.n_traj = 10;
    DriftModel m = make_open_system(2, 2, 1.7 * pauli::x(), {});
    ErrorEstimate e = error_ensemble_open(m, spec(ProtocolKind::random, pauli_group(1), 0.1, 1.0), ket({1, 1}),
                                          ket({1, 0}), o);
    EXPECT_LE(e.mean, 1e-11);
}

TEST(OpenEnsemble, PureDephasingOracle) {
    const double lambda = 0.5;
    const double t = 1.0;
    DriftModel m = make_open_system(2, 2, zero_operator(2), {Coupling{StaticDrift{lambda * pauli::z()}, pauli::x()}});
    EnsembleOptions o;
    // 4x4 oracle: exp(-i a Z(x)X) = cos(a) 1 - i sin(a) Z(x)X since (Z(x)X)^2 = 1.
    Operator zx = Operator::Zero(4, 4);
    zx(0, 1) = 1;
    zx(1, 0) = 1;
    zx(2, 3) = -1;
    zx(3, 2) = -1;
    Operator oracle = std::cos(lambda * t) * identity(4) - Complex(0, std::sin(lambda * t)) * zx;
    Rng rng(3);
    for (int trial = 0; trial < 4; trial++) {
        StateVector ps = random_state(2, rng);
        StateVector pe = random_state(2, rng);
        StateVector out = oracle * StateVector(tensor(ps, pe));
        Operator rho_s = Operator::Zero(2, 2);
        for (int e = 0; e < 2; e++) {
            StateVector branch(2);
            branch << out(e), out(2 + e);
            rho_s += branch * branch.adjoint();
        }
        double expected = 1.0 - ps.dot(rho_s * ps).real();
        ErrorEstimate est = error_ensemble_open(m, spec(ProtocolKind::none, std::nullopt, 0.0, t), ps, pe, o);
        EXPECT_NEAR(est.mean, expected, 1e-12);
    }
    ErrorEstimate plus = error_ensemble_open(m, spec(ProtocolKind::none, std::nullopt, 0.0, t), ket({1, 1}),
                                             ket({1, 0}), o);
    EXPECT_NEAR(plus.mean, std::pow(std::sin(lambda * t), 2), 1e-12);
}

TEST(OpenEnsemble, RandomDecouplingWithinBound) {
    const double lambda = 0.5;
    DriftModel m = make_open_system(2, 2, 0.3 * pauli::z(), {Coupling{StaticDrift{lambda * pauli::z()}, pauli::x()}});
    EnsembleOptions o;
    o.n_traj = 500;
    o.master_seed = 5;
    ErrorEstimate e = error_ensemble_open(m, spec(ProtocolKind::random, pauli_group(1), 0.01, 1.0), ket({1, 1}),
                                          ket({1, 0}), o);
    EXPECT_LE(e.mean - tol::z99 * e.standard_error, random_bound(1.0, 0.01, lambda));
}

TEST(OpenEnsemble, FramesAgreeOnReducedError) {
    DriftModel m = make_open_system(2, 2, 0.8 * pauli::x(), {Coupling{StaticDrift{0.5 * pauli::z()}, pauli::y()}});
    const auto& om = std::get<OpenSystemDrift>(m);
    Rng rng(4);
    ControlPath p = random_path(pauli_group(1), 0.1, 1.0, rng);
    StateVector ps = random_state(2, rng);
    StateVector pe = random_state(2, rng);
    double logical = reduced_error(logical_open_propagator(om, p), ps, pe);
    double rotating = reduced_error(doubly_rotating_reference(om, p), ps, pe);
    EXPECT_NEAR(logical, rotating, 1e-10);

    DriftModel commuting = make_open_system(2, 2, pauli::z(), {Coupling{StaticDrift{0.5 * pauli::x()}, pauli::z()}});
    const auto& oc = std::get<OpenSystemDrift>(commuting);
    double direct = reduced_error(propagate_doubly_rotating(commuting, p, 4).propagator, ps, pe);
    EXPECT_NEAR(direct, reduced_error(logical_open_propagator(oc, p), ps, pe), 1e-10);
}

TEST(Channel, MatchesKrausSums) {
    Rng rng(5);
    std::vector<std::vector<Operator>> groups;
    for (int i = 0; i < 6; i++) {
        groups.push_back({haar_sample(3, rng)});
    }
    EmpiricalChannel ch(groups);
    StateVector psi = random_state(3, rng);
    Operator rho = psi * psi.adjoint();
    Operator direct = Operator::Zero(3, 3);
    for (const auto& g : groups) {
        direct += g[0] * rho * g[0].adjoint();
    }
    direct /= 6.0;
    EXPECT_LE(max_abs(ch.apply(rho) - direct), 1e-14);
    EXPECT_NEAR(ch.fidelity(psi), psi.dot(direct * psi).real(), 1e-14);
    Operator a = haar_sample(3, rng);
    Operator b = haar_sample(3, rng);
    EXPECT_NEAR(std::abs((a * ch.apply(b)).trace() - (ch.apply_adjoint(a) * b).trace()), 0.0, 1e-13);
    auto es = ch.errors(psi);
    double mean = 0;
    for (double e : es) {
        mean += e / 6.0;
    }
    EXPECT_NEAR(mean, ch.error(psi), 1e-14);
}

TEST(Channel, LargeDimensionUsesKrausPath) {
    Rng rng(6);
    std::vector<std::vector<Operator>> groups;
    for (int i = 0; i < 3; i++) {
        groups.push_back({haar_sample(20, rng)});
    }
    EmpiricalChannel ch(groups);
    StateVector psi = random_state(20, rng);
    double expected = 0;
    for (const auto& g : groups) {
        expected += error_fixed(g[0], psi) / 3.0;
    }
    EXPECT_NEAR(ch.error(psi), expected, 1e-13);
}

TEST(WorstCase, ZeroDrift) {
    EnsembleOptions o;
    o.n_traj = 5;
    ErrorEstimate e = worst_case_error(make_static(zero_operator(2)), spec(ProtocolKind::random, pauli_group(1), 0.1, 1.0),
                                       o, SearchOptions{});
    EXPECT_LE(e.mean, 1e-14);
    EXPECT_TRUE(e.lower_bound);
    ASSERT_TRUE(e.argmax_state.has_value());
}

TEST(WorstCase, FreeEvolutionOnEquator) {
    for (double kt : {0.2, 0.7, 1.3}) {
        EnsembleOptions o;
        SearchOptions s;
        s.grid_oracle = true;
        ErrorEstimate e =
            worst_case_error(make_static(pauli::z()), spec(ProtocolKind::none, std::nullopt, 0.0, kt), o, s);
        EXPECT_NEAR(e.mean, std::pow(std::sin(kt), 2), 1e-9);
        ASSERT_TRUE(e.grid_oracle.has_value());
        EXPECT_NEAR(*e.grid_oracle, e.mean, 1e-3);
        EXPECT_LE(std::abs(bloch_z(*e.argmax_state)), 1e-4);
    }
}

TEST(WorstCase, DominatesFixedStates) {
    DriftModel m = make_static(pauli::z() + 0.5 * pauli::y());
    ProtocolSpec p = spec(ProtocolKind::random, pauli_group(1), 0.1, 1.0);
    EnsembleOptions o;
    o.n_traj = 200;
    o.master_seed = 8;
    ErrorEstimate worst = worst_case_error(m, p, o, SearchOptions{});
    Rng rng(9);
    for (int i = 0; i < 10; i++) {
        ErrorEstimate fixed = error_ensemble(m, p, random_state(2, rng), o);
        EXPECT_GE(worst.mean + 1e-12, fixed.mean);
    }
}

TEST(WorstCase, SearchMatchesGridOnRandomChannels) {
    Rng rng(10);
    for (int trial = 0; trial < 5; trial++) {
        std::vector<std::vector<Operator>> groups;
        for (int i = 0; i < 8; i++) {
            Operator h = haar_sample(2, rng);
            Operator herm = (h + h.adjoint()) / 2.0;
            groups.push_back({expm_hermitian(herm, 0.3)});
        }
        EmpiricalChannel ch(groups);
        Rng srng(trial);
        StateSearchResult best = maximize_error(ch, SearchOptions{}, srng);
        StateSearchResult grid = bloch_grid_maximum(ch, 200, 400);
        EXPECT_GE(best.value, grid.value - 1e-3);
        EXPECT_NEAR(best.value, ch.error(best.state), 1e-12);
    }
}

TEST(WorstCase, OpenSystemReducedChannel) {
    DriftModel m = make_open_system(2, 2, zero_operator(2), {Coupling{StaticDrift{0.5 * pauli::z()}, pauli::x()}});
    EnsembleOptions o;
    SearchOptions s;
    s.grid_oracle = true;
    ErrorEstimate e = worst_case_error(m, spec(ProtocolKind::none, std::nullopt, 0.0, 1.0), o, s, ket({1, 0}));
    // Dephasing in the Z basis: equatorial states lose sin^2(lambda T).
    EXPECT_NEAR(e.mean, std::pow(std::sin(0.5), 2), 1e-9);
    EXPECT_NEAR(*e.grid_oracle, e.mean, 1e-3);
}

TEST(WorstCase, Deterministic) {
    DriftModel m = make_static(pauli::x() + 0.3 * pauli::z());
    ProtocolSpec p = spec(ProtocolKind::random, pauli_group(1), 0.1, 1.0);
    EnsembleOptions o;
    o.n_traj = 30;
    o.master_seed = 77;
    ErrorEstimate a = worst_case_error(m, p, o, SearchOptions{});
    o.workers = 4;
    ErrorEstimate b = worst_case_error(m, p, o, SearchOptions{});
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.standard_error, b.standard_error);
}

}  // namespace
}  // namespace ddsim
