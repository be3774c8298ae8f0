#include "ddsim/control_group.h"

#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "ddsim/errors.h"
#include "ddsim/rng.h"

namespace ddsim {
namespace {

Operator random_traceless_hermitian(std::size_t d, Rng& rng) {
    Operator a(d, d);
    for (Eigen::Index i = 0; i < a.rows(); i++) {
        for (Eigen::Index j = 0; j < a.cols(); j++) {
            a(i, j) = rng.complex_normal();
        }
    }
    return traceless_part((a + a.adjoint()) / 2.0);
}

// Direct two-term average for the group {1, g}.
Operator two_element_average(const Operator& g, const Operator& x) { return (x + g.adjoint() * x * g) / 2.0; }

TEST(PauliGroup, OrderAndDimension) {
    ControlGroup g1 = pauli_group(1);
    EXPECT_EQ(g1.order(), 4u);
    EXPECT_EQ(g1.dim(), 2u);
    EXPECT_EQ(g1.labels(), (std::vector<std::string>{"I", "X", "Y", "Z"}));
    ControlGroup g2 = pauli_group(2);
    EXPECT_EQ(g2.order(), 16u);
    EXPECT_EQ(g2.dim(), 4u);
    EXPECT_EQ(g2.identity_index(), 0u);
    EXPECT_EQ(g2.labels()[6], "XY");
    EXPECT_EQ(pauli_group(3).order(), 64u);
}

TEST(PauliGroup, RangeChecked) {
    EXPECT_THROW(pauli_group(0), ConfigError);
    EXPECT_THROW(pauli_group(7), ConfigError);
}

TEST(PauliGroup, ClosedUnderProducts) {
    ControlGroup g = pauli_group(2);
    for (const auto& a : g.elements()) {
        for (const auto& b : g.elements()) {
            EXPECT_TRUE(g.find_class(a * b).has_value());
        }
    }
}

TEST(CustomGroup, EchoPair) {
    ControlGroup g = custom_group({pauli::i2(), pauli::z()});
    EXPECT_EQ(g.order(), 2u);
    EXPECT_FALSE(g.irreducible_hint().has_value());
}

TEST(CustomGroup, MissingProduct) {
    try {
        custom_group({pauli::i2(), pauli::x(), pauli::z()}, {"I", "X", "Z"});
        FAIL() << "expected ClosureViolation";
    } catch (const ClosureViolation& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("X"), std::string::npos);
        EXPECT_NE(msg.find("Z"), std::string::npos);
    }
}

TEST(CustomGroup, PhasesQuotiented) {
    std::vector<Operator> els = {Complex(0, 1) * pauli::i2(), std::polar(1.0, 0.4) * pauli::x(),
                                 -1.0 * pauli::y(), std::polar(1.0, -2.1) * pauli::z()};
    ControlGroup g = custom_group(els);
    EXPECT_EQ(g.order(), 4u);
    EXPECT_EQ(g.identity_index(), 0u);
    for (const auto& a : els) {
        for (const auto& b : els) {
            auto c = g.find_class(a * b);
            ASSERT_TRUE(c.has_value());
            EXPECT_NEAR(phase_overlap(a * b, els[*c]), 1.0, 1e-12);
        }
    }
}

TEST(CustomGroup, ValidationErrors) {
    EXPECT_THROW(custom_group({pauli::i2(), 2.0 * pauli::x()}), NonUnitaryElement);
    EXPECT_THROW(custom_group({pauli::i2(), identity(4)}), DimensionMismatch);
    EXPECT_THROW(custom_group({pauli::x()}), ClosureViolation);
    EXPECT_THROW(custom_group({pauli::i2(), pauli::z(), -1.0 * pauli::z()}), ClosureViolation);
}

TEST(HaarSample, UnitaryAndDeterministic) {
    Rng a(42);
    Rng b(42);
    for (std::size_t d : {2, 3, 4}) {
        Operator u = haar_sample(d, a);
        EXPECT_TRUE(is_unitary(u, 1e-12));
        EXPECT_EQ(max_abs(u - haar_sample(d, b)), 0.0);
    }
}

TEST(HaarSample, MomentsVanish) {
    const std::size_t n = 100000;
    const double band = 5.0 / std::sqrt(static_cast<double>(n));
    Rng rng(2024);
    Operator twirled = Operator::Zero(2, 2);
    Operator first = Operator::Zero(2, 2);
    for (std::size_t i = 0; i < n; i++) {
        Operator g = haar_sample(2, rng);
        twirled += g.adjoint() * pauli::z() * g;
        first += g;
    }
    EXPECT_LE(max_abs(twirled / static_cast<double>(n)), band);
    EXPECT_LE(max_abs(first / static_cast<double>(n)), band);
}

TEST(Twirl, PauliAnnihilatesTraceless) {
    EXPECT_LE(max_abs(twirl(pauli_group(1), pauli::z())), 1e-13);
    Rng rng(9);
    ControlGroup g = pauli_group(2);
    for (int i = 0; i < 20; i++) {
        EXPECT_LE(max_abs(twirl(g, random_traceless_hermitian(4, rng))), 1e-13);
    }
}

TEST(Twirl, IdentityFixed) {
    EXPECT_LE(max_abs(twirl(pauli_group(2), identity(4)) - identity(4)), 1e-14);
    EXPECT_LE(max_abs(twirl(custom_group({pauli::i2(), pauli::z()}), identity(2)) - identity(2)), 1e-15);
    Rng rng(1);
    EXPECT_LE(max_abs(twirl(ControlGroup::haar(3), identity(3), 50, &rng) - identity(3)), 1e-13);
}

TEST(Twirl, ReducibleGroup) {
    ControlGroup g = custom_group({pauli::i2(), pauli::z()});
    EXPECT_LE(max_abs(twirl(g, pauli::x()) - two_element_average(pauli::z(), pauli::x())), 1e-15);
    EXPECT_LE(max_abs(twirl(g, pauli::x())), 1e-15);
    EXPECT_LE(max_abs(twirl(g, pauli::z()) - pauli::z()), 1e-15);
}

TEST(Twirl, HaarNeedsSamples) {
    EXPECT_THROW(twirl(ControlGroup::haar(2), pauli::z()), ConfigError);
    EXPECT_THROW(twirl(pauli_group(1), identity(4)), DimensionMismatch);
}

TEST(Twirl, HaarMonteCarlo) {
    Rng rng(77);
    Operator t = twirl(ControlGroup::haar(2), pauli::x(), 20000, &rng);
    EXPECT_LE(max_abs(t), 5.0 / std::sqrt(20000.0));
}

TEST(GellMannBasis, TracelessOrthogonal) {
    for (std::size_t d : {2, 3, 4}) {
        auto basis = traceless_hermitian_basis(d);
        ASSERT_EQ(basis.size(), d * d - 1);
        for (std::size_t i = 0; i < basis.size(); i++) {
            EXPECT_TRUE(is_hermitian(basis[i]));
            EXPECT_LE(std::abs(basis[i].trace()), 1e-14);
            for (std::size_t j = 0; j < i; j++) {
                EXPECT_LE(std::abs((basis[i].adjoint() * basis[j]).trace()), 1e-13);
            }
        }
    }
}

TEST(Irreducible, Examples) {
    EXPECT_TRUE(is_irreducible(pauli_group(1)));
    EXPECT_TRUE(is_irreducible(pauli_group(2)));
    EXPECT_FALSE(is_irreducible(custom_group({pauli::i2(), pauli::z()})));
    EXPECT_FALSE(is_irreducible(trivial_group(2)));
    EXPECT_FALSE(is_irreducible(trivial_group(3)));
}

TEST(Irreducible, CustomPauliCopyComputed) {
    ControlGroup g = custom_group(pauli_group(1).elements());
    EXPECT_FALSE(g.irreducible_hint().has_value());
    EXPECT_TRUE(is_irreducible(g));
    EXPECT_EQ(g.irreducible_hint(), std::optional<bool>(true));
}

TEST(Irreducible, ConcurrentQueriesAgree) {
    ControlGroup g = custom_group({pauli::i2(), pauli::x()});
    std::vector<int> results(8, -1);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; i++) {
        threads.emplace_back([&, i] { results[i] = is_irreducible(g) ? 1 : 0; });
    }
    for (auto& t : threads) {
        t.join();
    }
    for (int r : results) {
        EXPECT_EQ(r, 0);
    }
}

TEST(Group, LabelsAndIdentity) {
    ControlGroup g = pauli_group(1);
    EXPECT_EQ(g.index_of_label("Y"), 2u);
    EXPECT_THROW(g.index_of_label("Q"), ConfigError);
    EXPECT_EQ(trivial_group(3).order(), 1u);
    EXPECT_EQ(ControlGroup::haar(2).order(), 0u);
    EXPECT_FALSE(ControlGroup::haar(2).is_finite());
}

}  // namespace
}  // namespace ddsim
