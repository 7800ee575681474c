#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "tncirc/circuit.hpp"
#include "tncirc/gates.hpp"
#include "tncirc/rng.hpp"
#include "tncirc/statevector.hpp"

using namespace tncirc;

namespace {

const cdouble I_(0.0, 1.0);

double mat_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

Eigen::Matrix2cd pauli_x() {
    Eigen::Matrix2cd m;
    m << 0, 1, 1, 0;
    return m;
}

Eigen::Matrix2cd hadamard() {
    Eigen::Matrix2cd m;
    m << 1, 1, 1, -1;
    return m / std::sqrt(2.0);
}

}  // namespace

TEST_CASE("rotation gate at canonical angles") {
    SUBCASE("pure Y rotation by pi") {
        Eigen::Matrix2cd expected;
        expected << 0, -1, 1, 0;
        CHECK(mat_diff(rot_unitary(0.0, M_PI, 0.0), expected) < 1e-12);
    }
    SUBCASE("pure Z rotation by pi") {
        Eigen::Matrix2cd expected;
        expected << -I_, 0, 0, I_;
        CHECK(mat_diff(rot_unitary(M_PI, 0.0, 0.0), expected) < 1e-12);
    }
    SUBCASE("zero angles give the identity") {
        CHECK(mat_diff(rot_unitary(0, 0, 0), Eigen::Matrix2cd::Identity()) < 1e-15);
    }
    SUBCASE("X factor is applied last") {
        // Rot(0, 0, phi) = RX(phi): off-diagonal entries -i sin(phi/2)
        const auto u = rot_unitary(0.0, 0.0, 1.0);
        CHECK(std::abs(u(0, 1) - (-I_ * std::sin(0.5))) < 1e-12);
        CHECK(std::abs(u(0, 0) - std::cos(0.5)) < 1e-12);
    }
    SUBCASE("always unitary") {
        Rng rng(7);
        for (int i = 0; i < 20; ++i) {
            const auto u = rot_unitary(rng.uniform(0, 6.28), rng.uniform(0, 6.28),
                                       rng.uniform(0, 6.28));
            CHECK(unitarity_defect(u) < 1e-12);
        }
    }
}

TEST_CASE("preparation unitaries map |0> to the named states") {
    const Eigen::Vector2cd zero(1.0, 0.0);
    const double s = 1.0 / std::sqrt(2.0);

    Eigen::Vector2cd got = prep_unitary(PrepKind::Z0) * zero;
    CHECK(std::abs(got(0) - 1.0) < 1e-12);

    got = prep_unitary(PrepKind::Z1) * zero;
    CHECK(std::abs(got(1) - 1.0) < 1e-12);

    got = prep_unitary(PrepKind::Xplus) * zero;
    CHECK(std::abs(got(0) - s) < 1e-12);
    CHECK(std::abs(got(1) - s) < 1e-12);

    got = prep_unitary(PrepKind::Yplus) * zero;
    CHECK(std::abs(got(0) - s) < 1e-12);
    CHECK(std::abs(got(1) - s * I_) < 1e-12);
}

TEST_CASE("basis-change rotations") {
    SUBCASE("X basis uses the Hadamard") {
        CHECK(mat_diff(basis_change_unitary(Basis::X), hadamard()) < 1e-12);
    }
    SUBCASE("Z basis is a no-op") {
        CHECK(mat_diff(basis_change_unitary(Basis::Z), Eigen::Matrix2cd::Identity()) <
              1e-15);
    }
    SUBCASE("Y rotation maps |0>+i|1> onto |0>") {
        Eigen::Vector2cd yplus(1.0 / std::sqrt(2.0), I_ / std::sqrt(2.0));
        Eigen::Vector2cd got = basis_change_unitary(Basis::Y) * yplus;
        CHECK(std::abs(std::abs(got(0)) - 1.0) < 1e-12);
    }
    SUBCASE("each is unitary") {
        for (Basis b : {Basis::X, Basis::Y, Basis::Z})
            CHECK(unitarity_defect(basis_change_unitary(b)) < 1e-12);
    }
}

TEST_CASE("fixed unitary validation") {
    CHECK_NOTHROW(Gate::fixed_unitary({0}, pauli_x()));
    Eigen::Matrix2cd bad = pauli_x();
    bad(0, 0) = 0.5;
    CHECK_THROWS_AS(Gate::fixed_unitary({0}, bad), std::invalid_argument);

    // 7 wires exceed the supported gate width
    Eigen::MatrixXcd big = Eigen::MatrixXcd::Identity(128, 128);
    CHECK_THROWS_AS(Gate::fixed_unitary({0, 1, 2, 3, 4, 5, 6}, big),
                    std::invalid_argument);

    // dimension must match 2^wires
    CHECK_THROWS_AS(Gate::fixed_unitary({0, 1}, pauli_x()), std::invalid_argument);
}

TEST_CASE("parametric rotations bind from a flat vector") {
    Gate g = Gate::rot_param(2, 3);
    CHECK(g.is_parametric());
    CHECK_THROWS(g.unitary());

    const std::vector<double> params{0, 0, 0, 0.5, 1.5, 2.5};
    const Gate bound = g.bound(params);
    CHECK_FALSE(bound.is_parametric());
    CHECK(mat_diff(bound.unitary(), rot_unitary(0.5, 1.5, 2.5)) < 1e-14);
}

TEST_CASE("circuit wiring rules") {
    Circuit c(3);
    CHECK(c.n_qubits() == 3);
    CHECK(c.measured_wire() == -1);

    const int pos = c.add(Gate::rot(0, 0.1, 0.2, 0.3));
    CHECK(pos == 0);
    CHECK(c.add(Gate::cnot(0, 2)) == 1);
    CHECK_THROWS_AS(c.add(Gate::rot(3, 0, 0, 0)), std::invalid_argument);
    CHECK_THROWS_AS(c.add(Gate::cnot(1, 1)), std::invalid_argument);

    c.set_measured_wire(2);
    CHECK(c.measured_wire() == 2);
    CHECK_THROWS_AS(c.set_measured_wire(5), std::invalid_argument);

    c.add_cut(0, 0);
    CHECK(c.has_cuts());
    CHECK(c.cut_markers().size() == 1);
    CHECK_FALSE(c.without_cut_markers().has_cuts());
    CHECK(c.without_cut_markers().gates().size() == c.gates().size());
}

TEST_CASE("parameter counting and binding across a circuit") {
    Circuit c(2);
    c.add(Gate::rot_param(0, 0));
    c.add(Gate::cnot(0, 1));
    c.add(Gate::rot_param(1, 3));
    CHECK(c.param_count() == 6);
    CHECK(c.is_parametric());

    const Circuit b = c.bound({0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    CHECK(b.param_count() == 0);
    CHECK_FALSE(b.is_parametric());

    Circuit plain(2);
    plain.add(Gate::cnot(0, 1));
    CHECK(plain.param_count() == 0);
}

TEST_CASE("statevector basics") {
    const Statevector s = Statevector::zero_state(3);
    CHECK(s.dim() == 8);
    CHECK(std::abs(s.amps[0] - 1.0) < 1e-15);
    CHECK(s.norm() == doctest::Approx(1.0));
}

TEST_CASE("wire 0 is the most significant bit") {
    Circuit c(3);
    c.add(Gate::fixed_unitary({0}, pauli_x()));
    const Statevector s = run(c);
    CHECK(std::abs(s.amps[4] - 1.0) < 1e-12);  // |100>

    Circuit c2(3);
    c2.add(Gate::fixed_unitary({2}, pauli_x()));
    const Statevector s2 = run(c2);
    CHECK(std::abs(s2.amps[1] - 1.0) < 1e-12);  // |001>
}

TEST_CASE("Z expectations on computational states") {
    Circuit c(2);
    c.add(Gate::fixed_unitary({1}, pauli_x()));
    const Statevector s = run(c);  // |01>
    CHECK(expval_z(s, 0) == doctest::Approx(1.0));
    CHECK(expval_z(s, 1) == doctest::Approx(-1.0));
}

TEST_CASE("GHZ preparation and readout") {
    Circuit c(3);
    c.add(Gate::fixed_unitary({0}, hadamard()));
    c.add(Gate::cnot(0, 1));
    c.add(Gate::cnot(1, 2));
    const Statevector s = run(c);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(s.amps[0] - inv_sqrt2) < 1e-12);
    CHECK(std::abs(s.amps[7] - inv_sqrt2) < 1e-12);
    for (int w = 0; w < 3; ++w) CHECK(expval_z(s, w) == doctest::Approx(0.0));
}

TEST_CASE("controlled-NOT truth table") {
    // |10> -> |11>
    Circuit c(2);
    c.add(Gate::fixed_unitary({0}, pauli_x()));
    c.add(Gate::cnot(0, 1));
    CHECK(std::abs(run(c).amps[3] - 1.0) < 1e-12);

    // control stays clear: |01> with control on wire 0 is untouched
    Circuit c2(2);
    c2.add(Gate::fixed_unitary({1}, pauli_x()));
    c2.add(Gate::cnot(0, 1));
    CHECK(std::abs(run(c2).amps[1] - 1.0) < 1e-12);
}

TEST_CASE("run rejects leftover cut markers and unbound parameters") {
    Circuit cut(2);
    cut.add(Gate::rot(0, 1, 2, 3));
    cut.add(Gate::cnot(0, 1));
    cut.add_cut(0, 0);
    CHECK_THROWS_AS(run(cut), std::invalid_argument);
    CHECK_NOTHROW(run(cut.without_cut_markers()));

    Circuit open(1);
    open.add(Gate::rot_param(0, 0));
    CHECK_THROWS_AS(run(open), std::invalid_argument);
    CHECK_NOTHROW(run(open, {0.1, 0.2, 0.3}));
}

TEST_CASE("prep and basis-change gates compose inside circuits") {
    // prepare |+> on one wire, rotate to Z: expectation becomes +1
    Circuit c(1);
    c.add(Gate::prep_state(0, PrepKind::Xplus));
    c.add(Gate::basis_change(0, Basis::X));
    const Statevector s = run(c);
    CHECK(expval_z(s, 0) == doctest::Approx(1.0));
}

TEST_CASE("sampled measurements") {
    Circuit c(2);
    c.add(Gate::fixed_unitary({0}, hadamard()));
    const Statevector s = run(c);

    SUBCASE("values are plus or minus one") {
        for (int v : sample_z(s, 0, 100, 3)) CHECK((v == 1 || v == -1));
    }
    SUBCASE("deterministic for a fixed seed") {
        CHECK(sample_z(s, 0, 50, 11) == sample_z(s, 0, 50, 11));
        CHECK(sample_expval_z(s, 0, 50, 11) ==
              doctest::Approx(sample_expval_z(s, 0, 50, 11)));
    }
    SUBCASE("mean approaches the exact expectation") {
        CHECK(std::abs(sample_expval_z(s, 0, 200000, 5) - 0.0) < 0.01);
        // deterministic wire: no variance at all
        CHECK(sample_expval_z(s, 1, 100, 5) == doctest::Approx(1.0));
    }
    SUBCASE("invalid shot counts are rejected") {
        CHECK_THROWS_AS(sample_z(s, 0, 0, 1), std::invalid_argument);
    }
}

TEST_CASE("seeded generator is reproducible and well-ranged") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.raw() == b.raw());

    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 100; ++i) {
        const double v = r.rademacher();
        CHECK((v == 1.0 || v == -1.0));
    }
    for (int i = 0; i < 100; ++i) CHECK(r.uniform_int(7) < 7);
}
