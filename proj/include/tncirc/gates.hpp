#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tncirc {

using cdouble = std::complex<double>;

enum class GateKind { Rot, Cnot, FixedUnitary, PrepState, BasisChange };

// Single-qubit preparation states used as channel-cut inputs:
//   Z0 = |0>, Z1 = |1>, Xplus = (|0>+|1>)/sqrt(2), Yplus = (|0>+i|1>)/sqrt(2)
enum class PrepKind { Z0 = 0, Z1 = 1, Xplus = 2, Yplus = 3 };

enum class Basis { X = 0, Y = 1, Z = 2 };

std::string to_string(PrepKind p);
std::string to_string(Basis b);

// General single-qubit rotation, decomposed as RX(phi) * RY(theta) * RZ(omega)
// with RA(alpha) = exp(-i * alpha * A / 2).
Eigen::Matrix2cd rot_unitary(double omega, double theta, double phi);

// Unitary that maps |0> to the given preparation state.
Eigen::Matrix2cd prep_unitary(PrepKind which);

// Rotation into the measurement basis, applied right before a Z readout:
// X -> H, Y -> H * S^dagger, Z -> identity.
Eigen::Matrix2cd basis_change_unitary(Basis basis);

// Max-norm of U^dagger * U - I; zero for an exact unitary.
double unitarity_defect(const Eigen::MatrixXcd& u);

// One circuit operation. Wires are listed most-significant first: for a
// multi-wire gate, wires[0] indexes the top bit of the gate's local basis.
struct Gate {
    GateKind kind = GateKind::Rot;
    std::vector<int> wires;
    std::array<double, 3> angles{0.0, 0.0, 0.0};  // Rot only: omega, theta, phi
    int param_base = -1;    // >= 0: Rot angles come from a parameter vector
    PrepKind prep = PrepKind::Z0;
    Basis basis = Basis::Z;
    Eigen::MatrixXcd matrix;  // FixedUnitary only

    static Gate rot(int wire, double omega, double theta, double phi);
    // Rot whose three angles are params[param_base..param_base+2].
    static Gate rot_param(int wire, int param_base);
    static Gate cnot(int control, int target);
    // Arbitrary k-wire unitary, k <= 6. Checks unitarity to 1e-12.
    static Gate fixed_unitary(std::vector<int> wires, Eigen::MatrixXcd u);
    static Gate prep_state(int wire, PrepKind which);
    static Gate basis_change(int wire, Basis basis);

    bool is_parametric() const { return param_base >= 0; }
    int n_wires() const { return static_cast<int>(wires.size()); }

    // Dense matrix of this gate on its own wires. Throws for a parametric
    // Rot whose angles have not been bound.
    Eigen::MatrixXcd unitary() const;

    // Copy with angles taken from a flat parameter vector.
    Gate bound(const std::vector<double>& params) const;
};

}  // namespace tncirc
