#include "tncirc/gates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tncirc {

namespace {

const cdouble kI(0.0, 1.0);

Eigen::Matrix2cd rx(double a) {
    Eigen::Matrix2cd m;
    const double c = std::cos(a / 2), s = std::sin(a / 2);
    m << c, -kI * s, -kI * s, c;
    return m;
}

Eigen::Matrix2cd ry(double a) {
    Eigen::Matrix2cd m;
    const double c = std::cos(a / 2), s = std::sin(a / 2);
    m << c, -s, s, c;
    return m;
}

Eigen::Matrix2cd rz(double a) {
    Eigen::Matrix2cd m;
    m << std::exp(-kI * (a / 2)), 0.0, 0.0, std::exp(kI * (a / 2));
    return m;
}

Eigen::Matrix2cd hadamard() {
    Eigen::Matrix2cd m;
    const double r = 1.0 / std::sqrt(2.0);
    m << r, r, r, -r;
    return m;
}

}  // namespace

std::string to_string(PrepKind p) {
    switch (p) {
        case PrepKind::Z0: return "Z0";
        case PrepKind::Z1: return "Z1";
        case PrepKind::Xplus: return "X+";
        case PrepKind::Yplus: return "Y+";
    }
    return "?";
}

std::string to_string(Basis b) {
    switch (b) {
        case Basis::X: return "X";
        case Basis::Y: return "Y";
        case Basis::Z: return "Z";
    }
    return "?";
}

Eigen::Matrix2cd rot_unitary(double omega, double theta, double phi) {
    return rx(phi) * ry(theta) * rz(omega);
}

Eigen::Matrix2cd prep_unitary(PrepKind which) {
    Eigen::Matrix2cd m;
    switch (which) {
        case PrepKind::Z0:
            m = Eigen::Matrix2cd::Identity();
            break;
        case PrepKind::Z1:
            m << 0, 1, 1, 0;  // Pauli X
            break;
        case PrepKind::Xplus:
            m = hadamard();
            break;
        case PrepKind::Yplus: {
            Eigen::Matrix2cd s;
            s << 1, 0, 0, kI;
            m = s * hadamard();
            break;
        }
    }
    return m;
}

Eigen::Matrix2cd basis_change_unitary(Basis basis) {
    switch (basis) {
        case Basis::X:
            return hadamard();
        case Basis::Y: {
            Eigen::Matrix2cd sdg;
            sdg << 1, 0, 0, -kI;
            return hadamard() * sdg;
        }
        case Basis::Z:
            return Eigen::Matrix2cd::Identity();
    }
    throw std::invalid_argument("unknown measurement basis");
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
    if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
    Eigen::MatrixXcd d = u.adjoint() * u;
    d -= Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff();
}

Gate Gate::rot(int wire, double omega, double theta, double phi) {
    Gate g;
    g.kind = GateKind::Rot;
    g.wires = {wire};
    g.angles = {omega, theta, phi};
    return g;
}

Gate Gate::rot_param(int wire, int param_base) {
    if (param_base < 0) throw std::invalid_argument("parameter index must be >= 0");
    Gate g;
    g.kind = GateKind::Rot;
    g.wires = {wire};
    g.param_base = param_base;
    return g;
}

Gate Gate::cnot(int control, int target) {
    if (control == target)
        throw std::invalid_argument("CNOT control and target must differ");
    Gate g;
    g.kind = GateKind::Cnot;
    g.wires = {control, target};
    return g;
}

Gate Gate::fixed_unitary(std::vector<int> wires, Eigen::MatrixXcd u) {
    if (wires.empty() || wires.size() > 6)
        throw std::invalid_argument("fixed unitary must act on 1 to 6 wires");
    for (std::size_t i = 0; i < wires.size(); ++i)
        for (std::size_t j = i + 1; j < wires.size(); ++j)
            if (wires[i] == wires[j])
                throw std::invalid_argument("fixed unitary wires must be distinct");
    const Eigen::Index dim = Eigen::Index(1) << wires.size();
    if (u.rows() != dim || u.cols() != dim)
        throw std::invalid_argument("fixed unitary matrix size does not match wire count");
    if (unitarity_defect(u) > 1e-12)
        throw std::invalid_argument("matrix is not unitary to 1e-12");
    Gate g;
    g.kind = GateKind::FixedUnitary;
    g.wires = std::move(wires);
    g.matrix = std::move(u);
    return g;
}

Gate Gate::prep_state(int wire, PrepKind which) {
    Gate g;
    g.kind = GateKind::PrepState;
    g.wires = {wire};
    g.prep = which;
    return g;
}

Gate Gate::basis_change(int wire, Basis basis) {
    Gate g;
    g.kind = GateKind::BasisChange;
    g.wires = {wire};
    g.basis = basis;
    return g;
}

Eigen::MatrixXcd Gate::unitary() const {
    switch (kind) {
        case GateKind::Rot:
            if (is_parametric())
                throw std::logic_error("parametric rotation has no angles bound");
            return rot_unitary(angles[0], angles[1], angles[2]);
        case GateKind::Cnot: {
            Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
            m(2, 2) = m(3, 3) = 0;
            m(2, 3) = m(3, 2) = 1;
            return m;
        }
        case GateKind::FixedUnitary:
            return matrix;
        case GateKind::PrepState:
            return prep_unitary(prep);
        case GateKind::BasisChange:
            return basis_change_unitary(basis);
    }
    throw std::logic_error("unknown gate kind");
}

Gate Gate::bound(const std::vector<double>& params) const {
    if (!is_parametric()) return *this;
    if (param_base + 3 > static_cast<int>(params.size()))
        throw std::invalid_argument("parameter vector too short for gate");
    Gate g = *this;
    g.angles = {params[param_base], params[param_base + 1], params[param_base + 2]};
    g.param_base = -1;
    return g;
}

}  // namespace tncirc
