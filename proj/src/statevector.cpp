#include "tncirc/statevector.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "tncirc/rng.hpp"

namespace tncirc {

namespace {

// Bit position of `wire` inside a basis index (wire 0 = most significant).
inline int bit_shift(int n_qubits, int wire) { return n_qubits - 1 - wire; }

void apply_single(Statevector& s, int wire, const Eigen::Matrix2cd& u) {
    const std::size_t stride = std::size_t{1} << bit_shift(s.n_qubits, wire);
    const std::size_t dim = s.amps.size();
    const cdouble u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const cdouble a0 = s.amps[i];
            const cdouble a1 = s.amps[i + stride];
            s.amps[i] = u00 * a0 + u01 * a1;
            s.amps[i + stride] = u10 * a0 + u11 * a1;
        }
    }
}

void apply_cnot(Statevector& s, int control, int target) {
    const std::size_t cmask = std::size_t{1} << bit_shift(s.n_qubits, control);
    const std::size_t tmask = std::size_t{1} << bit_shift(s.n_qubits, target);
    const std::size_t dim = s.amps.size();
    for (std::size_t i = 0; i < dim; ++i)
        if ((i & cmask) && !(i & tmask)) std::swap(s.amps[i], s.amps[i | tmask]);
}

// Generic k-wire gate: gather each 2^k-amplitude group, multiply, scatter.
void apply_multi(Statevector& s, const std::vector<int>& wires,
                 const Eigen::MatrixXcd& u) {
    const int k = static_cast<int>(wires.size());
    const std::size_t group = std::size_t{1} << k;
    std::vector<std::size_t> masks(k);
    std::size_t wire_bits = 0;
    for (int j = 0; j < k; ++j) {
        masks[j] = std::size_t{1} << bit_shift(s.n_qubits, wires[j]);
        wire_bits |= masks[j];
    }
    std::vector<cdouble> in(group), out(group);
    const std::size_t dim = s.amps.size();
    for (std::size_t base = 0; base < dim; ++base) {
        if (base & wire_bits) continue;  // visit each group at its zero-representative
        for (std::size_t g = 0; g < group; ++g) {
            std::size_t idx = base;
            for (int j = 0; j < k; ++j)
                if (g & (group >> (j + 1))) idx |= masks[j];
            in[g] = s.amps[idx];
        }
        for (std::size_t r = 0; r < group; ++r) {
            cdouble acc = 0;
            for (std::size_t c = 0; c < group; ++c) acc += u(r, c) * in[c];
            out[r] = acc;
        }
        for (std::size_t g = 0; g < group; ++g) {
            std::size_t idx = base;
            for (int j = 0; j < k; ++j)
                if (g & (group >> (j + 1))) idx |= masks[j];
            s.amps[idx] = out[g];
        }
    }
}

}  // namespace

Statevector Statevector::zero_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 28)
        throw std::invalid_argument(
            fmt::format("statevector supports 1 to 28 qubits, got {}", n_qubits));
    Statevector s;
    s.n_qubits = n_qubits;
    s.amps.assign(std::size_t{1} << n_qubits, cdouble(0.0, 0.0));
    s.amps[0] = 1.0;
    return s;
}

double Statevector::norm() const {
    double acc = 0;
    for (const cdouble& a : amps) acc += std::norm(a);
    return std::sqrt(acc);
}

void apply_gate(Statevector& state, const Gate& gate) {
    for (int w : gate.wires)
        if (w < 0 || w >= state.n_qubits)
            throw std::invalid_argument(
                fmt::format("gate wire {} out of range for {} qubits", w,
                            state.n_qubits));
    switch (gate.kind) {
        case GateKind::Rot:
            if (gate.is_parametric())
                throw std::logic_error("cannot simulate an unbound parametric gate");
            apply_single(state, gate.wires[0],
                         rot_unitary(gate.angles[0], gate.angles[1], gate.angles[2]));
            return;
        case GateKind::Cnot:
            apply_cnot(state, gate.wires[0], gate.wires[1]);
            return;
        case GateKind::PrepState:
            apply_single(state, gate.wires[0], prep_unitary(gate.prep));
            return;
        case GateKind::BasisChange:
            apply_single(state, gate.wires[0], basis_change_unitary(gate.basis));
            return;
        case GateKind::FixedUnitary:
            if (gate.wires.size() == 1)
                apply_single(state, gate.wires[0], gate.matrix);
            else
                apply_multi(state, gate.wires, gate.matrix);
            return;
    }
    throw std::logic_error("unknown gate kind");
}

Statevector run(const Circuit& circuit) {
    if (circuit.has_cuts())
        throw std::invalid_argument(
            "circuit has cut markers; simulate circuit.without_cut_markers() "
            "or partition it");
    if (circuit.is_parametric())
        throw std::invalid_argument("circuit has unbound parameters");
    Statevector s = Statevector::zero_state(circuit.n_qubits());
    for (const Gate& g : circuit.gates()) apply_gate(s, g);
    return s;
}

Statevector run(const Circuit& circuit, const std::vector<double>& params) {
    return run(circuit.bound(params));
}

double expval_z(const Statevector& state, int wire) {
    if (wire < 0 || wire >= state.n_qubits)
        throw std::invalid_argument(fmt::format("wire {} out of range", wire));
    const std::size_t mask = std::size_t{1} << (state.n_qubits - 1 - wire);
    double acc = 0;
    for (std::size_t i = 0; i < state.amps.size(); ++i) {
        const double p = std::norm(state.amps[i]);
        acc += (i & mask) ? -p : p;
    }
    return acc;
}

std::vector<int> sample_z(const Statevector& state, int wire, int shots,
                          std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    if (wire < 0 || wire >= state.n_qubits)
        throw std::invalid_argument(fmt::format("wire {} out of range", wire));
    const std::size_t mask = std::size_t{1} << (state.n_qubits - 1 - wire);
    double p_plus = 0;  // probability of reading bit 0, i.e. outcome +1
    for (std::size_t i = 0; i < state.amps.size(); ++i)
        if (!(i & mask)) p_plus += std::norm(state.amps[i]);
    p_plus = std::min(1.0, std::max(0.0, p_plus));

    Rng rng(seed);
    std::vector<int> outcomes(shots);
    for (int s = 0; s < shots; ++s) outcomes[s] = rng.uniform() < p_plus ? 1 : -1;
    return outcomes;
}

double sample_expval_z(const Statevector& state, int wire, int shots,
                       std::uint64_t seed) {
    const std::vector<int> outcomes = sample_z(state, wire, shots, seed);
    long long sum = 0;
    for (int o : outcomes) sum += o;
    return static_cast<double>(sum) / static_cast<double>(shots);
}

}  // namespace tncirc
