#pragma once

#include <cstdint>
#include <vector>

#include "tncirc/circuit.hpp"
#include "tncirc/gates.hpp"

namespace tncirc {

// Dense state of an n-qubit register: 2^n amplitudes in computational-basis
// order, with wire 0 as the most significant bit of the index.
struct Statevector {
    int n_qubits = 0;
    std::vector<cdouble> amps;

    static Statevector zero_state(int n_qubits);

    std::size_t dim() const { return amps.size(); }
    double norm() const;
};

// In-place application of one gate.
void apply_gate(Statevector& state, const Gate& gate);

// Runs the circuit on |0...0>. Throws if the circuit still carries cut
// markers (simulate the uncut circuit via without_cut_markers()) or if any
// gate is an unbound parametric rotation.
Statevector run(const Circuit& circuit);
Statevector run(const Circuit& circuit, const std::vector<double>& params);

// <Z> on one wire: sum of |amp|^2 weighted +1 for bit 0, -1 for bit 1.
double expval_z(const Statevector& state, int wire);

// `shots` independent single-shot Z measurements on one wire, each +1 or -1.
// Sampling uses the seeded generator only; the state is unchanged.
std::vector<int> sample_z(const Statevector& state, int wire, int shots,
                          std::uint64_t seed);

// Mean of sample_z, as a shot-noise estimate of expval_z.
double sample_expval_z(const Statevector& state, int wire, int shots,
                       std::uint64_t seed);

}  // namespace tncirc
