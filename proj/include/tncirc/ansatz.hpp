#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tncirc/circuit.hpp"

namespace tncirc {

// Shape of one parameterized block: b qubits acted on by L strongly
// entangling layers. Each layer is one general rotation per qubit followed
// by a CNOT ring with the given stride.
struct BlockSpec {
    int n_block_qubits = 2;  // b
    int n_layers = 1;        // L
    int entangling_range = 1;

    void validate() const;
    int params_per_block() const { return n_layers * n_block_qubits * 3; }
};

enum class AnsatzKind { Mps, Ttn };

std::string to_string(AnsatzKind k);
AnsatzKind ansatz_kind_from_string(const std::string& s);

// A concrete wiring plan: which wires each block touches, in execution
// order, plus the wire whose <Z> is the network's output. The represented
// bond dimension is D = 2^{n_bond_qubits}.
struct AnsatzLayout {
    AnsatzKind kind = AnsatzKind::Mps;
    int n_qubits = 0;
    int n_bond_qubits = 0;
    BlockSpec block;
    std::vector<std::vector<int>> block_wires;
    int measured_wire = 0;

    int n_blocks() const { return static_cast<int>(block_wires.size()); }
    int param_count() const { return n_blocks() * block.params_per_block(); }
};

// Flat parameter array with its (n_blocks, L, b, 3) shape. Angles are
// addressed as (block, layer, qubit, axis).
struct ParamVector {
    std::vector<double> values;
    int n_blocks = 0, n_layers = 0, n_block_qubits = 0;

    static ParamVector zeros(const AnsatzLayout& layout);
    // Entries drawn uniformly from [0, 2*pi).
    static ParamVector random(const AnsatzLayout& layout, std::uint64_t seed);

    int count() const { return n_blocks * n_layers * n_block_qubits * 3; }
    double& at(int block, int layer, int qubit, int axis);
    void check_matches(const AnsatzLayout& layout) const;
};

// MPS chain: k = (n - n_V)/(b - n_V) blocks, block j on wires
// [j*(b-n_V), j*(b-n_V)+b); consecutive blocks overlap on exactly n_V
// wires. Measured wire is n-1. Throws when the division is not exact.
AnsatzLayout make_mps_layout(int n_qubits, int n_bond_qubits, BlockSpec block);

// Binary tree: requires b = 2*n_V and n = b * 2^m (m >= 1). Level-0 blocks
// cover consecutive b-qubit groups; each block passes its lower-indexed
// n_V wires upward and drops the rest. 2n/b - 1 blocks total; measured
// wire is the highest-indexed wire of the root block.
AnsatzLayout make_ttn_layout(int n_qubits, int n_bond_qubits, BlockSpec block);

// Gates of one block: per layer, Rot on every wire then the CNOT ring
// wire_i -> wire_{(i+range) mod b}. `params` holds L*b*3 angles.
std::vector<Gate> sel_block(const BlockSpec& spec, const std::vector<int>& wires,
                            const std::vector<double>& params);

// Full circuit for a layout with bound parameters. Cut markers sit on every
// wire that consecutive blocks share (MPS) or that a block passes upward
// (TTN), anchored after that block's last gate.
Circuit build_mps(const AnsatzLayout& layout, const ParamVector& params);
Circuit build_ttn(const AnsatzLayout& layout, const ParamVector& params);
Circuit build_circuit(const AnsatzLayout& layout, const ParamVector& params);

// Same circuit with unbound parametric rotations; bind with
// Circuit::bound() before running.
Circuit build_parametric_circuit(const AnsatzLayout& layout);

}  // namespace tncirc
