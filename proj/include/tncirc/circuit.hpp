#pragma once

#include <vector>

#include "tncirc/gates.hpp"

namespace tncirc {

// A wire-cut marker: the identity channel on `wire` is severed between
// global gate positions `after_gate` and `after_gate + 1`. Markers do not
// change what the circuit computes; they tell the partitioner where to
// split it into fragments.
struct CutMarker {
    int wire = 0;
    int after_gate = 0;
};

// Ordered gate list on a fixed register. Wire 0 is the most significant
// bit of the computational-basis index.
class Circuit {
public:
    explicit Circuit(int n_qubits);

    int n_qubits() const { return n_qubits_; }

    // Wire whose Pauli-Z expectation is the circuit's scalar output;
    // -1 while unset.
    int measured_wire() const { return measured_wire_; }
    void set_measured_wire(int wire);

    const std::vector<Gate>& gates() const { return gates_; }
    const std::vector<CutMarker>& cut_markers() const { return cut_markers_; }

    // Appends a gate; validates that its wires are in range. Returns the
    // gate's position, usable as a cut anchor.
    int add(Gate g);

    // Marks a wire cut after the gate at position `after_gate`.
    void add_cut(int wire, int after_gate);

    bool has_cuts() const { return !cut_markers_.empty(); }

    // Number of scalar parameters referenced by parametric gates
    // (max param_base + 3, or 0 when fully bound).
    int param_count() const;
    bool is_parametric() const { return param_count() > 0; }

    // Copy with every parametric gate's angles filled in from `params`.
    Circuit bound(const std::vector<double>& params) const;

    // Copy without cut markers (the markers never affect simulation).
    Circuit without_cut_markers() const;

private:
    int n_qubits_;
    int measured_wire_ = -1;
    std::vector<Gate> gates_;
    std::vector<CutMarker> cut_markers_;

    void check_wire(int wire) const;
};

}  // namespace tncirc
