#include "tncirc/circuit.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace tncirc {

Circuit::Circuit(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1)
        throw std::invalid_argument("circuit needs at least one qubit");
}

void Circuit::check_wire(int wire) const {
    if (wire < 0 || wire >= n_qubits_)
        throw std::invalid_argument(
            fmt::format("wire {} out of range for {} qubits", wire, n_qubits_));
}

void Circuit::set_measured_wire(int wire) {
    check_wire(wire);
    measured_wire_ = wire;
}

int Circuit::add(Gate g) {
    for (int w : g.wires) check_wire(w);
    gates_.push_back(std::move(g));
    return static_cast<int>(gates_.size()) - 1;
}

void Circuit::add_cut(int wire, int after_gate) {
    check_wire(wire);
    if (after_gate < 0 || after_gate >= static_cast<int>(gates_.size()))
        throw std::invalid_argument(
            fmt::format("cut anchor {} does not name an existing gate", after_gate));
    cut_markers_.push_back({wire, after_gate});
}

int Circuit::param_count() const {
    int count = 0;
    for (const Gate& g : gates_)
        if (g.is_parametric()) count = std::max(count, g.param_base + 3);
    return count;
}

Circuit Circuit::bound(const std::vector<double>& params) const {
    if (static_cast<int>(params.size()) < param_count())
        throw std::invalid_argument(
            fmt::format("circuit expects {} parameters, got {}", param_count(),
                        params.size()));
    Circuit c(n_qubits_);
    c.measured_wire_ = measured_wire_;
    c.cut_markers_ = cut_markers_;
    c.gates_.reserve(gates_.size());
    for (const Gate& g : gates_) c.gates_.push_back(g.bound(params));
    return c;
}

Circuit Circuit::without_cut_markers() const {
    Circuit c = *this;
    c.cut_markers_.clear();
    return c;
}

}  // namespace tncirc
