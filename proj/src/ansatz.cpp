#include "tncirc/ansatz.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "tncirc/rng.hpp"

namespace tncirc {

void BlockSpec::validate() const {
    if (n_block_qubits < 2)
        throw std::invalid_argument("a block needs at least 2 qubits");
    if (n_layers < 1) throw std::invalid_argument("a block needs at least 1 layer");
    if (entangling_range < 1 || entangling_range >= n_block_qubits)
        throw std::invalid_argument(
            fmt::format("entangling range {} invalid for {}-qubit blocks",
                        entangling_range, n_block_qubits));
}

std::string to_string(AnsatzKind k) {
    return k == AnsatzKind::Mps ? "mps" : "ttn";
}

AnsatzKind ansatz_kind_from_string(const std::string& s) {
    if (s == "mps") return AnsatzKind::Mps;
    if (s == "ttn") return AnsatzKind::Ttn;
    throw std::invalid_argument(fmt::format("unknown ansatz kind '{}'", s));
}

ParamVector ParamVector::zeros(const AnsatzLayout& layout) {
    ParamVector p;
    p.n_blocks = layout.n_blocks();
    p.n_layers = layout.block.n_layers;
    p.n_block_qubits = layout.block.n_block_qubits;
    p.values.assign(p.count(), 0.0);
    return p;
}

ParamVector ParamVector::random(const AnsatzLayout& layout, std::uint64_t seed) {
    ParamVector p = zeros(layout);
    Rng rng(seed);
    for (double& v : p.values) v = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return p;
}

double& ParamVector::at(int block, int layer, int qubit, int axis) {
    const int idx =
        ((block * n_layers + layer) * n_block_qubits + qubit) * 3 + axis;
    return values.at(static_cast<std::size_t>(idx));
}

void ParamVector::check_matches(const AnsatzLayout& layout) const {
    if (n_blocks != layout.n_blocks() || n_layers != layout.block.n_layers ||
        n_block_qubits != layout.block.n_block_qubits ||
        static_cast<int>(values.size()) != count())
        throw std::invalid_argument(
            fmt::format("parameter shape ({},{},{},3) does not match layout "
                        "({},{},{},3)",
                        n_blocks, n_layers, n_block_qubits, layout.n_blocks(),
                        layout.block.n_layers, layout.block.n_block_qubits));
}

AnsatzLayout make_mps_layout(int n_qubits, int n_bond_qubits, BlockSpec block) {
    block.validate();
    const int b = block.n_block_qubits;
    if (n_bond_qubits < 1 || n_bond_qubits >= b)
        throw std::invalid_argument("need 1 <= n_V < b");
    if (n_qubits < b) throw std::invalid_argument("need n >= b");
    const int stride = b - n_bond_qubits;
    if ((n_qubits - n_bond_qubits) % stride != 0)
        throw std::invalid_argument(
            fmt::format("n - n_V = {} is not divisible by b - n_V = {}",
                        n_qubits - n_bond_qubits, stride));

    AnsatzLayout layout;
    layout.kind = AnsatzKind::Mps;
    layout.n_qubits = n_qubits;
    layout.n_bond_qubits = n_bond_qubits;
    layout.block = block;
    const int k = (n_qubits - n_bond_qubits) / stride;
    for (int j = 0; j < k; ++j) {
        std::vector<int> wires(b);
        for (int q = 0; q < b; ++q) wires[q] = j * stride + q;
        layout.block_wires.push_back(std::move(wires));
    }
    layout.measured_wire = n_qubits - 1;
    return layout;
}

AnsatzLayout make_ttn_layout(int n_qubits, int n_bond_qubits, BlockSpec block) {
    block.validate();
    const int b = block.n_block_qubits;
    if (n_bond_qubits < 1) throw std::invalid_argument("need n_V >= 1");
    if (b != 2 * n_bond_qubits)
        throw std::invalid_argument(
            fmt::format("tree blocks need b = 2*n_V, got b={} n_V={}", b,
                        n_bond_qubits));
    int m = 0;
    for (int size = n_qubits; size > b; size /= 2) {
        if (size % 2 != 0) break;
        ++m;
    }
    if (n_qubits != b * (1 << m) || m < 1)
        throw std::invalid_argument(
            fmt::format("tree needs n = b * 2^m with m >= 1, got n={} b={}",
                        n_qubits, b));

    AnsatzLayout layout;
    layout.kind = AnsatzKind::Ttn;
    layout.n_qubits = n_qubits;
    layout.n_bond_qubits = n_bond_qubits;
    layout.block = block;

    // level 0: consecutive groups; above: merge the passed halves pairwise
    std::vector<std::vector<int>> groups;
    for (int g = 0; g < n_qubits / b; ++g) {
        std::vector<int> wires(b);
        for (int q = 0; q < b; ++q) wires[q] = g * b + q;
        groups.push_back(std::move(wires));
    }
    while (true) {
        for (const auto& g : groups) layout.block_wires.push_back(g);
        if (groups.size() == 1) break;
        std::vector<std::vector<int>> next;
        for (std::size_t i = 0; i + 1 < groups.size(); i += 2) {
            std::vector<int> merged(groups[i].begin(),
                                    groups[i].begin() + n_bond_qubits);
            merged.insert(merged.end(), groups[i + 1].begin(),
                          groups[i + 1].begin() + n_bond_qubits);
            next.push_back(std::move(merged));
        }
        groups = std::move(next);
    }
    layout.measured_wire = layout.block_wires.back().back();
    return layout;
}

std::vector<Gate> sel_block(const BlockSpec& spec, const std::vector<int>& wires,
                            const std::vector<double>& params) {
    spec.validate();
    const int b = spec.n_block_qubits;
    if (static_cast<int>(wires.size()) != b)
        throw std::invalid_argument(
            fmt::format("block expects {} wires, got {}", b, wires.size()));
    if (static_cast<int>(params.size()) != spec.params_per_block())
        throw std::invalid_argument(
            fmt::format("block expects {} parameters, got {}",
                        spec.params_per_block(), params.size()));

    std::vector<Gate> gates;
    for (int layer = 0; layer < spec.n_layers; ++layer) {
        const int base = layer * b * 3;
        for (int q = 0; q < b; ++q)
            gates.push_back(Gate::rot(wires[q], params[base + q * 3],
                                      params[base + q * 3 + 1],
                                      params[base + q * 3 + 2]));
        for (int q = 0; q < b; ++q)
            gates.push_back(
                Gate::cnot(wires[q], wires[(q + spec.entangling_range) % b]));
    }
    return gates;
}

namespace {

// Shared circuit assembly. `passed_wires(j)` lists the wires of block j that
// carry bond state onward and therefore receive cut markers (empty for the
// final block).
template <typename PassedFn>
Circuit assemble(const AnsatzLayout& layout, const ParamVector* params,
                 PassedFn&& passed_wires) {
    if (params) params->check_matches(layout);
    Circuit circuit(layout.n_qubits);
    const BlockSpec& spec = layout.block;
    const int per_block = spec.params_per_block();

    for (int j = 0; j < layout.n_blocks(); ++j) {
        int last_gate = -1;
        if (params) {
            const std::vector<double> slice(
                params->values.begin() + j * per_block,
                params->values.begin() + (j + 1) * per_block);
            for (Gate& g : sel_block(spec, layout.block_wires[j], slice))
                last_gate = circuit.add(std::move(g));
        } else {
            // same structure, parametric rotations indexed into the flat vector
            for (int layer = 0; layer < spec.n_layers; ++layer) {
                const int base = j * per_block + layer * spec.n_block_qubits * 3;
                for (int q = 0; q < spec.n_block_qubits; ++q)
                    last_gate = circuit.add(Gate::rot_param(
                        layout.block_wires[j][q], base + q * 3));
                for (int q = 0; q < spec.n_block_qubits; ++q)
                    last_gate = circuit.add(Gate::cnot(
                        layout.block_wires[j][q],
                        layout.block_wires[j][(q + spec.entangling_range) %
                                              spec.n_block_qubits]));
            }
        }
        for (int w : passed_wires(j)) circuit.add_cut(w, last_gate);
    }
    circuit.set_measured_wire(layout.measured_wire);
    return circuit;
}

std::vector<int> mps_passed(const AnsatzLayout& layout, int j) {
    if (j + 1 >= layout.n_blocks()) return {};
    // the trailing n_V wires of block j are exactly the head of block j+1
    const auto& wires = layout.block_wires[j];
    return {wires.end() - layout.n_bond_qubits, wires.end()};
}

std::vector<int> ttn_passed(const AnsatzLayout& layout, int j) {
    if (j + 1 >= layout.n_blocks()) return {};  // root passes nothing
    const auto& wires = layout.block_wires[j];
    return {wires.begin(), wires.begin() + layout.n_bond_qubits};
}

}  // namespace

Circuit build_mps(const AnsatzLayout& layout, const ParamVector& params) {
    if (layout.kind != AnsatzKind::Mps)
        throw std::invalid_argument("layout is not an MPS layout");
    return assemble(layout, &params,
                    [&](int j) { return mps_passed(layout, j); });
}

Circuit build_ttn(const AnsatzLayout& layout, const ParamVector& params) {
    if (layout.kind != AnsatzKind::Ttn)
        throw std::invalid_argument("layout is not a TTN layout");
    return assemble(layout, &params,
                    [&](int j) { return ttn_passed(layout, j); });
}

Circuit build_circuit(const AnsatzLayout& layout, const ParamVector& params) {
    return layout.kind == AnsatzKind::Mps ? build_mps(layout, params)
                                          : build_ttn(layout, params);
}

Circuit build_parametric_circuit(const AnsatzLayout& layout) {
    auto passed = [&](int j) {
        return layout.kind == AnsatzKind::Mps ? mps_passed(layout, j)
                                              : ttn_passed(layout, j);
    };
    return assemble(layout, nullptr, passed);
}

}  // namespace tncirc
