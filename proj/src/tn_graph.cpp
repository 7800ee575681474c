#include "tncirc/tn_graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace tncirc {

namespace {

// Labels shared by two live tensors (i.e. the edges between them).
std::vector<std::string> common_labels(const DenseTensor& a, const DenseTensor& b) {
    std::vector<std::string> out;
    for (const std::string& l : a.labels)
        if (b.has_label(l)) out.push_back(l);
    return out;
}

}  // namespace

void TensorNetworkGraph::add_vertex(int id) {
    if (id < 0) throw std::invalid_argument("vertex ids must be >= 0");
    vertices.emplace(id, std::nullopt);
}

void TensorNetworkGraph::add_vertex(int id, DenseTensor tensor) {
    if (id < 0) throw std::invalid_argument("vertex ids must be >= 0");
    auto [it, inserted] = vertices.emplace(id, std::move(tensor));
    if (!inserted) it->second = std::move(tensor);
}

void TensorNetworkGraph::add_edge(int a, int b, std::size_t dim, std::string label) {
    if (dim == 0) throw std::invalid_argument("edge dimension must be >= 1");
    if (a == kOpenEnd && b == kOpenEnd)
        throw std::invalid_argument("edge needs at least one real endpoint");
    for (int v : {a, b})
        if (v != kOpenEnd && !vertices.count(v))
            throw std::invalid_argument(fmt::format("edge endpoint {} does not exist", v));
    for (const TnEdge& e : edges)
        if (e.label == label)
            throw std::invalid_argument(fmt::format("duplicate edge label '{}'", label));
    edges.push_back({a, b, dim, std::move(label)});
}

std::vector<const TnEdge*> TensorNetworkGraph::open_edges() const {
    std::vector<const TnEdge*> out;
    for (const TnEdge& e : edges)
        if (e.is_open()) out.push_back(&e);
    return out;
}

void TensorNetworkGraph::validate() const {
    std::set<std::string> labels;
    std::map<int, std::vector<const TnEdge*>> incident;
    for (const TnEdge& e : edges) {
        if (e.dim == 0) throw std::invalid_argument("edge dimension must be >= 1");
        if (!labels.insert(e.label).second)
            throw std::invalid_argument(fmt::format("duplicate edge label '{}'", e.label));
        for (int v : {e.a, e.b}) {
            if (v == kOpenEnd) continue;
            if (!vertices.count(v))
                throw std::invalid_argument(
                    fmt::format("edge '{}' references missing vertex {}", e.label, v));
            incident[v].push_back(&e);
        }
        if (e.a == kOpenEnd && e.b == kOpenEnd)
            throw std::invalid_argument(
                fmt::format("edge '{}' has no real endpoint", e.label));
    }
    for (const auto& [id, tensor] : vertices) {
        if (!tensor) continue;
        const auto& inc = incident[id];
        if (tensor->rank() != inc.size())
            throw std::invalid_argument(
                fmt::format("vertex {} tensor has rank {} but {} incident edges", id,
                            tensor->rank(), inc.size()));
        for (const TnEdge* e : inc) {
            // a self-loop contributes one incident entry per endpoint, and the
            // tensor must carry the label... self-loops list the edge twice
            if (!tensor->has_label(e->label))
                throw std::invalid_argument(fmt::format(
                    "vertex {} tensor is missing index '{}'", id, e->label));
            if (tensor->dim_of(e->label) != e->dim)
                throw std::invalid_argument(fmt::format(
                    "vertex {} index '{}' has dimension {} but edge says {}", id,
                    e->label, tensor->dim_of(e->label), e->dim));
        }
    }
}

namespace {

DenseTensor contract_live(std::map<int, DenseTensor> live,
                          const std::vector<std::pair<int, int>>* path) {
    if (live.empty()) throw std::invalid_argument("cannot contract an empty network");

    auto merge = [&](int ida, int idb) {
        DenseTensor& a = live.at(ida);
        DenseTensor& b = live.at(idb);
        DenseTensor merged = contract_over_common(a, b);
        const int keep = std::min(ida, idb);
        live.erase(ida);
        live.erase(idb);
        live.emplace(keep, std::move(merged));
    };

    if (path) {
        for (const auto& [u, v] : *path) {
            if (!live.count(u) || !live.count(v) || u == v)
                throw std::invalid_argument(
                    fmt::format("contraction path step ({}, {}) is invalid", u, v));
            merge(u, v);
        }
        if (live.size() != 1)
            throw std::invalid_argument("contraction path does not reduce to one tensor");
        return live.begin()->second;
    }

    while (live.size() > 1) {
        // smallest product first; fall back to outer products when no pair
        // shares an edge any more
        long double best_cost = -1;
        int best_u = -1, best_v = -1;
        for (auto ia = live.begin(); ia != live.end(); ++ia) {
            for (auto ib = std::next(ia); ib != live.end(); ++ib) {
                const auto shared = common_labels(ia->second, ib->second);
                if (shared.empty()) continue;
                long double shared_dim = 1;
                for (const std::string& l : shared) shared_dim *= ia->second.dim_of(l);
                const long double cost =
                    (static_cast<long double>(ia->second.size()) / shared_dim) *
                    (static_cast<long double>(ib->second.size()) / shared_dim);
                if (best_cost < 0 || cost < best_cost) {
                    best_cost = cost;
                    best_u = ia->first;
                    best_v = ib->first;
                }
            }
        }
        if (best_u < 0) {
            auto ia = live.begin();
            best_u = ia->first;
            best_v = std::next(ia)->first;
        }
        merge(best_u, best_v);
    }
    return live.begin()->second;
}

std::map<int, DenseTensor> live_tensors(const TensorNetworkGraph& tn) {
    tn.validate();
    std::map<int, DenseTensor> live;
    for (const auto& [id, tensor] : tn.vertices) {
        if (!tensor)
            throw std::invalid_argument(
                fmt::format("vertex {} has no tensor; cannot contract", id));
        live.emplace(id, *tensor);
    }
    return live;
}

}  // namespace

DenseTensor contract_network(const TensorNetworkGraph& tn) {
    return contract_live(live_tensors(tn), nullptr);
}

DenseTensor contract_network(const TensorNetworkGraph& tn,
                             const std::vector<std::pair<int, int>>& path) {
    return contract_live(live_tensors(tn), &path);
}

// --- circuit -> tensor network ----------------------------------------------

namespace {

// Gate as a tensor with legs (out_0..out_{k-1}, in_0..in_{k-1}), each of
// dimension 2; entry (o, i) = U(o, i). For the reversed half of the
// expectation network the conjugate transpose is used instead.
DenseTensor gate_tensor(const Gate& g, bool dagger,
                        const std::vector<std::string>& out_labels,
                        const std::vector<std::string>& in_labels) {
    const Eigen::MatrixXcd u = g.unitary();
    const std::size_t dim = static_cast<std::size_t>(u.rows());
    std::vector<std::size_t> shape(2 * g.wires.size(), 2);
    std::vector<std::string> labels = out_labels;
    labels.insert(labels.end(), in_labels.begin(), in_labels.end());
    DenseTensor t(shape, labels);
    for (std::size_t o = 0; o < dim; ++o)
        for (std::size_t i = 0; i < dim; ++i)
            t.data[o * dim + i] = dagger ? std::conj(u(i, o)) : u(o, i);
    return t;
}

DenseTensor ket0(const std::string& label) {
    DenseTensor t({2}, {label});
    t.data[0] = 1.0;
    return t;
}

DenseTensor pauli_z(const std::string& out_label, const std::string& in_label) {
    DenseTensor t({2, 2}, {out_label, in_label});
    t.data[0] = 1.0;
    t.data[3] = -1.0;
    return t;
}

}  // namespace

TensorNetworkGraph circuit_to_tn(const Circuit& circuit) {
    if (circuit.is_parametric())
        throw std::invalid_argument("bind circuit parameters before conversion");
    if (circuit.measured_wire() < 0)
        throw std::invalid_argument("circuit needs a measured wire");

    TensorNetworkGraph tn;
    int next_vertex = 0;
    int next_edge = 0;
    auto fresh = [&next_edge]() { return fmt::format("e{}", next_edge++); };

    const int n = circuit.n_qubits();
    // current dangling label per wire while building the forward half
    std::vector<std::string> front(n);

    for (int w = 0; w < n; ++w) {
        front[w] = fresh();
        tn.add_vertex(next_vertex, ket0(front[w]));
        ++next_vertex;
    }

    struct PlacedGate {
        const Gate* gate;
        int vertex;
        std::vector<std::string> in_labels;
        std::vector<std::string> out_labels;
    };
    std::vector<PlacedGate> placed;

    for (const Gate& g : circuit.gates()) {
        PlacedGate p;
        p.gate = &g;
        for (int w : g.wires) p.in_labels.push_back(front[w]);
        for (int w : g.wires) {
            front[w] = fresh();
            p.out_labels.push_back(front[w]);
        }
        p.vertex = next_vertex++;
        tn.add_vertex(p.vertex, gate_tensor(g, false, p.out_labels, p.in_labels));
        placed.push_back(std::move(p));
    }

    // Z insertion on the measured wire
    const int mw = circuit.measured_wire();
    const std::string z_in = front[mw];
    front[mw] = fresh();
    const int z_vertex = next_vertex++;
    tn.add_vertex(z_vertex, pauli_z(front[mw], z_in));

    // mirrored gates, conjugated, in reverse order
    for (auto it = placed.rbegin(); it != placed.rend(); ++it) {
        const Gate& g = *it->gate;
        std::vector<std::string> in_labels, out_labels;
        for (int w : g.wires) in_labels.push_back(front[w]);
        for (int w : g.wires) {
            front[w] = fresh();
            out_labels.push_back(front[w]);
        }
        tn.add_vertex(next_vertex++, gate_tensor(g, true, out_labels, in_labels));
    }

    // <0| caps
    for (int w = 0; w < n; ++w) {
        tn.add_vertex(next_vertex, ket0(front[w]));
        ++next_vertex;
    }

    // Edges: every label is produced by exactly one tensor and consumed by
    // exactly one other (wires with no gates run straight from the |0> cap
    // to the <0| cap). Pair the endpoints up.
    std::map<std::string, std::vector<int>> touching;
    for (const auto& [id, tensor] : tn.vertices)
        for (const std::string& l : tensor->labels) touching[l].push_back(id);
    for (const auto& [label, ids] : touching) {
        if (ids.size() != 2)
            throw std::logic_error(
                fmt::format("label '{}' has {} endpoints", label, ids.size()));
        tn.add_edge(ids[0], ids[1], 2, label);
    }

    tn.validate();
    return tn;
}

// --- layout planning ----------------------------------------------------------

int CircuitLayout::block_wire_count(int block) const {
    int in = 0;
    for (const LayoutEdge& e : edges)
        if (e.dst == block) in += e.wires;
    return in;
}

int CircuitLayout::total_qubits() const {
    int q = 0;
    for (const LayoutEdge& e : edges)
        if (e.src == kOpenEnd) q += e.wires;
    return q;
}

void CircuitLayout::validate() const {
    for (const LayoutEdge& e : edges) {
        if (e.wires < 1) throw std::invalid_argument("layout edge with no wires");
        for (int v : {e.src, e.dst})
            if (v != kOpenEnd && (v < 0 || v >= n_blocks))
                throw std::invalid_argument(
                    fmt::format("layout edge references block {} of {}", v, n_blocks));
        if (e.src == kOpenEnd && e.dst == kOpenEnd)
            throw std::invalid_argument("layout edge with no blocks");
        if (e.src != kOpenEnd && e.dst != kOpenEnd && e.src >= e.dst)
            throw std::invalid_argument(
                fmt::format("edge {}->{} breaks execution order", e.src, e.dst));
    }
    for (int b = 0; b < n_blocks; ++b) {
        int in = 0, out = 0;
        for (const LayoutEdge& e : edges) {
            if (e.dst == b) in += e.wires;
            if (e.src == b) out += e.wires;
        }
        if (in != out)
            throw std::invalid_argument(
                fmt::format("block {} has {} wires in but {} out", b, in, out));
        if (in == 0)
            throw std::invalid_argument(fmt::format("block {} touches no wires", b));
    }
}

namespace {

int wires_for_dim(std::size_t dim) {
    int w = 0;
    std::size_t capacity = 1;
    while (capacity < dim) {
        capacity <<= 1;
        ++w;
    }
    return std::max(w, 1);  // a dimension-1 or -2 edge still occupies a wire
}

}  // namespace

CircuitLayout tn_to_circuit_layout(const TensorNetworkGraph& tn,
                                   const std::vector<EdgeDirection>& open_dirs) {
    tn.validate();
    const auto open = tn.open_edges();
    if (open.size() != open_dirs.size())
        throw std::invalid_argument(
            fmt::format("graph has {} open edges but {} directions were given",
                        open.size(), open_dirs.size()));
    if (tn.vertices.empty()) throw std::invalid_argument("empty network");
    for (const TnEdge& e : tn.edges)
        if (!e.is_open() && e.a == e.b)
            throw std::invalid_argument(
                fmt::format("self-loop '{}' cannot be laid out as a circuit", e.label));

    // per-vertex count of In-tagged open edges, for picking BFS roots
    std::map<int, int> in_degree;
    for (const auto& [id, t] : tn.vertices) in_degree[id] = 0;
    for (std::size_t i = 0; i < open.size(); ++i)
        if (open_dirs[i] == EdgeDirection::In) in_degree[open[i]->inner_vertex()]++;

    std::map<int, std::vector<int>> adjacency;
    for (const TnEdge& e : tn.edges)
        if (!e.is_open()) {
            adjacency[e.a].push_back(e.b);
            adjacency[e.b].push_back(e.a);
        }
    for (auto& [id, nbrs] : adjacency) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }

    // breadth-first numbering; new components start at the unvisited vertex
    // with the most inputs (ties broken by the lower id)
    std::map<int, int> block_of;
    int next_block = 0;
    while (block_of.size() < tn.vertices.size()) {
        int root = -1;
        for (const auto& [id, t] : tn.vertices) {
            if (block_of.count(id)) continue;
            if (root < 0 || in_degree[id] > in_degree[root]) root = id;
        }
        std::queue<int> frontier;
        frontier.push(root);
        block_of[root] = next_block++;
        while (!frontier.empty()) {
            const int v = frontier.front();
            frontier.pop();
            for (int nbr : adjacency[v]) {
                if (block_of.count(nbr)) continue;
                block_of[nbr] = next_block++;
                frontier.push(nbr);
            }
        }
    }

    CircuitLayout layout;
    layout.n_blocks = next_block;

    std::size_t open_idx = 0;
    for (const TnEdge& e : tn.edges) {
        LayoutEdge le;
        le.wires = wires_for_dim(e.dim);
        if (e.is_open()) {
            const int inner = block_of.at(e.inner_vertex());
            if (open_dirs[open_idx++] == EdgeDirection::In) {
                le.src = kOpenEnd;
                le.dst = inner;
            } else {
                le.src = inner;
                le.dst = kOpenEnd;
            }
        } else {
            le.src = std::min(block_of.at(e.a), block_of.at(e.b));
            le.dst = std::max(block_of.at(e.a), block_of.at(e.b));
        }
        layout.edges.push_back(le);
    }

    // pad blocks with single-wire external connections until every block
    // consumes exactly as many wires as it produces
    for (int b = 0; b < layout.n_blocks; ++b) {
        int in = 0, out = 0;
        for (const LayoutEdge& e : layout.edges) {
            if (e.dst == b) in += e.wires;
            if (e.src == b) out += e.wires;
        }
        for (; in < out; ++in) layout.edges.push_back({kOpenEnd, b, 1});
        for (; out < in; ++out) layout.edges.push_back({b, kOpenEnd, 1});
    }

    layout.validate();
    return layout;
}

// --- text formats --------------------------------------------------------------

TensorNetworkGraph parse_tn_graph(std::istream& in) {
    TensorNetworkGraph tn;
    std::string line;
    int line_no = 0;
    int edge_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;  // blank or comment-only line

        auto fail = [&](const std::string& why) -> std::runtime_error {
            return std::runtime_error(fmt::format("line {}: {}", line_no, why));
        };
        auto read_int = [&](const char* what) {
            std::string tok;
            if (!(ls >> tok)) throw fail(fmt::format("missing {}", what));
            try {
                std::size_t used = 0;
                const long v = std::stol(tok, &used);
                if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
                return v;
            } catch (const std::exception&) {
                throw fail(fmt::format("'{}' is not a non-negative integer", tok));
            }
        };

        if (first == "open") {
            const long v = read_int("vertex id");
            const long d = read_int("dimension");
            if (d < 1) throw fail("dimension must be >= 1");
            tn.add_vertex(static_cast<int>(v));
            tn.add_edge(static_cast<int>(v), kOpenEnd, static_cast<std::size_t>(d),
                        fmt::format("e{}", edge_no++));
        } else {
            long u = 0;
            try {
                std::size_t used = 0;
                u = std::stol(first, &used);
                if (used != first.size() || u < 0) throw std::invalid_argument(first);
            } catch (const std::exception&) {
                throw fail(fmt::format("'{}' is not a vertex id or 'open'", first));
            }
            const long v = read_int("second vertex id");
            const long d = read_int("dimension");
            if (d < 1) throw fail("dimension must be >= 1");
            if (u == v) throw fail("self-loops are not supported");
            tn.add_vertex(static_cast<int>(u));
            tn.add_vertex(static_cast<int>(v));
            tn.add_edge(static_cast<int>(u), static_cast<int>(v),
                        static_cast<std::size_t>(d), fmt::format("e{}", edge_no++));
        }
        std::string extra;
        if (ls >> extra) throw fail(fmt::format("unexpected trailing token '{}'", extra));
    }
    if (tn.vertices.empty()) throw std::runtime_error("graph file defines no edges");
    return tn;
}

void write_layout(std::ostream& out, const CircuitLayout& layout) {
    out << "# blocks: " << layout.n_blocks << ", qubits: " << layout.total_qubits()
        << "\n";
    for (const LayoutEdge& e : layout.edges) {
        if (e.src == kOpenEnd)
            out << "in";
        else
            out << e.src;
        out << ' ';
        if (e.dst == kOpenEnd)
            out << "out";
        else
            out << e.dst;
        out << ' ' << e.wires << "\n";
    }
}

}  // namespace tncirc
