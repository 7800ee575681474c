#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tncirc/circuit.hpp"
#include "tncirc/tensor.hpp"

namespace tncirc {

// Endpoint value marking the dangling side of an open edge.
inline constexpr int kOpenEnd = -1;

struct TnEdge {
    int a = kOpenEnd;  // vertex id, or kOpenEnd for a dangling endpoint
    int b = kOpenEnd;
    std::size_t dim = 0;
    std::string label;  // unique across the graph; ties the edge to tensor indices

    bool is_open() const { return a == kOpenEnd || b == kOpenEnd; }
    int inner_vertex() const { return a == kOpenEnd ? b : a; }
};

// Undirected tensor-network graph. Vertices may carry tensors (required
// for contraction) or stay abstract (enough for layout planning). Edge
// labels double as tensor index labels on their endpoints.
struct TensorNetworkGraph {
    std::map<int, std::optional<DenseTensor>> vertices;
    std::vector<TnEdge> edges;

    void add_vertex(int id);
    void add_vertex(int id, DenseTensor tensor);
    // Both endpoints must exist (or be kOpenEnd); labels must be unique.
    void add_edge(int a, int b, std::size_t dim, std::string label);

    std::vector<const TnEdge*> open_edges() const;  // in edge order

    // Structural checks: endpoints exist, dims >= 1, labels unique, and
    // every tensor's indices match its incident edges one-to-one.
    // Throws std::invalid_argument with a description on failure.
    void validate() const;
};

// Fully contracts the network. Every vertex needs a tensor. The pair order
// is chosen greedily: among pairs sharing at least one edge, pick the one
// whose product has the fewest entries (ties: smallest vertex ids).
// Disconnected remainders are combined by outer products in id order.
DenseTensor contract_network(const TensorNetworkGraph& tn);

// Same, but contracting the given vertex pairs in order. After each step
// the merged tensor lives under the smaller of the two ids.
DenseTensor contract_network(const TensorNetworkGraph& tn,
                             const std::vector<std::pair<int, int>>& path);

// Expectation value <0|U^dag Z_w U|0> as a closed tensor network: |0> caps,
// the circuit's gates, a Z tensor on the measured wire, the conjugated
// gates in reverse, and <0| caps. The circuit must be bound and have a
// measured wire; cut markers are ignored. Contracting the result gives a
// scalar equal to expval_z on the final state.
TensorNetworkGraph circuit_to_tn(const Circuit& circuit);

// --- block layout planning -------------------------------------------------

// One block-to-block connection in a planned circuit: `wires` qubit lines
// run from block `src` to block `dst` (kOpenEnd marks circuit input/output).
struct LayoutEdge {
    int src = kOpenEnd;
    int dst = kOpenEnd;
    int wires = 0;
};

// A plan for realizing a tensor network as a block circuit: numbered blocks
// (0..n_blocks-1 in execution order) and directed wire bundles. Every block
// has equally many incoming and outgoing wires.
struct CircuitLayout {
    int n_blocks = 0;
    std::vector<LayoutEdge> edges;

    int block_wire_count(int block) const;  // in-wires (== out-wires) of a block
    int total_qubits() const;               // wires entering from the outside
    // Execution order must respect all edges (src < dst); validate() throws
    // std::invalid_argument when balance or ordering is broken.
    void validate() const;
};

enum class EdgeDirection { In, Out };

// Turns an abstract tensor network into a block-circuit plan:
//   1. every open edge is tagged In or Out (open_dirs follows the order
//      of open edges in tn.edges);
//   2. blocks are numbered by breadth-first search from the vertex with the
//      most In-tagged open edges (ties: lowest vertex id), neighbours
//      visited in ascending id order, remaining components started by the
//      same rule;
//   3. internal edges run from the lower block number to the higher;
//   4. an edge of dimension d becomes ceil(log2 d) wires (min 1);
//   5. blocks whose in/out wire counts differ get extra single-wire open
//      edges appended until balanced.
CircuitLayout tn_to_circuit_layout(const TensorNetworkGraph& tn,
                                   const std::vector<EdgeDirection>& open_dirs);

// --- text formats ------------------------------------------------------------

// Parses the edge-list format: one edge per line, either "u v d" (internal,
// vertex ids u != v, dimension d >= 1) or "open v d". '#' starts a comment.
// Vertices are created on first mention. Throws std::runtime_error with a
// line number on malformed input.
TensorNetworkGraph parse_tn_graph(std::istream& in);

// Layout as text: one "src dst wires" line per edge, with "in"/"out"
// standing for the external side.
void write_layout(std::ostream& out, const CircuitLayout& layout);

}  // namespace tncirc
