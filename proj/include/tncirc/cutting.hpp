#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tncirc/ansatz.hpp"
#include "tncirc/circuit.hpp"

namespace tncirc {

// One endpoint of a severed wire inside a fragment: `cut_id` is the global
// cut index, `wire` the fragment-local wire it lands on.
struct CutPort {
    int cut_id = 0;
    int wire = 0;
};

// A standalone piece of a cut circuit. Incoming ports start in |0> and get
// a PrepState; outgoing ports end in a BasisChange followed by a Z readout.
// `terminal_wire` carries the circuit's original observable (-1 elsewhere).
struct Fragment {
    Circuit circuit;
    std::vector<int> wire_map;       // local wire -> original circuit wire
    std::vector<CutPort> incoming;   // sorted by cut_id
    std::vector<CutPort> outgoing;
    int terminal_wire = -1;

    Fragment() : circuit(1) {}

    int n_in() const { return static_cast<int>(incoming.size()); }
    int n_out() const { return static_cast<int>(outgoing.size()); }
    // 4^in * 3^out prepare/measure settings
    long long n_configs() const;
};

struct CutEdge {
    int cut_id = 0;
    int src_fragment = 0;
    int dst_fragment = 0;
    int original_wire = 0;
};

// Result of partitioning a circuit at its cut markers.
struct FragmentSet {
    std::vector<Fragment> fragments;
    std::vector<CutEdge> cut_edges;

    int n_cuts() const { return static_cast<int>(cut_edges.size()); }
    // Largest number of cut edges between any single pair of fragments.
    int d_max() const;
    // Fragment evaluation/contraction order; throws on a cyclic DAG.
    std::vector<int> topological_order() const;
    long long total_configs() const;
};

// Splits the circuit at its cut markers into connected fragments.
// Preconditions: the circuit is bound, has a measured wire, and carries at
// least one marker; every marker must actually separate two gates on its
// wire, and removing the marked wire segments must disconnect the gate
// graph (throws std::invalid_argument otherwise, e.g. for a marker whose
// two sides reconnect through other wires).
FragmentSet partition(const Circuit& circuit);

// One prepare/measure setting for one fragment.
struct FragmentConfig {
    int fragment = 0;
    std::vector<PrepKind> preps;  // one per incoming port, in port order
    std::vector<Basis> bases;     // one per outgoing port, in port order
};

// All 4^in * 3^out settings for every fragment, fragment-major, preps and
// bases in odometer order (first port fastest).
std::vector<FragmentConfig> enumerate_configs(const FragmentSet& fs);

// Joint expectation values for one setting: entry [mask] is the expectation
// of the product of rotated-Z readouts over the outgoing ports in `mask`
// (bit i = port i), times Z on the terminal wire when present. Entry [0] is
// the bare terminal expectation (or 1.0 for a terminal-free fragment).
using SubsetExpectations = std::vector<double>;

SubsetExpectations evaluate_fragment(const Fragment& frag,
                                     const FragmentConfig& config);
// Shot-noise variant: estimates the same expectations from `shots` sampled
// basis states instead of exact amplitudes.
SubsetExpectations evaluate_fragment_sampled(const Fragment& frag,
                                             const FragmentConfig& config,
                                             int shots, std::uint64_t seed);

// Results for one fragment across all of its settings, keyed by
// (prep odometer code, basis odometer code).
using FragmentResults = std::map<std::pair<long long, long long>, SubsetExpectations>;

struct EvaluateOptions {
    int shots = 0;  // 0 = exact expectations
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = hardware default
};

// Evaluates every configuration of every fragment (concurrently across
// configurations; results are placed by index, so the outcome is
// deterministic for a fixed seed regardless of thread count).
std::vector<FragmentResults> evaluate_all(const FragmentSet& fs,
                                          const EvaluateOptions& opts = {});

// Combines fragment results into the uncut circuit's <Z>: every cut edge is
// expanded over the Pauli basis (the source side supplies <P>, the sink side
// the matching pseudo-state combination), fragments are contracted along the
// DAG in topological order, and the total is scaled by 2^-(number of cuts).
double reconstruct(const FragmentSet& fs,
                   const std::vector<FragmentResults>& results);

// Closed-form circuit counts for fully cut chain / tree networks:
//   chain: 3^{n_V} + (n/n_V - 3) * 4^{n_V} * 3^{n_V} + 4^{n_V}
//   tree:  3^{n_V} * n/(2 n_V) + 3^{n_V} * 4^{2 n_V} * (n/(2 n_V) - 2) + 4^{2 n_V}
// Preconditions: n/n_V >= 3 and integral (chain); n/(2 n_V) an integral
// power of two >= 2 (tree).
long long count_configs_mps(int n, int n_V);
long long count_configs_ttn(int n, int n_V);

// Relative sampling-cost scale 8^{3 d_max} * d_max * k^3 * ln(k) / eps^2.
// Only ratios are meaningful; k = 1 gives 0 because ln(1) = 0.
double estimate_cost(int d_max, int k, double eps);

// End-to-end driver used by the CLI and the equivalence tests.
struct CutRunReport {
    int n = 0, n_V = 0, b = 0;
    AnsatzKind kind = AnsatzKind::Mps;
    int n_fragments = 0;
    long long n_configs = 0;
    double expval_cut = 0.0;
    std::optional<double> expval_uncut;  // filled when n <= 20
    double max_abs_error = 0.0;          // |cut - uncut| when both known
    double wall_time_ms = 0.0;
};

CutRunReport cut_run(const AnsatzLayout& layout, const ParamVector& params,
                     const EvaluateOptions& opts = {});

}  // namespace tncirc
