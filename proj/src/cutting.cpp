#include "tncirc/cutting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "tncirc/parallel.hpp"
#include "tncirc/rng.hpp"
#include "tncirc/statevector.hpp"
#include "tncirc/tensor.hpp"

namespace tncirc {

namespace {

long long ipow(long long base, int exp) {
    long long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

// Pauli-basis conversion: row P in {I,X,Y,Z}, column s in prep order
// {Z0, Z1, X+, Y+}. The sink-side pseudo-state for P is sum_s V[P][s] * r(s),
// chosen so that (1/2) sum_P <P>_source * v_P(sink) reproduces the identity
// channel across the cut.
constexpr double kPauliFromPrep[4][4] = {
    {1, 1, 0, 0},    // I = r(Z0) + r(Z1)
    {-1, -1, 2, 0},  // X = 2 r(X+) - r(Z0) - r(Z1)
    {-1, -1, 0, 2},  // Y = 2 r(Y+) - r(Z0) - r(Z1)
    {1, -1, 0, 0},   // Z = r(Z0) - r(Z1)
};

}  // namespace

long long Fragment::n_configs() const {
    return ipow(4, n_in()) * ipow(3, n_out());
}

int FragmentSet::d_max() const {
    std::map<std::pair<int, int>, int> between;
    for (const CutEdge& e : cut_edges)
        between[{e.src_fragment, e.dst_fragment}]++;
    int m = 0;
    for (const auto& [pair, count] : between) m = std::max(m, count);
    return m;
}

std::vector<int> FragmentSet::topological_order() const {
    const int k = static_cast<int>(fragments.size());
    std::vector<std::vector<int>> out(k);
    std::vector<int> in_degree(k, 0);
    for (const CutEdge& e : cut_edges) {
        out[e.src_fragment].push_back(e.dst_fragment);
        in_degree[e.dst_fragment]++;
    }
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int f = 0; f < k; ++f)
        if (in_degree[f] == 0) ready.push(f);
    std::vector<int> order;
    while (!ready.empty()) {
        const int f = ready.top();
        ready.pop();
        order.push_back(f);
        for (int nxt : out[f])
            if (--in_degree[nxt] == 0) ready.push(nxt);
    }
    if (static_cast<int>(order.size()) != k)
        throw std::logic_error("fragment graph has a cycle");
    return order;
}

long long FragmentSet::total_configs() const {
    long long total = 0;
    for (const Fragment& f : fragments) total += f.n_configs();
    return total;
}

FragmentSet partition(const Circuit& circuit) {
    if (circuit.is_parametric())
        throw std::invalid_argument("bind circuit parameters before partitioning");
    if (!circuit.has_cuts())
        throw std::invalid_argument("circuit has no cut markers");
    if (circuit.measured_wire() < 0)
        throw std::invalid_argument("circuit needs a measured wire");

    const auto& gates = circuit.gates();
    const int n_gates = static_cast<int>(gates.size());
    const int n_wires = circuit.n_qubits();

    // gates per wire, in program order
    std::vector<std::vector<int>> on_wire(n_wires);
    for (int g = 0; g < n_gates; ++g)
        for (int w : gates[g].wires) on_wire[w].push_back(g);

    // Wire-segment edges between consecutive gates on a wire; a marker on
    // that wire anchored anywhere in between severs the segment.
    struct Segment {
        int wire, from, to;
        bool cut = false;
    };
    std::vector<Segment> segments;
    for (int w = 0; w < n_wires; ++w)
        for (std::size_t i = 0; i + 1 < on_wire[w].size(); ++i)
            segments.push_back({w, on_wire[w][i], on_wire[w][i + 1], false});

    for (const CutMarker& m : circuit.cut_markers()) {
        if (on_wire[m.wire].empty())
            throw std::invalid_argument(
                fmt::format("cut marker on wire {} which carries no gates", m.wire));
        if (m.after_gate < on_wire[m.wire].front())
            throw std::invalid_argument(
                fmt::format("cut on wire {} precedes its first gate", m.wire));
        if (m.after_gate >= on_wire[m.wire].back())
            throw std::invalid_argument(
                fmt::format("cut on wire {} after its last gate severs the readout",
                            m.wire));
        bool hit = false;
        for (Segment& s : segments)
            if (s.wire == m.wire && s.from <= m.after_gate && m.after_gate < s.to) {
                s.cut = true;
                hit = true;
                break;
            }
        if (!hit)
            throw std::invalid_argument(
                fmt::format("cut marker on wire {} after gate {} severs nothing",
                            m.wire, m.after_gate));
    }

    // connected components of the gate graph over uncut segments
    std::vector<std::vector<int>> adj(n_gates);
    for (const Segment& s : segments)
        if (!s.cut) {
            adj[s.from].push_back(s.to);
            adj[s.to].push_back(s.from);
        }
    std::vector<int> comp(n_gates, -1);
    int n_comp = 0;
    for (int g = 0; g < n_gates; ++g) {
        if (comp[g] >= 0) continue;
        // BFS from the lowest unassigned gate: components come out ordered
        // by their earliest gate, which respects program order
        std::queue<int> q;
        q.push(g);
        comp[g] = n_comp;
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int nxt : adj[v])
                if (comp[nxt] < 0) {
                    comp[nxt] = n_comp;
                    q.push(nxt);
                }
        }
        ++n_comp;
    }
    if (n_comp < 2)
        throw std::invalid_argument("cut markers do not disconnect the circuit");

    for (const Segment& s : segments)
        if (s.cut && comp[s.from] == comp[s.to])
            throw std::invalid_argument(fmt::format(
                "cut on wire {} does not separate: its sides reconnect elsewhere",
                s.wire));

    // Wires must enter each fragment once: a wire whose gate list alternates
    // between fragments cannot be realized as a standalone register.
    for (int w = 0; w < n_wires; ++w) {
        std::set<int> seen;
        int prev = -1;
        for (int g : on_wire[w]) {
            if (comp[g] != prev && !seen.insert(comp[g]).second)
                throw std::invalid_argument(
                    fmt::format("wire {} re-enters a fragment it already left", w));
            prev = comp[g];
        }
    }

    FragmentSet fs;
    fs.fragments.resize(n_comp);

    // local registers: ascending original wire order within each fragment
    std::vector<std::map<int, int>> local(n_comp);  // original wire -> local wire
    for (int g = 0; g < n_gates; ++g)
        for (int w : gates[g].wires) local[comp[g]].emplace(w, 0);
    for (int f = 0; f < n_comp; ++f) {
        int next = 0;
        for (auto& [w, lw] : local[f]) lw = next++;
        Fragment& frag = fs.fragments[f];
        frag.circuit = Circuit(std::max(1, static_cast<int>(local[f].size())));
        frag.wire_map.resize(local[f].size());
        for (const auto& [w, lw] : local[f]) frag.wire_map[lw] = w;
    }
    for (int g = 0; g < n_gates; ++g) {
        Gate copy = gates[g];
        for (int& w : copy.wires) w = local[comp[g]].at(w);
        fs.fragments[comp[g]].circuit.add(std::move(copy));
    }

    // cut edges in (wire, position) order → deterministic cut ids
    int next_cut = 0;
    for (const Segment& s : segments) {
        if (!s.cut) continue;
        const int src = comp[s.from], dst = comp[s.to];
        fs.cut_edges.push_back({next_cut, src, dst, s.wire});
        fs.fragments[src].outgoing.push_back({next_cut, local[src].at(s.wire)});
        fs.fragments[dst].incoming.push_back({next_cut, local[dst].at(s.wire)});
        ++next_cut;
    }
    for (Fragment& f : fs.fragments) {
        auto by_cut = [](const CutPort& a, const CutPort& b) {
            return a.cut_id < b.cut_id;
        };
        std::sort(f.incoming.begin(), f.incoming.end(), by_cut);
        std::sort(f.outgoing.begin(), f.outgoing.end(), by_cut);
    }

    // terminal observable lands in the fragment holding the last gate on the
    // measured wire
    const int mw = circuit.measured_wire();
    if (on_wire[mw].empty())
        throw std::invalid_argument("measured wire carries no gates");
    const int term_frag = comp[on_wire[mw].back()];
    fs.fragments[term_frag].terminal_wire = local[term_frag].at(mw);
    fs.fragments[term_frag].circuit.set_measured_wire(local[term_frag].at(mw));

    fs.topological_order();  // asserts acyclicity
    return fs;
}

std::vector<FragmentConfig> enumerate_configs(const FragmentSet& fs) {
    std::vector<FragmentConfig> configs;
    for (std::size_t f = 0; f < fs.fragments.size(); ++f) {
        const Fragment& frag = fs.fragments[f];
        const long long n_prep = ipow(4, frag.n_in());
        const long long n_meas = ipow(3, frag.n_out());
        for (long long pc = 0; pc < n_prep; ++pc) {
            for (long long mc = 0; mc < n_meas; ++mc) {
                FragmentConfig cfg;
                cfg.fragment = static_cast<int>(f);
                long long p = pc;
                for (int i = 0; i < frag.n_in(); ++i, p /= 4)
                    cfg.preps.push_back(static_cast<PrepKind>(p % 4));
                long long m = mc;
                for (int i = 0; i < frag.n_out(); ++i, m /= 3)
                    cfg.bases.push_back(static_cast<Basis>(m % 3));
                configs.push_back(std::move(cfg));
            }
        }
    }
    return configs;
}

namespace {

Circuit configured_circuit(const Fragment& frag, const FragmentConfig& config) {
    if (static_cast<int>(config.preps.size()) != frag.n_in() ||
        static_cast<int>(config.bases.size()) != frag.n_out())
        throw std::invalid_argument("configuration does not match fragment ports");
    Circuit c(frag.circuit.n_qubits());
    for (int i = 0; i < frag.n_in(); ++i)
        c.add(Gate::prep_state(frag.incoming[i].wire, config.preps[i]));
    for (const Gate& g : frag.circuit.gates()) c.add(g);
    for (int i = 0; i < frag.n_out(); ++i)
        c.add(Gate::basis_change(frag.outgoing[i].wire, config.bases[i]));
    return c;
}

// sign masks per basis state: collect the +-1 readout of every outgoing
// port (and the terminal) and fill all subset products
void accumulate(const Fragment& frag, std::size_t basis_state, int n_qubits,
                double weight, SubsetExpectations& acc) {
    const int n_out = frag.n_out();
    double term = 1.0;
    if (frag.terminal_wire >= 0) {
        const std::size_t mask = std::size_t{1}
                                 << (n_qubits - 1 - frag.terminal_wire);
        term = (basis_state & mask) ? -1.0 : 1.0;
    }
    for (std::size_t subset = 0; subset < acc.size(); ++subset) {
        double sign = term;
        for (int j = 0; j < n_out; ++j) {
            if (!(subset & (std::size_t{1} << j))) continue;
            const std::size_t mask =
                std::size_t{1} << (n_qubits - 1 - frag.outgoing[j].wire);
            if (basis_state & mask) sign = -sign;
        }
        acc[subset] += weight * sign;
    }
}

}  // namespace

SubsetExpectations evaluate_fragment(const Fragment& frag,
                                     const FragmentConfig& config) {
    const Circuit c = configured_circuit(frag, config);
    const Statevector state = run(c);
    SubsetExpectations acc(std::size_t{1} << frag.n_out(), 0.0);
    for (std::size_t b = 0; b < state.dim(); ++b) {
        const double w = std::norm(state.amps[b]);
        if (w > 0.0) accumulate(frag, b, state.n_qubits, w, acc);
    }
    return acc;
}

SubsetExpectations evaluate_fragment_sampled(const Fragment& frag,
                                             const FragmentConfig& config,
                                             int shots, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    const Circuit c = configured_circuit(frag, config);
    const Statevector state = run(c);

    std::vector<double> cumulative(state.dim());
    double total = 0;
    for (std::size_t b = 0; b < state.dim(); ++b) {
        total += std::norm(state.amps[b]);
        cumulative[b] = total;
    }

    Rng rng(seed);
    SubsetExpectations acc(std::size_t{1} << frag.n_out(), 0.0);
    const double per_shot = 1.0 / shots;
    for (int s = 0; s < shots; ++s) {
        const double u = rng.uniform() * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t b = std::min<std::size_t>(
            static_cast<std::size_t>(it - cumulative.begin()), state.dim() - 1);
        accumulate(frag, b, state.n_qubits, per_shot, acc);
    }
    return acc;
}

std::vector<FragmentResults> evaluate_all(const FragmentSet& fs,
                                          const EvaluateOptions& opts) {
    const std::vector<FragmentConfig> configs = enumerate_configs(fs);
    std::vector<SubsetExpectations> slots(configs.size());

    parallel_for(
        configs.size(),
        [&](std::size_t i) {
            if (opts.shots > 0) {
                // distinct, reproducible stream per configuration
                const std::uint64_t seed =
                    opts.seed ^ (0x9e3779b97f4a7c15ull * (i + 1));
                slots[i] = evaluate_fragment_sampled(
                    fs.fragments[configs[i].fragment], configs[i], opts.shots, seed);
            } else {
                slots[i] = evaluate_fragment(fs.fragments[configs[i].fragment],
                                             configs[i]);
            }
        },
        opts.threads);

    std::vector<FragmentResults> results(fs.fragments.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const FragmentConfig& cfg = configs[i];
        long long pc = 0;
        for (int j = cfg.preps.size() - 1; j >= 0; --j)
            pc = pc * 4 + static_cast<long long>(cfg.preps[j]);
        long long mc = 0;
        for (int j = cfg.bases.size() - 1; j >= 0; --j)
            mc = mc * 3 + static_cast<long long>(cfg.bases[j]);
        results[cfg.fragment][{pc, mc}] = std::move(slots[i]);
    }
    return results;
}

namespace {

// Fragment results as a Pauli-indexed tensor: one dimension-4 leg per cut
// edge touching the fragment (labelled "cut{id}"), entries indexed by
// {I,X,Y,Z}. Outgoing legs hold measured Pauli expectations; incoming legs
// are converted from the preparation basis via kPauliFromPrep.
DenseTensor fragment_tensor(const Fragment& frag, const FragmentResults& results) {
    const int n_in = frag.n_in();
    const int n_out = frag.n_out();

    std::vector<std::size_t> shape(n_in + n_out, 4);
    std::vector<std::string> labels;
    for (const CutPort& p : frag.incoming)
        labels.push_back(fmt::format("cut{}", p.cut_id));
    for (const CutPort& p : frag.outgoing)
        labels.push_back(fmt::format("cut{}", p.cut_id));
    DenseTensor t(shape, labels);

    const long long n_pauli_in = ipow(4, n_in);
    const long long n_pauli_out = ipow(4, n_out);

    for (long long pin = 0; pin < n_pauli_in; ++pin) {
        for (long long pout = 0; pout < n_pauli_out; ++pout) {
            // measured side: Pauli I on a port means "read in Z, marginalize"
            long long mc = 0;
            std::size_t subset = 0;
            {
                long long rest = pout;
                for (int j = 0; j < n_out; ++j, rest /= 4) {
                    const int pauli = rest % 4;
                    int basis_idx;  // into {X=0, Y=1, Z=2}
                    if (pauli == 0)
                        basis_idx = 2;
                    else if (pauli == 1)
                        basis_idx = 0;
                    else if (pauli == 2)
                        basis_idx = 1;
                    else
                        basis_idx = 2;
                    if (pauli != 0) subset |= std::size_t{1} << j;
                    mc += static_cast<long long>(basis_idx) * ipow(3, j);
                }
            }

            // preparation side: weight every prep odometer code by the
            // product of conversion coefficients
            double value = 0;
            const long long n_prep = ipow(4, n_in);
            for (long long sc = 0; sc < n_prep; ++sc) {
                double coeff = 1.0;
                long long prest = pin, srest = sc;
                for (int j = 0; j < n_in; ++j, prest /= 4, srest /= 4)
                    coeff *= kPauliFromPrep[prest % 4][srest % 4];
                if (coeff == 0.0) continue;
                const auto it = results.find({sc, mc});
                if (it == results.end())
                    throw std::invalid_argument(
                        "missing fragment result for a required configuration");
                value += coeff * it->second[subset];
            }

            // flat position: incoming legs first, first port slowest —
            // matches the (in..., out...) label order with row-major data
            std::size_t flat = 0;
            {
                long long rest = pin;
                std::vector<std::size_t> idx(n_in + n_out);
                for (int j = 0; j < n_in; ++j, rest /= 4)
                    idx[j] = static_cast<std::size_t>(rest % 4);
                rest = pout;
                for (int j = 0; j < n_out; ++j, rest /= 4)
                    idx[n_in + j] = static_cast<std::size_t>(rest % 4);
                for (std::size_t k = 0; k < idx.size(); ++k)
                    flat = flat * 4 + idx[k];
            }
            t.data[flat] = value;
        }
    }
    return t;
}

}  // namespace

double reconstruct(const FragmentSet& fs,
                   const std::vector<FragmentResults>& results) {
    if (results.size() != fs.fragments.size())
        throw std::invalid_argument("one result table per fragment required");

    const std::vector<int> order = fs.topological_order();
    DenseTensor acc = DenseTensor::scalar(1.0);
    for (int f : order) {
        const DenseTensor ft = fragment_tensor(fs.fragments[f], results[f]);
        acc = contract_over_common(acc, ft);
    }
    if (acc.rank() != 0)
        throw std::logic_error("reconstruction left unresolved cut edges");
    return acc.data[0].real() * std::ldexp(1.0, -fs.n_cuts());
}

long long count_configs_mps(int n, int n_V) {
    if (n_V < 1) throw std::invalid_argument("need n_V >= 1");
    if (n % n_V != 0)
        throw std::invalid_argument(
            fmt::format("n = {} is not divisible by n_V = {}", n, n_V));
    const int ratio = n / n_V;
    if (ratio < 3)
        throw std::invalid_argument(fmt::format("need n/n_V >= 3, got {}", ratio));
    return ipow(3, n_V) + (ratio - 3) * ipow(4, n_V) * ipow(3, n_V) + ipow(4, n_V);
}

long long count_configs_ttn(int n, int n_V) {
    if (n_V < 1) throw std::invalid_argument("need n_V >= 1");
    if (n % (2 * n_V) != 0)
        throw std::invalid_argument(
            fmt::format("n = {} is not divisible by 2*n_V = {}", n, 2 * n_V));
    const long long leaves = n / (2 * n_V);
    if (leaves < 2 || (leaves & (leaves - 1)) != 0)
        throw std::invalid_argument(
            fmt::format("n/(2 n_V) = {} must be a power of two >= 2", leaves));
    return ipow(3, n_V) * leaves + ipow(3, n_V) * ipow(4, 2 * n_V) * (leaves - 2) +
           ipow(4, 2 * n_V);
}

double estimate_cost(int d_max, int k, double eps) {
    if (d_max < 1) throw std::invalid_argument("need d_max >= 1");
    if (k < 1) throw std::invalid_argument("need k >= 1");
    if (eps <= 0) throw std::invalid_argument("need eps > 0");
    const double dk = static_cast<double>(k);
    // 8^{3 d} = 2^{9 d}, computed exactly so cost ratios stay exact
    return std::ldexp(1.0, 9 * d_max) * d_max * dk * dk * dk * std::log(dk) /
           (eps * eps);
}

CutRunReport cut_run(const AnsatzLayout& layout, const ParamVector& params,
                     const EvaluateOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();

    const Circuit circuit = build_circuit(layout, params);
    const FragmentSet fs = partition(circuit);
    const auto results = evaluate_all(fs, opts);

    CutRunReport report;
    report.n = layout.n_qubits;
    report.n_V = layout.n_bond_qubits;
    report.b = layout.block.n_block_qubits;
    report.kind = layout.kind;
    report.n_fragments = static_cast<int>(fs.fragments.size());
    report.n_configs = fs.total_configs();
    report.expval_cut = reconstruct(fs, results);

    // Wall time covers the cutting workflow only; the uncut check below is
    // an oracle for small sizes, not part of the measured pipeline.
    const auto t1 = std::chrono::steady_clock::now();
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();

    if (layout.n_qubits <= 20) {
        const Statevector s = run(circuit.without_cut_markers());
        report.expval_uncut = expval_z(s, circuit.measured_wire());
        report.max_abs_error = std::abs(report.expval_cut - *report.expval_uncut);
    }
    return report;
}

}  // namespace tncirc
