#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "tncirc/circuit.hpp"
#include "tncirc/rng.hpp"
#include "tncirc/statevector.hpp"
#include "tncirc/tensor.hpp"
#include "tncirc/tn_graph.hpp"

using namespace tncirc;

namespace {

DenseTensor matrix2x2(const std::string& row, const std::string& col, double a,
                      double b, double c, double d) {
    DenseTensor t({2, 2}, {row, col});
    t.data = {a, b, c, d};
    return t;
}

DenseTensor random_tensor(std::vector<std::size_t> shape,
                          std::vector<std::string> labels, std::uint64_t seed) {
    DenseTensor t(std::move(shape), std::move(labels));
    Rng rng(seed);
    for (auto& x : t.data) x = cdouble(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return t;
}

}  // namespace

TEST_CASE("dense tensor construction and indexing") {
    DenseTensor t({2, 3}, {"i", "j"});
    CHECK(t.rank() == 2);
    CHECK(t.size() == 6);
    CHECK(t.dim_of("j") == 3);
    t.at({1, 2}) = 5.0;
    CHECK(t.data[5] == cdouble(5.0));  // row-major: last index fastest

    CHECK_THROWS_AS(DenseTensor({2, 2}, {"i"}), std::invalid_argument);
    CHECK_THROWS_AS(DenseTensor({2, 0}, {"i", "j"}), std::invalid_argument);
    CHECK_THROWS_AS(DenseTensor({2, 2}, {"i", "i"}), std::invalid_argument);
    CHECK_THROWS_AS(t.label_pos("k"), std::invalid_argument);

    const DenseTensor s = DenseTensor::scalar(cdouble(2.0, 1.0));
    CHECK(s.rank() == 0);
    CHECK(s.size() == 1);
    CHECK(s.data[0] == cdouble(2.0, 1.0));
}

TEST_CASE("permutation reorders data consistently") {
    DenseTensor t = matrix2x2("i", "j", 1, 2, 3, 4);
    const DenseTensor p = permuted(t, {"j", "i"});
    CHECK(p.labels[0] == "j");
    CHECK(p.data[1] == cdouble(3.0));  // (j=0, i=1) = t(1, 0)
    CHECK(max_abs_diff(t, p) < 1e-15);  // same tensor, different layout

    CHECK_THROWS_AS(permuted(t, {"i", "k"}), std::invalid_argument);
}

TEST_CASE("matrix product through pair contraction") {
    const DenseTensor a = matrix2x2("i", "k", 1, 2, 3, 4);
    const DenseTensor b = matrix2x2("k", "j", 5, 6, 7, 8);
    const DenseTensor c = contract_pair(a, b, {"k"});
    REQUIRE(c.size() == 4);
    CHECK(c.data[0] == cdouble(19.0));
    CHECK(c.data[1] == cdouble(22.0));
    CHECK(c.data[2] == cdouble(43.0));
    CHECK(c.data[3] == cdouble(50.0));

    // contracting over every shared label gives the same result
    CHECK(max_abs_diff(c, contract_over_common(a, b)) < 1e-15);
}

TEST_CASE("full contraction to a scalar") {
    const DenseTensor a = matrix2x2("i", "j", 1, 2, 3, 4);
    const DenseTensor b = matrix2x2("i", "j", 1, 0, 0, 1);
    const DenseTensor s = contract_pair(a, b, {"i", "j"});
    CHECK(s.rank() == 0);
    CHECK(s.data[0] == cdouble(5.0));  // <a, identity> = trace
}

TEST_CASE("outer product with empty shared set") {
    DenseTensor a({2}, {"i"});
    a.data = {1.0, 2.0};
    DenseTensor b({2}, {"j"});
    b.data = {3.0, 4.0};
    const DenseTensor c = contract_pair(a, b, {});
    CHECK(c.shape == std::vector<std::size_t>{2, 2});
    CHECK(c.data[3] == cdouble(8.0));

    // shared labels must be listed explicitly
    const DenseTensor m = matrix2x2("i", "j", 1, 2, 3, 4);
    CHECK_THROWS_AS(contract_pair(m, m, {}), std::invalid_argument);
}

TEST_CASE("partial trace sums matched index pairs") {
    const DenseTensor m = matrix2x2("i", "j", 1, 2, 3, 4);
    const DenseTensor tr = trace_pair(m, "i", "j");
    CHECK(tr.rank() == 0);
    CHECK(tr.data[0] == cdouble(5.0));

    DenseTensor t3({2, 3, 2}, {"a", "m", "b"});
    for (std::size_t i = 0; i < t3.data.size(); ++i) t3.data[i] = double(i);
    const DenseTensor v = trace_pair(t3, "a", "b");
    CHECK(v.shape == std::vector<std::size_t>{3});
    // entry m: t(0,m,0) + t(1,m,1)
    CHECK(v.data[0] == cdouble(0.0 + 7.0));
}

TEST_CASE("difference norms require matching labels") {
    const DenseTensor a = matrix2x2("i", "j", 1, 2, 3, 4);
    const DenseTensor b = matrix2x2("i", "j", 1, 2, 3, 5);
    CHECK(max_abs_diff(a, b) == doctest::Approx(1.0));
    CHECK(frobenius_diff(a, b) == doctest::Approx(1.0));
    const DenseTensor c = matrix2x2("i", "k", 1, 2, 3, 4);
    CHECK_THROWS_AS(max_abs_diff(a, c), std::invalid_argument);
}

TEST_CASE("chain factorization round trips") {
    for (std::size_t rank : {2u, 3u, 4u, 5u, 6u}) {
        std::vector<std::size_t> shape(rank, 2);
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < rank; ++i) labels.push_back("q" + std::to_string(i));
        const DenseTensor t = random_tensor(shape, labels, 100 + rank);
        const auto sites = mps_factorize(t);
        REQUIRE(sites.size() == rank);
        const DenseTensor back = mps_contract(sites, labels);
        CHECK(max_abs_diff(t, back) < 1e-10);
    }
}

TEST_CASE("entangled pair structure has bond dimension 2") {
    // 4-qubit GHZ amplitudes as a rank-4 tensor
    DenseTensor ghz({2, 2, 2, 2}, {"a", "b", "c", "d"});
    ghz.data.assign(16, 0.0);
    ghz.data[0] = ghz.data[15] = 1.0 / std::sqrt(2.0);
    const auto sites = mps_factorize(ghz);
    REQUIRE(sites.size() == 4);
    CHECK(sites[0].shape == std::vector<std::size_t>{2, 2});
    CHECK(sites[1].shape == std::vector<std::size_t>{2, 2, 2});
    CHECK(sites[2].shape == std::vector<std::size_t>{2, 2, 2});
    CHECK(sites[3].shape == std::vector<std::size_t>{2, 2});
}

TEST_CASE("product tensors factorize with unit bonds") {
    DenseTensor t({2, 2, 2}, {"a", "b", "c"});
    for (std::size_t i = 0; i < 8; ++i) {
        const double va = (i & 4) ? 2.0 : 1.0;
        const double vb = (i & 2) ? -1.0 : 3.0;
        const double vc = (i & 1) ? 0.5 : 1.0;
        t.data[i] = va * vb * vc;
    }
    const auto sites = mps_factorize(t);
    CHECK(sites[0].shape == std::vector<std::size_t>{2, 1});
    CHECK(sites[1].shape == std::vector<std::size_t>{1, 2, 1});
    CHECK(sites[2].shape == std::vector<std::size_t>{1, 2});
}

TEST_CASE("bond truncation degrades monotonically") {
    const DenseTensor t = random_tensor({2, 2, 2, 2, 2}, {"a", "b", "c", "d", "e"}, 9);
    double previous = 1e100;
    for (std::size_t cap : {1u, 2u, 3u, 4u}) {
        const auto sites = mps_factorize(t, cap);
        const DenseTensor back = mps_contract(sites, {"a", "b", "c", "d", "e"});
        const double err = frobenius_diff(t, back);
        CHECK(err <= previous + 1e-12);
        previous = err;
        for (const auto& s : sites)
            for (std::size_t d : s.shape) CHECK(d <= 4);  // site dims are 2, bonds <= cap
    }
    CHECK(previous < 1e-10);  // cap 4 is full rank for 5 qubits of dim 2
}

TEST_CASE("factorization rejects scalars and vectors") {
    DenseTensor v({3}, {"i"});
    v.data = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(mps_factorize(v), std::invalid_argument);
}

TEST_CASE("network graph validation") {
    TensorNetworkGraph tn;
    tn.add_vertex(0);
    tn.add_vertex(1);
    tn.add_edge(0, 1, 2, "bond");
    tn.add_edge(0, kOpenEnd, 2, "phys0");
    CHECK(tn.open_edges().size() == 1);
    CHECK_THROWS_AS(tn.add_edge(0, 2, 2, "missing-vertex"), std::invalid_argument);
    CHECK_THROWS_AS(tn.add_edge(0, 1, 2, "bond"), std::invalid_argument);

    // tensors must match incident edges
    TensorNetworkGraph bad;
    bad.add_vertex(0, DenseTensor({2}, {"x"}));
    bad.add_edge(0, kOpenEnd, 2, "y");
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("network contraction matches direct pair contraction") {
    TensorNetworkGraph tn;
    tn.add_vertex(0, matrix2x2("i", "k", 1, 2, 3, 4));
    tn.add_vertex(1, matrix2x2("k", "j", 5, 6, 7, 8));
    tn.add_edge(0, 1, 2, "k");
    tn.add_edge(0, kOpenEnd, 2, "i");
    tn.add_edge(1, kOpenEnd, 2, "j");

    const DenseTensor got = contract_network(tn);
    CHECK(got.data[0] == cdouble(19.0));
    CHECK(got.data[3] == cdouble(50.0));

    // an explicit path gives the same answer
    const DenseTensor via_path = contract_network(tn, {{0, 1}});
    CHECK(max_abs_diff(got, via_path) < 1e-13);
}

TEST_CASE("contraction result is path independent") {
    // ring of three tensors
    TensorNetworkGraph tn;
    tn.add_vertex(0, random_tensor({2, 3}, {"ab", "ca"}, 1));
    tn.add_vertex(1, random_tensor({4, 2}, {"bc", "ab"}, 2));
    tn.add_vertex(2, random_tensor({3, 4}, {"ca", "bc"}, 3));
    tn.add_edge(0, 1, 2, "ab");
    tn.add_edge(1, 2, 4, "bc");
    tn.add_edge(2, 0, 3, "ca");

    const DenseTensor a = contract_network(tn, {{0, 1}, {0, 2}});
    const DenseTensor b = contract_network(tn, {{1, 2}, {0, 1}});
    const DenseTensor c = contract_network(tn);
    CHECK(std::abs(a.data[0] - b.data[0]) < 1e-12);
    CHECK(std::abs(a.data[0] - c.data[0]) < 1e-12);
}

TEST_CASE("disconnected networks combine by outer product") {
    TensorNetworkGraph tn;
    DenseTensor x({2}, {"i"});
    x.data = {2.0, 0.0};
    DenseTensor y({2}, {"j"});
    y.data = {0.0, 3.0};
    tn.add_vertex(0, x);
    tn.add_vertex(1, y);
    tn.add_edge(0, kOpenEnd, 2, "i");
    tn.add_edge(1, kOpenEnd, 2, "j");
    const DenseTensor got = contract_network(tn);
    CHECK(got.size() == 4);
    CHECK(got.data[1] == cdouble(6.0));
}

TEST_CASE("circuit expectation as a closed tensor network") {
    Rng rng(17);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 2 + int(rng.uniform_int(4));
        Circuit c(n);
        for (int g = 0; g < 6; ++g) {
            if (rng.uniform() < 0.5) {
                c.add(Gate::rot(int(rng.uniform_int(n)), rng.uniform(0, 6.28),
                                rng.uniform(0, 6.28), rng.uniform(0, 6.28)));
            } else {
                const int a = int(rng.uniform_int(n));
                int b = int(rng.uniform_int(n));
                if (b == a) b = (a + 1) % n;
                c.add(Gate::cnot(a, b));
            }
        }
        c.set_measured_wire(int(rng.uniform_int(n)));

        const DenseTensor scalar = contract_network(circuit_to_tn(c));
        const double direct = expval_z(run(c), c.measured_wire());
        CHECK(std::abs(scalar.data[0].real() - direct) < 1e-10);
        CHECK(std::abs(scalar.data[0].imag()) < 1e-10);
    }
}

TEST_CASE("circuit-to-network rejects unfinished circuits") {
    Circuit no_wire(2);
    no_wire.add(Gate::cnot(0, 1));
    CHECK_THROWS_AS(circuit_to_tn(no_wire), std::invalid_argument);

    Circuit unbound(1);
    unbound.add(Gate::rot_param(0, 0));
    unbound.set_measured_wire(0);
    CHECK_THROWS_AS(circuit_to_tn(unbound), std::invalid_argument);
}

TEST_CASE("graph text format") {
    SUBCASE("edges, opens and comments parse") {
        std::istringstream in(
            "# a chain\n"
            "0 1 2\n"
            "1 2 4\n"
            "open 0 2\n"
            "\n"
            "open 2 2\n");
        const TensorNetworkGraph tn = parse_tn_graph(in);
        CHECK(tn.vertices.size() == 3);
        CHECK(tn.edges.size() == 4);
        CHECK(tn.open_edges().size() == 2);
    }
    SUBCASE("malformed lines report their number") {
        std::istringstream in("0 1 2\nnot an edge\n");
        try {
            parse_tn_graph(in);
            FAIL("expected a parse error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("2") != std::string::npos);
        }
    }
    SUBCASE("self loops and zero dims are rejected") {
        std::istringstream loop("3 3 2\n");
        CHECK_THROWS_AS(parse_tn_graph(loop), std::runtime_error);
        std::istringstream zero("0 1 0\n");
        CHECK_THROWS_AS(parse_tn_graph(zero), std::runtime_error);
    }
}

TEST_CASE("chain network becomes a chain of blocks") {
    std::istringstream in(
        "0 1 2\n"
        "1 2 2\n"
        "2 3 2\n"
        "open 0 2\nopen 1 2\nopen 2 2\nopen 3 2\n");
    const TensorNetworkGraph tn = parse_tn_graph(in);
    const std::vector<EdgeDirection> dirs(4, EdgeDirection::In);
    const CircuitLayout layout = tn_to_circuit_layout(tn, dirs);
    CHECK(layout.n_blocks == 4);
    CHECK(layout.total_qubits() == 4);
    CHECK_NOTHROW(layout.validate());

    std::ostringstream out;
    write_layout(out, layout);
    CHECK(out.str().find("in") != std::string::npos);
}

TEST_CASE("grid network fixture plans nine blocks on ten wires") {
    std::ifstream in(std::string(TEST_FIXTURE_DIR) + "/peps3x3.txt");
    REQUIRE(in.good());
    const TensorNetworkGraph tn = parse_tn_graph(in);
    CHECK(tn.vertices.size() == 9);
    CHECK(tn.edges.size() == 21);
    REQUIRE(tn.open_edges().size() == 9);

    const std::vector<EdgeDirection> dirs(9, EdgeDirection::In);
    const CircuitLayout layout = tn_to_circuit_layout(tn, dirs);
    CHECK(layout.n_blocks == 9);
    CHECK(layout.total_qubits() == 10);
    CHECK_NOTHROW(layout.validate());
}

TEST_CASE("edge dimensions round up to whole wires") {
    std::istringstream in(
        "0 1 3\n"       // dim 3 -> 2 wires
        "open 0 2\n"    // 1 wire
        "open 1 5\n");  // dim 5 -> 3 wires
    const TensorNetworkGraph tn = parse_tn_graph(in);
    const CircuitLayout layout =
        tn_to_circuit_layout(tn, {EdgeDirection::In, EdgeDirection::Out});
    CHECK_NOTHROW(layout.validate());
    for (const LayoutEdge& e : layout.edges) {
        if (e.src == 0 && e.dst == 1) CHECK(e.wires == 2);
    }
}

TEST_CASE("random connected graphs yield valid balanced layouts") {
    Rng rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + int(rng.uniform_int(7));
        TensorNetworkGraph tn;
        for (int v = 0; v < n; ++v) tn.add_vertex(v);
        int label = 0;
        for (int v = 1; v < n; ++v)  // random spanning tree keeps it connected
            tn.add_edge(int(rng.uniform_int(v)), v, 1 + rng.uniform_int(4),
                        "e" + std::to_string(label++));
        const int extra = int(rng.uniform_int(3));
        for (int k = 0; k < extra; ++k) {
            const int a = int(rng.uniform_int(n));
            const int b = int(rng.uniform_int(n));
            if (a == b) continue;
            tn.add_edge(a, b, 1 + rng.uniform_int(4), "e" + std::to_string(label++));
        }
        const int opens = 1 + int(rng.uniform_int(4));
        std::vector<EdgeDirection> dirs;
        for (int k = 0; k < opens; ++k) {
            tn.add_edge(int(rng.uniform_int(n)), kOpenEnd, 1 + rng.uniform_int(4),
                        "o" + std::to_string(k));
            dirs.push_back(rng.uniform() < 0.5 ? EdgeDirection::In : EdgeDirection::Out);
        }
        const CircuitLayout layout = tn_to_circuit_layout(tn, dirs);
        CHECK(layout.n_blocks == n);
        CHECK_NOTHROW(layout.validate());  // acyclic ordering + wire balance
    }
}
