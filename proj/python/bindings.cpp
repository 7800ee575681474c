#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tncirc/ansatz.hpp"
#include "tncirc/bas.hpp"
#include "tncirc/circuit.hpp"
#include "tncirc/cutting.hpp"
#include "tncirc/detect.hpp"
#include "tncirc/image.hpp"
#include "tncirc/mlpipe.hpp"
#include "tncirc/statevector.hpp"
#include "tncirc/tensor.hpp"
#include "tncirc/tn_graph.hpp"

namespace py = pybind11;
using namespace tncirc;

namespace {

AnsatzLayout layout_from_args(const std::string& kind, int n, int nv, int layers,
                              int block_qubits) {
    BlockSpec block;
    block.n_layers = layers;
    if (ansatz_kind_from_string(kind) == AnsatzKind::Ttn) {
        block.n_block_qubits = 2 * nv;
        return make_ttn_layout(n, nv, block);
    }
    block.n_block_qubits = block_qubits;
    return make_mps_layout(n, nv, block);
}

py::dict cut_report_dict(const CutRunReport& r) {
    py::dict d;
    d["kind"] = to_string(r.kind);
    d["n"] = r.n;
    d["n_V"] = r.n_V;
    d["b"] = r.b;
    d["n_fragments"] = r.n_fragments;
    d["n_configs"] = r.n_configs;
    d["expval_cut"] = r.expval_cut;
    d["wall_time_ms"] = r.wall_time_ms;
    if (r.expval_uncut) {
        d["expval_uncut"] = *r.expval_uncut;
        d["max_abs_error"] = r.max_abs_error;
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Tensor-network quantum circuit toolkit";

    py::class_<AnsatzLayout>(m, "AnsatzLayout")
        .def_property_readonly("kind",
                               [](const AnsatzLayout& l) { return to_string(l.kind); })
        .def_readonly("n_qubits", &AnsatzLayout::n_qubits)
        .def_readonly("n_bond_qubits", &AnsatzLayout::n_bond_qubits)
        .def_readonly("measured_wire", &AnsatzLayout::measured_wire)
        .def_property_readonly("n_blocks", &AnsatzLayout::n_blocks)
        .def_property_readonly("param_count", &AnsatzLayout::param_count)
        .def("__repr__", [](const AnsatzLayout& l) {
            std::ostringstream s;
            s << "AnsatzLayout(" << to_string(l.kind) << ", n=" << l.n_qubits
              << ", n_V=" << l.n_bond_qubits << ", blocks=" << l.n_blocks() << ")";
            return s.str();
        });

    m.def("make_layout", &layout_from_args, py::arg("kind"), py::arg("n"),
          py::arg("nv") = 1, py::arg("layers") = 2, py::arg("block_qubits") = 2,
          "Build an MPS or TTN block layout");

    py::class_<ParamVector>(m, "ParamVector")
        .def_static("zeros", &ParamVector::zeros, py::arg("layout"))
        .def_static("random", &ParamVector::random, py::arg("layout"), py::arg("seed"))
        .def_readonly("values", &ParamVector::values);

    py::class_<Circuit>(m, "Circuit")
        .def_property_readonly("n_qubits", &Circuit::n_qubits)
        .def_property_readonly("measured_wire", &Circuit::measured_wire)
        .def_property_readonly("n_gates",
                               [](const Circuit& c) { return c.gates().size(); })
        .def_property_readonly("n_cuts",
                               [](const Circuit& c) { return c.cut_markers().size(); });

    m.def("build_circuit", &build_circuit, py::arg("layout"), py::arg("params"));

    m.def(
        "circuit_expval",
        [](const Circuit& circuit) {
            Statevector s = run(circuit.without_cut_markers());
            return expval_z(s, circuit.measured_wire());
        },
        py::arg("circuit"), "Simulate and return <Z> on the measured wire");

    m.def(
        "circuit_tn_expval",
        [](const Circuit& circuit) {
            DenseTensor t = contract_network(circuit_to_tn(circuit.without_cut_markers()));
            return t.data.at(0).real();
        },
        py::arg("circuit"), "Contract the circuit's tensor network to <Z>");

    m.def(
        "cut_run",
        [](const AnsatzLayout& layout, std::uint64_t seed, int shots, int threads) {
            ParamVector params = ParamVector::random(layout, seed);
            EvaluateOptions opts;
            opts.shots = shots;
            opts.seed = seed;
            opts.threads = threads;
            return cut_report_dict(cut_run(layout, params, opts));
        },
        py::arg("layout"), py::arg("seed") = 0, py::arg("shots") = 0,
        py::arg("threads") = 0, "Cut, evaluate fragments, and reconstruct <Z>");

    m.def("count_configs_mps", &count_configs_mps, py::arg("n"), py::arg("nv"));
    m.def("count_configs_ttn", &count_configs_ttn, py::arg("n"), py::arg("nv"));
    m.def("estimate_cost", &estimate_cost, py::arg("d_max"), py::arg("k"),
          py::arg("eps"));

    py::class_<LabeledDataset>(m, "LabeledDataset")
        .def_property_readonly("size",
                               [](const LabeledDataset& d) { return d.items.size(); })
        .def_readonly("train_indices", &LabeledDataset::train_indices)
        .def_readonly("test_indices", &LabeledDataset::test_indices)
        .def("pixels",
             [](const LabeledDataset& d, int i) { return d.items.at(i).pixels; })
        .def("label", [](const LabeledDataset& d, int i) { return d.items.at(i).label; });

    m.def("generate_bas", &generate_bas, py::arg("side"), py::arg("seed") = 0);
    m.def("sample_bas", &sample_bas, py::arg("side"), py::arg("count"),
          py::arg("seed") = 0);

    py::class_<TrainedModel>(m, "TrainedModel")
        .def_readonly("best_loss", &TrainedModel::best_loss)
        .def_property_readonly("iterations",
                               [](const TrainedModel& m_) { return m_.history.size(); })
        .def_property_readonly("history", [](const TrainedModel& m_) {
            py::list out;
            for (const IterationRecord& rec : m_.history) {
                py::dict d;
                d["iter"] = rec.iter;
                d["loss"] = rec.loss;
                d["train_acc"] = rec.train_acc;
                d["test_acc"] = rec.test_acc;
                out.append(d);
            }
            return out;
        });

    m.def(
        "train",
        [](const AnsatzLayout& layout, const LabeledDataset& data, int max_iters,
           std::uint64_t seed, double a, double c, double A, int shots,
           const std::string& loss, int threads) {
            TrainingConfig cfg;
            cfg.max_iters = max_iters;
            cfg.seed = seed;
            cfg.gains.a = a;
            cfg.gains.c = c;
            cfg.gains.A = A;
            cfg.shots = shots;
            cfg.loss = loss_kind_from_string(loss);
            cfg.threads = threads;
            return train(layout, data, cfg);
        },
        py::arg("layout"), py::arg("dataset"), py::arg("max_iters") = 400,
        py::arg("seed") = 0, py::arg("a") = 10.0, py::arg("c") = 0.1,
        py::arg("A") = -1.0, py::arg("shots") = 0, py::arg("loss") = "logistic",
        py::arg("threads") = 0);

    m.def("predict_label", &predict_label, py::arg("model"), py::arg("pixels"),
          py::arg("shots") = 0, py::arg("seed") = 0);
    m.def(
        "evaluate_accuracy",
        [](const TrainedModel& model, const LabeledDataset& data, const std::string& split) {
            return evaluate_accuracy(model, data,
                                     split == "train" ? Split::Train : Split::Test);
        },
        py::arg("model"), py::arg("dataset"), py::arg("split"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    m.def(
        "tn_layout_from_text",
        [](const std::string& graph_text, const std::vector<std::string>& directions) {
            std::istringstream in(graph_text);
            TensorNetworkGraph tn = parse_tn_graph(in);
            std::vector<EdgeDirection> dirs;
            for (const std::string& d : directions)
                dirs.push_back(d == "in" ? EdgeDirection::In : EdgeDirection::Out);
            CircuitLayout layout = tn_to_circuit_layout(tn, dirs);
            std::ostringstream out;
            write_layout(out, layout);
            py::dict result;
            result["n_blocks"] = layout.n_blocks;
            result["total_qubits"] = layout.total_qubits();
            result["text"] = out.str();
            return result;
        },
        py::arg("graph_text"), py::arg("directions"),
        "Parse an adjacency-list tensor network and emit a circuit layout");

    m.def(
        "loss",
        [](const std::vector<double>& p, const std::string& kind) {
            return loss(p, loss_kind_from_string(kind));
        },
        py::arg("p_correct"), py::arg("kind") = "logistic");
    m.def("prob_correct", &prob_correct, py::arg("expval"), py::arg("label"));
}
