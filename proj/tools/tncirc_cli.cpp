#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "tncirc/ansatz.hpp"
#include "tncirc/bas.hpp"
#include "tncirc/cutting.hpp"
#include "tncirc/detect.hpp"
#include "tncirc/image.hpp"
#include "tncirc/mlpipe.hpp"
#include "tncirc/tn_graph.hpp"

namespace fs = std::filesystem;
using namespace tncirc;

namespace {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
    out << content;
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(csv);
    while (std::getline(in, item, ',')) parts.push_back(item);
    return parts;
}

AnsatzLayout make_layout(const std::string& kind, int n, int nv, int block_qubits,
                         int layers) {
    BlockSpec block;
    block.n_layers = layers;
    if (ansatz_kind_from_string(kind) == AnsatzKind::Ttn) {
        block.n_block_qubits = 2 * nv;
        return make_ttn_layout(n, nv, block);
    }
    block.n_block_qubits = block_qubits;
    return make_mps_layout(n, nv, block);
}

// --- bas-gen -----------------------------------------------------------------

struct BasGenArgs {
    int size = 4;
    std::uint64_t seed = 0;
    std::string out_dir;
};

void run_bas_gen(const BasGenArgs& args) {
    LabeledDataset data = generate_bas(args.size, args.seed);
    fs::create_directories(args.out_dir);
    std::string manifest;
    for (std::size_t i = 0; i < data.items.size(); ++i) {
        std::string name = fmt::format("bas_{:04}.pgm", i);
        save_pgm(bas_image(data.items[i], args.size),
                 (fs::path(args.out_dir) / name).string());
        manifest += fmt::format("{}\t{}\n", name, data.items[i].label);
    }
    write_text_file((fs::path(args.out_dir) / "labels.tsv").string(), manifest);
    std::cout << fmt::format("wrote {} images to {}\n", data.items.size(), args.out_dir);
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
    std::string layout = "ttn";
    int n = 4;
    int nv = 1;
    int layers = 2;
    int block_qubits = 2;
    std::string data_dir;
    int iters = 400;
    std::uint64_t seed = 0;
    double a = 10.0, c = 0.1, A = -1.0;
    int shots = 0;
    std::string loss = "logistic";
    int threads = 0;
    std::string out_path = "model.json";
    std::string metrics_path;  // default: <out>.metrics.jsonl
};

LabeledDataset load_labeled_dir(const std::string& dir, std::uint64_t split_seed) {
    std::ifstream manifest(fs::path(dir) / "labels.tsv");
    if (!manifest)
        throw std::invalid_argument(fmt::format("no labels.tsv in '{}'", dir));
    LabeledDataset data;
    std::string line;
    int line_no = 0;
    while (std::getline(manifest, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string name;
        int label = -1;
        if (!(fields >> name >> label) || (label != 0 && label != 1))
            throw std::invalid_argument(
                fmt::format("labels.tsv line {}: expected 'file<TAB>label'", line_no));
        GrayImage img = load_pgm((fs::path(dir) / name).string());
        data.items.push_back({std::move(img.pixels), label});
    }
    stratified_split(data, split_seed);
    return data;
}

void run_train(const TrainArgs& args) {
    AnsatzLayout layout =
        make_layout(args.layout, args.n, args.nv, args.block_qubits, args.layers);
    LabeledDataset data = load_labeled_dir(args.data_dir, args.seed);

    TrainingConfig cfg;
    cfg.max_iters = args.iters;
    cfg.seed = args.seed;
    cfg.gains.a = args.a;
    cfg.gains.c = args.c;
    cfg.gains.A = args.A;
    cfg.shots = args.shots;
    cfg.loss = loss_kind_from_string(args.loss);
    cfg.threads = args.threads;

    TrainedModel model = train(layout, data, cfg);
    save_model(model, args.out_path);

    std::string metrics;
    for (const IterationRecord& rec : model.history) metrics += metrics_line(rec) + "\n";
    const std::string metrics_path =
        args.metrics_path.empty() ? args.out_path + ".metrics.jsonl" : args.metrics_path;
    write_text_file(metrics_path, metrics);

    std::cout << fmt::format(
        "trained {} blocks, best loss {:.6f}, train acc {:.3f}, test acc {:.3f}\n",
        layout.n_blocks(), model.best_loss,
        evaluate_accuracy(model, data, Split::Train),
        evaluate_accuracy(model, data, Split::Test));
}

// --- cut-run -----------------------------------------------------------------

struct CutRunArgs {
    std::string layout = "mps";
    int n = 8;
    int nv = 1;
    int block_qubits = 2;
    int layers = 2;
    std::uint64_t seed = 0;
    int shots = 0;
    int threads = 0;
    std::string out_path;  // empty: stdout
};

nlohmann::json report_json(const CutRunReport& report) {
    nlohmann::json j{{"kind", to_string(report.kind)},
                     {"n", report.n},
                     {"n_V", report.n_V},
                     {"b", report.b},
                     {"n_fragments", report.n_fragments},
                     {"n_configs", report.n_configs},
                     {"expval_cut", report.expval_cut},
                     {"wall_time_ms", report.wall_time_ms}};
    if (report.expval_uncut) {
        j["expval_uncut"] = *report.expval_uncut;
        j["max_abs_error"] = report.max_abs_error;
    }
    return j;
}

void run_cut_run(const CutRunArgs& args) {
    AnsatzLayout layout =
        make_layout(args.layout, args.n, args.nv, args.block_qubits, args.layers);
    ParamVector params = ParamVector::random(layout, args.seed);
    EvaluateOptions opts;
    opts.shots = args.shots;
    opts.seed = args.seed;
    opts.threads = args.threads;
    CutRunReport report = cut_run(layout, params, opts);
    std::string text = report_json(report).dump(2) + "\n";
    if (args.out_path.empty())
        std::cout << text;
    else
        write_text_file(args.out_path, text);
}

// --- bench -------------------------------------------------------------------

struct BenchArgs {
    std::string sweep = "bond";
    std::string out_path = "bench.csv";
    std::uint64_t seed = 0;
    int layers = 2;
};

void run_bench(const BenchArgs& args) {
    struct Point {
        int n, nv, b;
    };
    std::vector<Point> points;
    if (args.sweep == "bond") {
        for (int nv : {1, 2, 3}) points.push_back({17, nv, 5});
    } else if (args.sweep == "qubits") {
        for (int n : {9, 13, 17, 21, 25}) points.push_back({n, 1, 5});
    } else if (args.sweep == "block") {
        // Fixed ~100 qubits; the chain constraint k=(n-1)/(b-1) forces the
        // nearest valid qubit count per block size.
        for (int b : {2, 3, 5, 6, 10, 12}) {
            int k = std::max(2, (99 + (b - 1) / 2) / (b - 1));
            points.push_back({1 + k * (b - 1), 1, b});
        }
    } else {
        throw std::invalid_argument(
            fmt::format("unknown sweep '{}' (expected bond, qubits, or block)",
                        args.sweep));
    }

    std::string csv = "n,n_V,b,n_configs,ms\n";
    for (const Point& p : points) {
        BlockSpec block;
        block.n_block_qubits = p.b;
        block.n_layers = args.layers;
        AnsatzLayout layout = make_mps_layout(p.n, p.nv, block);
        ParamVector params = ParamVector::random(layout, args.seed);
        CutRunReport report = cut_run(layout, params, {});
        csv += fmt::format("{},{},{},{},{:.3f}\n", p.n, p.nv, p.b, report.n_configs,
                           report.wall_time_ms);
    }
    write_text_file(args.out_path, csv);
    std::cout << csv;
}

// --- detect ------------------------------------------------------------------

struct DetectArgs {
    std::string image_path;
    std::string models;  // m256,m16,m4
    double threshold = 0.25;
    std::string out = "report.json,highlight.ppm";
};

void run_detect(const DetectArgs& args) {
    const auto model_paths = split_list(args.models);
    if (model_paths.size() != 3)
        throw std::invalid_argument("--models needs three comma-separated paths");
    const auto out_paths = split_list(args.out);
    if (out_paths.size() != 2)
        throw std::invalid_argument("--out needs 'report.json,highlight.ppm'");
    for (const auto& p : model_paths)
        if (!fs::exists(p))
            throw std::invalid_argument(fmt::format("model file '{}' not found", p));

    TrainedModel m256 = load_model(model_paths[0]);
    TrainedModel m16 = load_model(model_paths[1]);
    TrainedModel m4 = load_model(model_paths[2]);
    GrayImage img = load_pgm(args.image_path);

    DetectionReport report = detect(img, m256, m16, m4, args.threshold);
    write_text_file(out_paths[0], report_to_json(report).dump(2) + "\n");
    highlight_to_ppm(report, out_paths[1]);
    std::cout << fmt::format("stage1_defect={} stage2={} stage3={}\n",
                             report.stage1_defect, report.stage2_boxes.size(),
                             report.stage3_boxes.size());
}

// --- tn2circ -----------------------------------------------------------------

struct Tn2CircArgs {
    std::string graph_path;
    std::string directions = "all-in";
    std::string out_path;  // empty: stdout
};

void run_tn2circ(const Tn2CircArgs& args) {
    std::ifstream in(args.graph_path);
    if (!in)
        throw std::invalid_argument(
            fmt::format("cannot open graph file '{}'", args.graph_path));
    TensorNetworkGraph tn = parse_tn_graph(in);
    const std::size_t n_open = tn.open_edges().size();

    std::vector<EdgeDirection> dirs;
    if (args.directions == "all-in") {
        dirs.assign(n_open, EdgeDirection::In);
    } else if (args.directions == "all-out") {
        dirs.assign(n_open, EdgeDirection::Out);
    } else {
        for (const std::string& token : split_list(args.directions)) {
            if (token == "in")
                dirs.push_back(EdgeDirection::In);
            else if (token == "out")
                dirs.push_back(EdgeDirection::Out);
            else
                throw std::invalid_argument(
                    fmt::format("bad direction '{}' (expected in/out)", token));
        }
        if (dirs.size() != n_open)
            throw std::invalid_argument(
                fmt::format("{} directions given but the graph has {} open edges",
                            dirs.size(), n_open));
    }

    CircuitLayout layout = tn_to_circuit_layout(tn, dirs);
    std::ostringstream text;
    write_layout(text, layout);
    if (args.out_path.empty())
        std::cout << text.str();
    else
        write_text_file(args.out_path, text.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tensor-network quantum circuit toolkit"};
    app.require_subcommand(1);
    app.allow_config_extras(CLI::config_extras_mode::error);

    auto add_config = [](CLI::App* cmd) {
        cmd->set_config("--config", "", "Read options from a key=value file");
    };

    BasGenArgs bas_args;
    CLI::App* bas_cmd = app.add_subcommand("bas-gen", "Generate a bars-and-stripes dataset");
    bas_cmd->add_option("--size", bas_args.size, "Image side length");
    bas_cmd->add_option("--seed", bas_args.seed, "Split shuffle seed");
    bas_cmd->add_option("--out", bas_args.out_dir, "Output directory")->required();
    add_config(bas_cmd);

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a classifier");
    train_cmd->add_option("--layout", train_args.layout, "mps or ttn")
        ->check(CLI::IsMember({"mps", "ttn"}));
    train_cmd->add_option("--n", train_args.n, "Total qubits");
    train_cmd->add_option("--nv", train_args.nv, "Bond qubits");
    train_cmd->add_option("--layers", train_args.layers, "Entangling layers per block");
    train_cmd->add_option("--block-qubits", train_args.block_qubits,
                          "Block width (mps only)");
    train_cmd->add_option("--data", train_args.data_dir, "Dataset directory")->required();
    train_cmd->add_option("--iters", train_args.iters, "Optimizer iterations");
    train_cmd->add_option("--seed", train_args.seed, "Split/init/optimizer seed");
    train_cmd->add_option("--a", train_args.a, "SPSA step gain");
    train_cmd->add_option("--c", train_args.c, "SPSA perturbation gain");
    train_cmd->add_option("--A", train_args.A, "SPSA stability constant (<0: auto)");
    train_cmd->add_option("--shots", train_args.shots, "Shots per evaluation (0: exact)");
    train_cmd->add_option("--loss", train_args.loss, "logistic or cross_entropy")
        ->check(CLI::IsMember({"logistic", "cross_entropy"}));
    train_cmd->add_option("--threads", train_args.threads, "Worker threads (0: auto)");
    train_cmd->add_option("--out", train_args.out_path, "Model checkpoint path");
    train_cmd->add_option("--metrics", train_args.metrics_path,
                          "Metrics JSONL path (default <out>.metrics.jsonl)");
    add_config(train_cmd);

    CutRunArgs cut_args;
    CLI::App* cut_cmd = app.add_subcommand("cut-run", "Cut, evaluate, and reconstruct");
    cut_cmd->add_option("--layout", cut_args.layout, "mps or ttn")
        ->check(CLI::IsMember({"mps", "ttn"}));
    cut_cmd->add_option("--n", cut_args.n, "Total qubits");
    cut_cmd->add_option("--nv", cut_args.nv, "Bond qubits");
    cut_cmd->add_option("--block-qubits", cut_args.block_qubits, "Block width (mps)");
    cut_cmd->add_option("--layers", cut_args.layers, "Entangling layers per block");
    cut_cmd->add_option("--seed", cut_args.seed, "Parameter seed");
    cut_cmd->add_option("--shots", cut_args.shots, "Shots per fragment config (0: exact)");
    cut_cmd->add_option("--threads", cut_args.threads, "Worker threads (0: auto)");
    cut_cmd->add_option("--out", cut_args.out_path, "Report path (default stdout)");
    add_config(cut_cmd);

    BenchArgs bench_args;
    CLI::App* bench_cmd = app.add_subcommand("bench", "Sweep cut-run scaling");
    bench_cmd->add_option("--sweep", bench_args.sweep, "bond, qubits, or block")
        ->check(CLI::IsMember({"bond", "qubits", "block"}));
    bench_cmd->add_option("--out", bench_args.out_path, "CSV output path");
    bench_cmd->add_option("--seed", bench_args.seed, "Parameter seed");
    bench_cmd->add_option("--layers", bench_args.layers, "Entangling layers per block");
    add_config(bench_cmd);

    DetectArgs detect_args;
    CLI::App* detect_cmd = app.add_subcommand("detect", "Run the defect detection pipeline");
    detect_cmd->add_option("--image", detect_args.image_path, "Input PGM")->required();
    detect_cmd->add_option("--models", detect_args.models,
                           "Three model paths: full,coarse,fine")->required();
    detect_cmd->add_option("--threshold", detect_args.threshold, "Dark-pixel threshold");
    detect_cmd->add_option("--out", detect_args.out, "report.json,highlight.ppm");
    add_config(detect_cmd);

    Tn2CircArgs tn_args;
    CLI::App* tn_cmd = app.add_subcommand("tn2circ", "Tensor network to circuit layout");
    tn_cmd->add_option("--graph", tn_args.graph_path, "Adjacency-list file")->required();
    tn_cmd->add_option("--directions", tn_args.directions,
                       "all-in, all-out, or comma list of in/out");
    tn_cmd->add_option("--out", tn_args.out_path, "Layout path (default stdout)");
    add_config(tn_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (bas_cmd->parsed()) run_bas_gen(bas_args);
        if (train_cmd->parsed()) run_train(train_args);
        if (cut_cmd->parsed()) run_cut_run(cut_args);
        if (bench_cmd->parsed()) run_bench(bench_args);
        if (detect_cmd->parsed()) run_detect(detect_args);
        if (tn_cmd->parsed()) run_tn2circ(tn_args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
