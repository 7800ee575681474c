#include "tncirc/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "tncirc/circuit.hpp"
#include "tncirc/statevector.hpp"

namespace tncirc {

namespace {

std::vector<double> flatten(const GrayImage& img) {
    return img.pixels;
}

bool all_black(const GrayImage& img) {
    return std::all_of(img.pixels.begin(), img.pixels.end(),
                       [](double v) { return v == 0.0; });
}

int qubits_for_window(int side) {
    int pixels = side * side;
    int n = 0;
    while ((1 << n) < pixels) ++n;
    if ((1 << n) != pixels)
        throw std::invalid_argument(
            fmt::format("window side {} does not give a power-of-two pixel count", side));
    return n;
}

}  // namespace

DetectionReport run_detection(const GrayImage& img, const WindowClassifier& stage1,
                              const WindowClassifier& stage2,
                              const WindowClassifier& stage3,
                              const DetectParams& params) {
    if (params.work_side <= 0 || params.coarse_window <= 0 || params.fine_window <= 0)
        throw std::invalid_argument("run_detection: sizes must be positive");
    if (params.work_side % params.coarse_window != 0 ||
        params.coarse_window % params.fine_window != 0)
        throw std::invalid_argument("run_detection: window sizes must nest evenly");

    DetectionReport report;
    report.black_threshold = params.black_threshold;
    report.base = center_crop_resize(img, params.work_side);
    report.highlight_mask.assign(
        static_cast<std::size_t>(params.work_side) * params.work_side, 0);

    report.stage1_defect = stage1(report.base);
    if (!report.stage1_defect) return report;

    for (const WindowView& coarse :
         sliding_windows(report.base, params.coarse_window, params.coarse_window)) {
        if (!stage2(coarse.view)) continue;
        report.stage2_boxes.push_back(
            {coarse.x, coarse.y, params.coarse_window, params.coarse_window});

        for (const WindowView& fine :
             sliding_windows(coarse.view, params.fine_window, params.fine_window)) {
            if (!stage3(fine.view)) continue;
            report.stage3_boxes.push_back({coarse.x + fine.x, coarse.y + fine.y,
                                           params.fine_window, params.fine_window});
        }
    }

    for (const Box& box : report.stage3_boxes) {
        for (int y = box.y; y < box.y + box.h; ++y) {
            for (int x = box.x; x < box.x + box.w; ++x) {
                if (report.base.at(x, y) < params.black_threshold)
                    report.highlight_mask[static_cast<std::size_t>(y) * report.base.width +
                                          x] = 1;
            }
        }
    }
    return report;
}

WindowClassifier model_classifier(const TrainedModel& model) {
    return [model](const GrayImage& window) {
        if (all_black(window)) return true;
        return predict_label(model, flatten(window)) == 1;
    };
}

DetectionReport detect(const GrayImage& img, const TrainedModel& model_coarse_full,
                       const TrainedModel& model_coarse, const TrainedModel& model_fine,
                       double black_threshold) {
    DetectParams params;
    params.black_threshold = black_threshold;

    auto check = [](const TrainedModel& model, int side, const char* stage) {
        int need = qubits_for_window(side);
        if (model.layout.n_qubits != need)
            throw std::invalid_argument(
                fmt::format("{} model has {} qubits, needs {} for {}x{} windows", stage,
                            model.layout.n_qubits, need, side, side));
    };
    check(model_coarse_full, params.work_side, "stage-1");
    check(model_coarse, params.coarse_window, "stage-2");
    check(model_fine, params.fine_window, "stage-3");

    return run_detection(img, model_classifier(model_coarse_full),
                         model_classifier(model_coarse), model_classifier(model_fine),
                         params);
}

void highlight_to_ppm(const DetectionReport& report, const std::string& path) {
    RgbImage out(report.base.width, report.base.height);
    for (std::size_t i = 0; i < report.base.pixels.size(); ++i) {
        auto gray = static_cast<std::uint8_t>(
            std::lround(std::clamp(report.base.pixels[i], 0.0, 1.0) * 255.0));
        out.pixels[i] = report.highlight_mask[i]
                            ? std::array<std::uint8_t, 3>{255, 0, 0}
                            : std::array<std::uint8_t, 3>{gray, gray, gray};
    }
    save_ppm(out, path);
}

nlohmann::json report_to_json(const DetectionReport& report) {
    auto boxes = [](const std::vector<Box>& list) {
        nlohmann::json arr = nlohmann::json::array();
        for (const Box& b : list)
            arr.push_back({{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
        return arr;
    };
    std::size_t highlighted = static_cast<std::size_t>(
        std::count(report.highlight_mask.begin(), report.highlight_mask.end(), 1));
    return nlohmann::json{{"stage1_defect", report.stage1_defect},
                          {"stage2_boxes", boxes(report.stage2_boxes)},
                          {"stage3_boxes", boxes(report.stage3_boxes)},
                          {"highlighted_pixels", highlighted},
                          {"black_threshold", report.black_threshold},
                          {"work_side", report.base.width}};
}

SyntheticSample make_synthetic_weld(int side, bool with_blob, Rng& rng,
                                    const SyntheticBlobSpec& spec) {
    if (side < 8) throw std::invalid_argument("make_synthetic_weld: side must be >= 8");

    SyntheticSample sample;
    sample.image.width = side;
    sample.image.height = side;
    sample.image.pixels.resize(static_cast<std::size_t>(side) * side);
    sample.blob_mask.assign(sample.image.pixels.size(), 0);
    for (double& p : sample.image.pixels)
        p = std::clamp(
            spec.background + rng.uniform(-spec.noise_amplitude, spec.noise_amplitude),
            0.0, 1.0);

    if (with_blob) {
        // Blob sides are specified at 256-pixel scale; shrink proportionally
        // for smaller images, keeping at least a quarter of the image side.
        auto scaled = [&](int v) { return std::max(2, v * side / 256); };
        int lo = scaled(spec.min_blob_side);
        int hi = std::max(lo, scaled(spec.max_blob_side));
        int bw = lo + static_cast<int>(rng.uniform_int(hi - lo + 1));
        int bh = lo + static_cast<int>(rng.uniform_int(hi - lo + 1));
        // Center constrained to the middle half of the image.
        int cx = side / 4 + static_cast<int>(rng.uniform_int(std::max(1, side / 2)));
        int cy = side / 4 + static_cast<int>(rng.uniform_int(std::max(1, side / 2)));
        int x0 = std::clamp(cx - bw / 2, 0, side - bw);
        int y0 = std::clamp(cy - bh / 2, 0, side - bh);
        sample.blob = {x0, y0, bw, bh};
        for (int y = y0; y < y0 + bh; ++y) {
            for (int x = x0; x < x0 + bw; ++x) {
                sample.image.pixels[static_cast<std::size_t>(y) * side + x] = 0.0;
                sample.blob_mask[static_cast<std::size_t>(y) * side + x] = 1;
            }
        }
    }
    return sample;
}

LabeledDataset synthetic_image_dataset(int side, int count, std::uint64_t seed,
                                       const SyntheticBlobSpec& spec) {
    if (count < 4 || count % 2 != 0)
        throw std::invalid_argument("synthetic_image_dataset: count must be even, >= 4");
    Rng rng(seed);
    LabeledDataset dataset;
    for (int i = 0; i < count; ++i) {
        bool with_blob = i % 2 == 0;
        SyntheticSample sample = make_synthetic_weld(side, with_blob, rng, spec);
        dataset.items.push_back({std::move(sample.image.pixels), with_blob ? 1 : 0});
    }
    stratified_split(dataset, rng.raw());
    return dataset;
}

LabeledDataset synthetic_window_dataset(int image_side, int window, int count,
                                        double min_defect_fraction, std::uint64_t seed,
                                        const SyntheticBlobSpec& spec) {
    if (count < 4 || count % 2 != 0)
        throw std::invalid_argument("synthetic_window_dataset: count must be even, >= 4");
    if (window <= 0 || image_side % window != 0)
        throw std::invalid_argument(
            "synthetic_window_dataset: window must divide image side");
    if (min_defect_fraction <= 0.0 || min_defect_fraction > 1.0)
        throw std::invalid_argument(
            "synthetic_window_dataset: min_defect_fraction must be in (0, 1]");

    Rng rng(seed);
    std::vector<LabeledItem> pool[2];
    int per_class = count / 2;
    int window_area = window * window;
    // Oversample images until both classes have enough windows; windows with
    // a sub-threshold but nonzero blob share are ambiguous and dropped, as
    // are all-black ones (those never reach a model at detection time).
    // Every window along one blob edge shares the same coverage pattern, so a
    // single image only exhibits a handful of distinct defect shapes. Capping
    // the per-image contribution forces the pool to mix edge offsets from many
    // independent blobs, which is what lets a trained classifier generalize.
    int per_image_cap = std::max(2, per_class / 16);
    while (static_cast<int>(pool[0].size()) < per_class ||
           static_cast<int>(pool[1].size()) < per_class) {
        SyntheticSample sample = make_synthetic_weld(image_side, true, rng, spec);
        std::vector<WindowView> views = sliding_windows(sample.image, window, window);
        std::vector<int> order(views.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        rng.shuffle(order);
        int taken[2] = {0, 0};
        for (int idx : order) {
            const WindowView& wv = views[idx];
            int blob_pixels = 0;
            for (int y = 0; y < window; ++y)
                for (int x = 0; x < window; ++x)
                    blob_pixels += sample.blob_mask[static_cast<std::size_t>(wv.y + y) *
                                                        image_side +
                                                    (wv.x + x)];
            int label;
            if (blob_pixels == 0)
                label = 0;
            else if (blob_pixels >= min_defect_fraction * window_area &&
                     blob_pixels < window_area)
                label = 1;
            else
                continue;
            if (taken[label] >= per_image_cap) continue;
            if (static_cast<int>(pool[label].size()) >= per_class) continue;
            pool[label].push_back({flatten(wv.view), label});
            ++taken[label];
        }
    }

    LabeledDataset dataset;
    for (int label : {0, 1})
        for (auto& item : pool[label]) dataset.items.push_back(std::move(item));
    stratified_split(dataset, rng.raw());
    return dataset;
}

// --- pipeline training --------------------------------------------------------

namespace {

// All level-0 rotations set to RY(-pi/2), everything else zero. Level-0
// blocks then map the near-uniform state of a clean plate to |0..0> (RY(-pi/2)
// sends |+> to |0> and the entangler ring fixes |0..0>), and the zeroed upper
// levels leave it there, so the state reaching the top block encodes the
// image's deviation from a flat plate.
ParamVector flat_plate_init(const AnsatzLayout& layout) {
    ParamVector p = ParamVector::zeros(layout);
    const int level0 = layout.n_qubits / layout.block.n_block_qubits;
    for (int blk = 0; blk < level0; ++blk)
        for (int q = 0; q < layout.block.n_block_qubits; ++q)
            p.at(blk, 0, q, 1) = -M_PI / 2;
    return p;
}

// The circuit below the top block, with the given parameters bound.
Circuit below_top_block(const AnsatzLayout& layout, const ParamVector& params) {
    Circuit lower(layout.n_qubits);
    const int ppb = layout.block.params_per_block();
    for (int blk = 0; blk + 1 < layout.n_blocks(); ++blk) {
        std::vector<double> slice(params.values.begin() + blk * ppb,
                                  params.values.begin() + (blk + 1) * ppb);
        for (const Gate& g : sel_block(layout.block, layout.block_wires[blk], slice))
            lower.add(g);
    }
    return lower;
}

// Exact reduced density matrix of the top-block qubits for one image, with
// the lower blocks frozen. Row/column index packs the top-block wires in
// block order, first wire most significant.
Eigen::MatrixXcd top_block_density(const AnsatzLayout& layout, const Circuit& lower,
                                   const std::vector<double>& pixels) {
    const std::vector<int>& top = layout.block_wires.back();
    const int b = static_cast<int>(top.size());
    const int n = layout.n_qubits;
    const int local_dim = 1 << b;

    Statevector state = amplitude_encode(pixels, n);
    for (const Gate& g : lower.gates()) apply_gate(state, g);

    Eigen::MatrixXcd coeff(local_dim, state.dim() >> b);
    for (std::size_t idx = 0; idx < state.dim(); ++idx) {
        int local = 0, rest = 0, rest_bit = 0;
        for (int w = 0; w < n; ++w) {
            const int bit = static_cast<int>(idx >> (n - 1 - w)) & 1;
            const auto pos = std::find(top.begin(), top.end(), w);
            if (pos != top.end())
                local |= bit << (b - 1 - static_cast<int>(pos - top.begin()));
            else
                rest |= bit << rest_bit++;
        }
        coeff(local, rest) = state.amps[idx];
    }
    return coeff * coeff.adjoint();
}

// Unitary of one ansatz block on its own qubits, first wire most significant.
Eigen::MatrixXcd block_unitary(const BlockSpec& spec, const std::vector<double>& slice) {
    const int b = spec.n_block_qubits;
    const int dim = 1 << b;
    std::vector<int> wires(b);
    std::iota(wires.begin(), wires.end(), 0);
    const std::vector<Gate> gates = sel_block(spec, wires, slice);

    Eigen::MatrixXcd u(dim, dim);
    for (int col = 0; col < dim; ++col) {
        Statevector st = Statevector::zero_state(b);
        st.amps.assign(st.amps.size(), cdouble(0.0));
        st.amps[col] = cdouble(1.0);
        for (const Gate& g : gates) apply_gate(st, g);
        for (int row = 0; row < dim; ++row) u(row, col) = st.amps[row];
    }
    return u;
}

// Soft minimum (-tau * logsumexp(-m/tau)): a smooth stand-in for the worst
// case margin that still feeds gradient to every nearly-worst item.
double soft_min(const std::vector<double>& values, double tau) {
    const double lo = *std::min_element(values.begin(), values.end());
    double acc = 0.0;
    for (double v : values) acc += std::exp(-(v - lo) / tau);
    return lo - tau * std::log(acc);
}

// Adam ascent with central-difference gradients; returns the best iterate.
std::vector<double> adam_maximize(
    const std::function<double(const std::vector<double>&)>& objective,
    std::vector<double> x, int steps, double learning_rate) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8, kDelta = 1e-4;
    std::vector<double> m(x.size(), 0.0), v(x.size(), 0.0), grad(x.size(), 0.0);
    std::vector<double> best_x = x;
    double best_value = objective(x);
    for (int t = 1; t <= steps; ++t) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += kDelta;
            const double up = objective(x);
            x[i] -= 2 * kDelta;
            const double down = objective(x);
            x[i] += kDelta;
            grad[i] = (up - down) / (2 * kDelta);
        }
        const double bias1 = 1.0 - std::pow(kBeta1, t);
        const double bias2 = 1.0 - std::pow(kBeta2, t);
        for (std::size_t i = 0; i < x.size(); ++i) {
            m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
            v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
            x[i] += learning_rate * (m[i] / bias1) / (std::sqrt(v[i] / bias2) + kEps);
        }
        const double value = objective(x);
        if (value > best_value) {
            best_value = value;
            best_x = x;
        }
    }
    return best_x;
}

// Held-out score of a parameter set: correct sign count first, then the
// worst signed readout as a tie breaker.
struct SplitScore {
    int correct = 0;
    double min_margin = 0.0;

    bool operator>(const SplitScore& other) const {
        if (correct != other.correct) return correct > other.correct;
        return min_margin > other.min_margin;
    }
};

SplitScore score_on_split(const AnsatzLayout& layout, const ParamVector& params,
                          const LabeledDataset& dataset,
                          const std::vector<int>& indices) {
    SplitScore score;
    score.min_margin = 2.0;
    for (int idx : indices) {
        const LabeledItem& item = dataset.items[idx];
        const double e = model_expval(layout, params, item.pixels);
        const double margin = item.label == 0 ? e : -e;
        score.correct += margin > 0.0;
        score.min_margin = std::min(score.min_margin, margin);
    }
    return score;
}

// Packages a parameter vector as a trained model without moving it: a
// zero-iteration run records the baseline loss and keeps the parameters.
TrainedModel freeze_as_model(const AnsatzLayout& layout, const LabeledDataset& dataset,
                             TrainingConfig config, const ParamVector& params) {
    config.max_iters = 0;
    config.init_params = params.values;
    config.init_jitter = 0.0;
    return train(layout, dataset, config);
}

// Stage 1: the full-image classifier. Random-start SPSA cannot train this
// model: clean plates reduce to (nearly) one pure state at the top block, so
// almost every observable gives clean and defective images the same readout
// and the loss landscape is flat. Instead the lower blocks are frozen to the
// flat-plate map, every training image is reduced exactly to a top-block
// density matrix, and the top block alone is fitted to separate the two
// populations (restarted smooth-margin ascent). SPSA then polishes all
// blocks from that warm start, and the better parameter set on the held-out
// split is kept.
TrainedModel train_full_image_stage(const DetectionTrainingConfig& cfg,
                                    std::ostream* log) {
    const int n_qubits = qubits_for_window(cfg.work_side);
    const AnsatzLayout layout = make_ttn_layout(n_qubits, 2, BlockSpec{4, 2, 1});
    LabeledDataset dataset =
        synthetic_image_dataset(cfg.work_side, cfg.image_count, cfg.seed, cfg.blob);

    const ParamVector frozen = flat_plate_init(layout);
    const Circuit lower = below_top_block(layout, frozen);

    std::vector<Eigen::MatrixXcd> densities;
    std::vector<double> signs;
    densities.reserve(dataset.train_indices.size());
    for (int idx : dataset.train_indices) {
        densities.push_back(
            top_block_density(layout, lower, dataset.items[idx].pixels));
        signs.push_back(dataset.items[idx].label == 0 ? 1.0 : -1.0);
    }

    // Readout on the top block: Z on its last wire, which is the global
    // measured wire, i.e. the least significant local index bit.
    const int top_dim = 1 << layout.block.n_block_qubits;
    Eigen::VectorXd z_diag(top_dim);
    for (int k = 0; k < top_dim; ++k) z_diag(k) = (k & 1) ? -1.0 : 1.0;

    std::vector<double> margins(densities.size());
    const auto objective = [&](const std::vector<double>& slice) {
        const Eigen::MatrixXcd u = block_unitary(layout.block, slice);
        const Eigen::MatrixXcd observable =
            u.adjoint() * z_diag.asDiagonal().toDenseMatrix().cast<cdouble>() * u;
        for (std::size_t i = 0; i < densities.size(); ++i) {
            const double e = (observable * densities[i]).trace().real();
            margins[i] = signs[i] * e;
        }
        return soft_min(margins, 0.01);
    };

    const int n_slice = layout.block.params_per_block();
    Rng restart_rng(cfg.seed ^ 0x5e1fd1dULL);
    std::vector<double> best_slice;
    double best_value = -2.0;
    for (int r = 0; r < cfg.stage1_restarts; ++r) {
        std::vector<double> slice(n_slice);
        for (double& s : slice) s = restart_rng.uniform(-M_PI, M_PI);
        slice = adam_maximize(objective, std::move(slice), 220, 0.05);
        const double value = objective(slice);
        if (value > best_value) {
            best_value = value;
            best_slice = std::move(slice);
        }
    }
    best_slice = adam_maximize(objective, std::move(best_slice), 250, 0.015);
    best_value = objective(best_slice);
    if (log)
        *log << fmt::format("stage 1: top-block fit margin {:+.4f} on {} reduced states\n",
                            best_value, densities.size());

    ParamVector warm = frozen;
    const int top_block = layout.n_blocks() - 1;
    for (int k = 0; k < n_slice; ++k)
        warm.values[top_block * n_slice + k] = best_slice[k];

    TrainingConfig polish;
    polish.max_iters = cfg.stage1_polish_iters;
    polish.gains = SpsaGains{0.05, 0.02, -1.0, 0.602, 0.101};
    polish.seed = cfg.seed;
    polish.loss = LossKind::Logistic;
    polish.init_params = warm.values;
    TrainedModel polished = train(layout, dataset, polish);

    const SplitScore warm_score =
        score_on_split(layout, warm, dataset, dataset.test_indices);
    const SplitScore polished_score =
        score_on_split(layout, polished.params, dataset, dataset.test_indices);
    if (log)
        *log << fmt::format(
            "stage 1: held-out warm {}/{} (margin {:+.4f}), polished {}/{} (margin {:+.4f})\n",
            warm_score.correct, dataset.test_indices.size(), warm_score.min_margin,
            polished_score.correct, dataset.test_indices.size(),
            polished_score.min_margin);
    if (warm_score > polished_score)
        return freeze_as_model(layout, dataset, polish, warm);
    return polished;
}

// Stages 2 and 3: plain SPSA on window datasets, best of a few seeds by
// held-out accuracy (ties broken by training loss).
TrainedModel train_window_stage(const DetectionTrainingConfig& cfg, int window,
                                int count, int iters, int block_layers,
                                std::uint64_t data_seed, const char* tag,
                                std::ostream* log) {
    const int n_qubits = qubits_for_window(window);
    LabeledDataset dataset = synthetic_window_dataset(
        cfg.work_side, window, count, cfg.min_defect_fraction, data_seed, cfg.blob);
    const AnsatzLayout layout =
        make_ttn_layout(n_qubits, 1, BlockSpec{2, block_layers, 1});

    std::optional<TrainedModel> best;
    double best_acc = -1.0;
    for (int candidate = 0; candidate < std::max(1, cfg.window_candidates);
         ++candidate) {
        TrainingConfig tc;
        tc.max_iters = iters;
        tc.gains = SpsaGains{10.0, 0.1, -1.0, 0.602, 0.101};
        tc.seed = cfg.seed + candidate;
        tc.loss = LossKind::Logistic;
        TrainedModel model = train(layout, dataset, tc);
        const double acc = evaluate_accuracy(model, dataset, Split::Test);
        if (log)
            *log << fmt::format("{}: candidate {} held-out acc {:.3f} (loss {:.4f})\n",
                                tag, candidate, acc, model.best_loss);
        if (acc > best_acc ||
            (acc == best_acc && model.best_loss < best->best_loss)) {
            best_acc = acc;
            best = std::move(model);
        }
    }
    return std::move(*best);
}

}  // namespace

DetectionModelSet train_detection_models(const DetectionTrainingConfig& cfg,
                                         std::ostream* log) {
    if (cfg.image_count < 4)
        throw std::invalid_argument("train_detection_models: need at least 4 images");
    if (cfg.stage1_restarts < 1 || cfg.stage1_polish_iters < 0)
        throw std::invalid_argument("train_detection_models: bad stage-1 budget");

    DetectionModelSet set;
    set.full = train_full_image_stage(cfg, log);
    set.coarse = train_window_stage(cfg, 16, cfg.stage2_window_count, cfg.stage2_iters,
                                    2, cfg.seed + 101, "stage 2", log);
    set.fine = train_window_stage(cfg, 4, cfg.stage3_window_count, cfg.stage3_iters,
                                  4, cfg.seed + 202, "stage 3", log);
    return set;
}

DetectionReport detect(const GrayImage& img, const DetectionModelSet& models,
                       double black_threshold) {
    return detect(img, models.full, models.coarse, models.fine, black_threshold);
}

}  // namespace tncirc
