#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tncirc/image.hpp"
#include "tncirc/mlpipe.hpp"
#include "tncirc/rng.hpp"

namespace tncirc {

struct Box {
    int x = 0, y = 0, w = 0, h = 0;

    bool contains(int px, int py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
};

// Output of the three-stage pipeline. `base` is the 256x256 working crop all
// box coordinates refer to; `highlight_mask` marks the recolored pixels.
struct DetectionReport {
    bool stage1_defect = false;
    std::vector<Box> stage2_boxes;  // flagged coarse windows
    std::vector<Box> stage3_boxes;  // flagged fine windows, inside stage-2 boxes
    GrayImage base;
    std::vector<std::uint8_t> highlight_mask;  // 1 = recolored, per base pixel
    double black_threshold = 0.25;
};

// Window verdict used by the pipeline; true = defect. Kept as an injectable
// function so the staging logic is testable with synthetic verdicts.
using WindowClassifier = std::function<bool(const GrayImage&)>;

struct DetectParams {
    int work_side = 256;     // stage-1 crop size
    int coarse_window = 16;  // stage-2 window and stride (disjoint tiling)
    int fine_window = 4;     // stage-3 window and stride
    double black_threshold = 0.25;
};

// Pipeline core: crop/resize, classify the whole crop, then flagged coarse
// windows, then fine windows inside them; recolor dark pixels inside
// stage-3 boxes. Classifier stages run in this order and later stages are
// skipped entirely when stage 1 reports no defect.
DetectionReport run_detection(const GrayImage& img, const WindowClassifier& stage1,
                              const WindowClassifier& stage2,
                              const WindowClassifier& stage3,
                              const DetectParams& params = {});

// Wraps a trained model as a window classifier: flatten, amplitude-encode,
// read the label. An all-black window cannot be amplitude-encoded and is
// reported as defect directly (a fully dark region is the strongest defect
// signal this pipeline knows).
WindowClassifier model_classifier(const TrainedModel& model);

// Full pipeline with trained models; validates that the model input sizes
// match the stage window sizes (2^n amplitudes = side^2 pixels).
DetectionReport detect(const GrayImage& img, const TrainedModel& model_coarse_full,
                       const TrainedModel& model_coarse, const TrainedModel& model_fine,
                       double black_threshold = 0.25);

// P6 PPM: grayscale replica of the working crop with highlighted pixels in
// pure red.
void highlight_to_ppm(const DetectionReport& report, const std::string& path);

nlohmann::json report_to_json(const DetectionReport& report);

// --- synthetic data ----------------------------------------------------------

// Bright, lightly noisy background with an optional fully dark rectangular
// blob placed around the image center (defects sit centrally in the source
// imagery this mimics).
struct SyntheticBlobSpec {
    double background = 0.85;
    double noise_amplitude = 0.03;  // uniform +-amplitude around background
    // Blob sides at work_side = 256 scale. The defaults keep the defect
    // large enough that the full-image classifier stage has a detectable
    // amplitude deficit; smaller defects are the window stages' job.
    int min_blob_side = 128;
    int max_blob_side = 192;
};

struct SyntheticSample {
    GrayImage image;
    std::vector<std::uint8_t> blob_mask;  // 1 = blob pixel
    Box blob;                             // zero-size when absent
};

SyntheticSample make_synthetic_weld(int side, bool with_blob, Rng& rng,
                                    const SyntheticBlobSpec& spec = {});

// Whole-image dataset for the stage-1 classifier: half blob, half clean,
// stratified train/test split.
LabeledDataset synthetic_image_dataset(int side, int count, std::uint64_t seed,
                                       const SyntheticBlobSpec& spec = {});

// Window dataset for stage-2/3 classifiers: windows tiled from synthetic
// blob images, labeled defect when at least `min_defect_fraction` of the
// window is blob, clean when it contains no blob at all; windows in between
// are ambiguous and skipped, as are all-black windows (those are classified
// without a model). Classes are balanced by subsampling.
LabeledDataset synthetic_window_dataset(int image_side, int window, int count,
                                        double min_defect_fraction,
                                        std::uint64_t seed,
                                        const SyntheticBlobSpec& spec = {});

// --- pipeline training --------------------------------------------------------

// Data sizes and optimizer budgets for training the three stage classifiers
// on synthetic data. The defaults reach high held-out accuracy in a few
// minutes of single-core CPU time; most of that budget is the full-image
// stage, whose model sees work_side^2 amplitudes per evaluation.
struct DetectionTrainingConfig {
    int work_side = 256;  // stage-1 input side; must match detect()'s crop
    std::uint64_t seed = 2026;
    SyntheticBlobSpec blob;

    // Stage 1, full image. The top tree block is first fitted directly on
    // exactly reduced training states (restarted local search on a smooth
    // margin objective), then the whole circuit is polished with SPSA; the
    // parameter set with the better held-out score is kept.
    int image_count = 32;
    int stage1_restarts = 12;
    int stage1_polish_iters = 40;

    // Stages 2/3, coarse and fine windows: plain SPSA from several seeds,
    // selected by held-out accuracy.
    int stage2_window_count = 80;
    int stage2_iters = 400;
    int stage3_window_count = 160;
    int stage3_iters = 600;
    double min_defect_fraction = 0.25;
    int window_candidates = 2;
};

// The three classifiers detect() consumes, in pipeline order.
struct DetectionModelSet {
    TrainedModel full;    // work_side x work_side crop
    TrainedModel coarse;  // 16x16 windows
    TrainedModel fine;    // 4x4 windows
};

// Trains all three stage classifiers on synthetic datasets derived from
// `cfg.seed`. Deterministic for a fixed config; progress lines go to `log`
// when given.
DetectionModelSet train_detection_models(const DetectionTrainingConfig& cfg = {},
                                         std::ostream* log = nullptr);

DetectionReport detect(const GrayImage& img, const DetectionModelSet& models,
                       double black_threshold = 0.25);

}  // namespace tncirc
