// Trains the three weld-inspection stage classifiers on synthetic data,
// saves them as JSON checkpoints, and reports held-out and end-to-end
// quality on freshly generated samples. The shipped checkpoints under
// share/models/ are produced by this tool with default arguments.
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tncirc/detect.hpp"
#include "tncirc/mlpipe.hpp"

namespace fs = std::filesystem;
using namespace tncirc;

namespace {

struct HighlightStats {
    double blob_coverage = 0.0;  // recolored blob pixels / blob pixels
    double background_rate = 0.0;  // recolored background pixels / background pixels
};

HighlightStats highlight_stats(const DetectionReport& report,
                               const std::vector<std::uint8_t>& blob_mask) {
    HighlightStats stats;
    std::size_t blob = 0, blob_hit = 0, bg = 0, bg_hit = 0;
    for (std::size_t i = 0; i < blob_mask.size(); ++i) {
        if (blob_mask[i]) {
            ++blob;
            blob_hit += report.highlight_mask[i];
        } else {
            ++bg;
            bg_hit += report.highlight_mask[i];
        }
    }
    stats.blob_coverage = blob ? static_cast<double>(blob_hit) / blob : 1.0;
    stats.background_rate = bg ? static_cast<double>(bg_hit) / bg : 0.0;
    return stats;
}

double fresh_window_accuracy(const TrainedModel& model, int window, int count,
                             double min_defect_fraction, std::uint64_t seed) {
    LabeledDataset fresh =
        synthetic_window_dataset(256, window, count, min_defect_fraction, seed);
    int ok = 0;
    for (const auto& item : fresh.items)
        ok += predict_label(model, item.pixels) == item.label;
    return static_cast<double>(ok) / fresh.items.size();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Train the three-stage weld inspection models on synthetic data"};
    std::string out_dir = "share/models";
    DetectionTrainingConfig cfg;
    int eval_images = 20;
    app.add_option("--out-dir", out_dir, "directory for the JSON checkpoints");
    app.add_option("--seed", cfg.seed, "master seed for data and optimizers");
    app.add_option("--images", cfg.image_count, "stage-1 training images");
    app.add_option("--eval-images", eval_images,
                   "fresh defect images for the end-to-end report");

    try {
        app.parse(argc, argv);

        DetectionModelSet models = train_detection_models(cfg, &std::cout);

        fs::create_directories(out_dir);
        save_model(models.full, (fs::path(out_dir) / "stage1.json").string());
        save_model(models.coarse, (fs::path(out_dir) / "stage2.json").string());
        save_model(models.fine, (fs::path(out_dir) / "stage3.json").string());
        std::cout << fmt::format("saved stage1/stage2/stage3 checkpoints to {}\n",
                                 out_dir);

        // Fresh-sample report: per-stage accuracy on newly generated data,
        // then the end-to-end highlight quality the pipeline cares about.
        Rng fresh_rng(424242);
        int full_ok = 0;
        const int full_count = 20;
        for (int i = 0; i < full_count; ++i) {
            const bool with_blob = i % 2 == 1;
            SyntheticSample sample =
                make_synthetic_weld(cfg.work_side, with_blob, fresh_rng, cfg.blob);
            full_ok += predict_label(models.full, sample.image.pixels) ==
                       (with_blob ? 1 : 0);
        }
        std::cout << fmt::format(
            "fresh stage 1: {}/{} images   stage 2: {:.0f}% windows   stage 3: "
            "{:.0f}% windows\n",
            full_ok, full_count,
            100 * fresh_window_accuracy(models.coarse, 16, 40,
                                        cfg.min_defect_fraction, 777),
            100 * fresh_window_accuracy(models.fine, 4, 40, cfg.min_defect_fraction,
                                        777));

        Rng e2e_rng(31337);
        double worst_coverage = 1.0, cover_sum = 0.0, worst_bg = 0.0;
        int flagged = 0;
        for (int i = 0; i < eval_images; ++i) {
            SyntheticSample sample =
                make_synthetic_weld(cfg.work_side, true, e2e_rng, cfg.blob);
            DetectionReport report = detect(sample.image, models);
            HighlightStats stats = highlight_stats(report, sample.blob_mask);
            flagged += report.stage1_defect;
            worst_coverage = std::min(worst_coverage, stats.blob_coverage);
            worst_bg = std::max(worst_bg, stats.background_rate);
            cover_sum += stats.blob_coverage;
        }
        SyntheticSample clean =
            make_synthetic_weld(cfg.work_side, false, e2e_rng, cfg.blob);
        DetectionReport clean_report = detect(clean.image, models);
        std::cout << fmt::format(
            "end to end on {} fresh defects: flagged {}, blob coverage mean "
            "{:.1f}% min {:.1f}%, background rate max {:.2f}%\n",
            eval_images, flagged, 100 * cover_sum / eval_images,
            100 * worst_coverage, 100 * worst_bg);
        std::cout << fmt::format(
            "clean image: stage1_defect={} stage2 boxes={} highlighted={}\n",
            clean_report.stage1_defect, clean_report.stage2_boxes.size(),
            std::count(clean_report.highlight_mask.begin(),
                       clean_report.highlight_mask.end(), std::uint8_t{1}));
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
