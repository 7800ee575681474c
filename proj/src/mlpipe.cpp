#include "tncirc/mlpipe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "tncirc/parallel.hpp"

namespace tncirc {

Statevector amplitude_encode(const std::vector<double>& pixels, int n_qubits) {
    if (n_qubits < 1 || n_qubits > 28)
        throw std::invalid_argument("encoder supports 1 to 28 qubits");
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (pixels.size() > dim)
        throw std::invalid_argument(
            fmt::format("{} pixels do not fit into {} amplitudes", pixels.size(),
                        dim));
    double norm_sq = 0;
    for (double x : pixels) norm_sq += x * x;
    if (norm_sq <= 0.0)
        throw std::invalid_argument("cannot encode an all-zero pixel vector");
    const double inv_norm = 1.0 / std::sqrt(norm_sq);

    Statevector s;
    s.n_qubits = n_qubits;
    s.amps.assign(dim, cdouble(0.0, 0.0));
    for (std::size_t i = 0; i < pixels.size(); ++i) s.amps[i] = pixels[i] * inv_norm;
    return s;
}

double prob_correct(double expval, int label) {
    if (expval < -1.0 || expval > 1.0)
        throw std::invalid_argument("expectation value must lie in [-1, 1]");
    if (label != 0 && label != 1)
        throw std::invalid_argument("label must be 0 or 1");
    return 1.0 - std::abs((1.0 - expval) / 2.0 - label);
}

std::string to_string(LossKind k) {
    return k == LossKind::Logistic ? "logistic" : "cross_entropy";
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "logistic") return LossKind::Logistic;
    if (s == "cross_entropy") return LossKind::CrossEntropy;
    throw std::invalid_argument(fmt::format("unknown loss kind '{}'", s));
}

double loss_logistic(const std::vector<double>& p_correct) {
    double acc = 0;
    for (double p : p_correct) acc += 1.0 / (1.0 + 10.0 * std::exp(7.0 * p));
    return acc;
}

double loss_cross_entropy(const std::vector<double>& p_correct) {
    double acc = 0;
    for (double p : p_correct) acc -= std::log(std::max(p, 1e-12));
    return acc;
}

double loss(const std::vector<double>& p_correct, LossKind kind) {
    return kind == LossKind::Logistic ? loss_logistic(p_correct)
                                      : loss_cross_entropy(p_correct);
}

std::vector<double> spsa_step(
    const std::vector<double>& params,
    const std::function<double(const std::vector<double>&)>& objective,
    int iteration, const SpsaGains& gains, Rng& rng) {
    if (iteration < 0) throw std::invalid_argument("iteration must be >= 0");
    const double a_k = gains.a / std::pow(iteration + 1 + gains.A, gains.alpha);
    const double c_k = gains.c / std::pow(iteration + 1.0, gains.gamma);

    std::vector<double> delta(params.size());
    for (double& d : delta) d = rng.rademacher();

    std::vector<double> plus = params, minus = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        plus[i] += c_k * delta[i];
        minus[i] -= c_k * delta[i];
    }
    const double f_plus = objective(plus);
    const double f_minus = objective(minus);
    const double scale = (f_plus - f_minus) / (2.0 * c_k);

    std::vector<double> next = params;
    for (std::size_t i = 0; i < params.size(); ++i)
        next[i] -= a_k * scale / delta[i];  // delta is +-1, so /delta == *delta
    return next;
}

void LabeledDataset::validate() const {
    for (const LabeledItem& item : items)
        if (item.label != 0 && item.label != 1)
            throw std::invalid_argument("labels must be 0 or 1");
    for (const auto* split : {&train_indices, &test_indices})
        for (int idx : *split)
            if (idx < 0 || idx >= static_cast<int>(items.size()))
                throw std::invalid_argument("split index out of range");
}

void stratified_split(LabeledDataset& dataset, std::uint64_t seed) {
    dataset.train_indices.clear();
    dataset.test_indices.clear();
    std::vector<int> order(dataset.items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<int> by_class[2];
    for (int idx : order) by_class[dataset.items[idx].label].push_back(idx);
    for (auto& cls : by_class) {
        const std::size_t half = cls.size() / 2;
        for (std::size_t i = 0; i < cls.size(); ++i)
            (i < half ? dataset.train_indices : dataset.test_indices).push_back(cls[i]);
    }
    dataset.validate();
}

SpsaGains TrainingConfig::resolved_gains() const {
    SpsaGains g = gains;
    if (g.A < 0) g.A = 0.1 * max_iters;
    return g;
}

namespace {

// Applies the bound circuit to a copy of an already-encoded state.
double expval_from_encoded(const Circuit& bound_circuit, const Statevector& encoded,
                           int measured_wire) {
    Statevector state = encoded;
    for (const Gate& g : bound_circuit.gates()) apply_gate(state, g);
    return expval_z(state, measured_wire);
}

}  // namespace

double model_expval(const AnsatzLayout& layout, const ParamVector& params,
                    const std::vector<double>& pixels) {
    const Circuit circuit = build_circuit(layout, params).without_cut_markers();
    const Statevector encoded = amplitude_encode(pixels, layout.n_qubits);
    return expval_from_encoded(circuit, encoded, layout.measured_wire);
}

TrainedModel train(const AnsatzLayout& layout, const LabeledDataset& dataset,
                   const TrainingConfig& config) {
    dataset.validate();
    if (dataset.train_indices.empty())
        throw std::invalid_argument("training split is empty");
    if (config.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
    const SpsaGains gains = config.resolved_gains();
    if (gains.a <= 0 || gains.c <= 0 || gains.A < 0)
        throw std::invalid_argument("SPSA gains must be positive");

    Rng rng(config.seed);
    ParamVector params = ParamVector::random(layout, rng.raw());
    if (config.init_params) {
        if (config.init_params->size() != params.values.size())
            throw std::invalid_argument(
                fmt::format("warm start has {} parameters, layout wants {}",
                            config.init_params->size(), params.values.size()));
        for (std::size_t i = 0; i < params.values.size(); ++i)
            params.values[i] = (*config.init_params)[i] +
                               config.init_jitter * (params.values[i] / M_PI - 1.0);
    } else if (config.init_scale >= 0.0) {
        for (double& v : params.values)
            v = config.init_scale * (v / M_PI - 1.0);  // [0,2pi) -> [-s, s)
    }

    // encode every item once; objective evaluations reuse the cached states
    std::vector<Statevector> encoded(dataset.items.size());
    for (std::size_t i = 0; i < dataset.items.size(); ++i)
        encoded[i] = amplitude_encode(dataset.items[i].pixels, layout.n_qubits);

    // expectation of every item at given parameters (deterministic: one
    // output slot per item, no shared state)
    auto all_expvals = [&](const std::vector<double>& theta,
                           std::uint64_t shot_base) {
        ParamVector pv = params;
        pv.values = theta;
        const Circuit circuit = build_circuit(layout, pv).without_cut_markers();
        std::vector<double> evals(dataset.items.size());
        parallel_for(
            dataset.items.size(),
            [&](std::size_t i) {
                if (config.shots > 0) {
                    Statevector state = encoded[i];
                    for (const Gate& g : circuit.gates()) apply_gate(state, g);
                    evals[i] = sample_expval_z(
                        state, layout.measured_wire, config.shots,
                        shot_base ^ (0x9e3779b97f4a7c15ull * (i + 1)));
                } else {
                    evals[i] =
                        expval_from_encoded(circuit, encoded[i], layout.measured_wire);
                }
            },
            config.threads);
        return evals;
    };

    auto train_loss = [&](const std::vector<double>& evals) {
        std::vector<double> p;
        p.reserve(dataset.train_indices.size());
        for (int idx : dataset.train_indices) {
            // guard against 1 + epsilon from floating-point roundoff
            const double e = std::clamp(evals[idx], -1.0, 1.0);
            p.push_back(prob_correct(e, dataset.items[idx].label));
        }
        return loss(p, config.loss);
    };
    auto accuracy = [&](const std::vector<double>& evals,
                        const std::vector<int>& split) {
        if (split.empty()) return 0.0;
        int correct = 0;
        for (int idx : split) {
            const int predicted = evals[idx] < 0.0 ? 1 : 0;
            if (predicted == dataset.items[idx].label) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(split.size());
    };

    auto objective = [&](const std::vector<double>& theta) {
        const std::uint64_t shot_base = config.shots > 0 ? rng.raw() : 0;
        return train_loss(all_expvals(theta, shot_base));
    };

    TrainedModel model;
    model.layout = layout;
    model.config = config;
    model.config.gains = gains;

    // baseline bookkeeping (exact, not part of the two-per-step SPSA budget)
    std::vector<double> evals = all_expvals(params.values, 0);
    model.best_loss = train_loss(evals);
    model.params = params;

    for (int k = 0; k < config.max_iters; ++k) {
        params.values = spsa_step(params.values, objective, k, gains, rng);
        evals = all_expvals(params.values, 0);
        IterationRecord rec;
        rec.iter = k;
        rec.loss = train_loss(evals);
        rec.train_acc = accuracy(evals, dataset.train_indices);
        rec.test_acc = accuracy(evals, dataset.test_indices);
        model.history.push_back(rec);
        if (rec.loss < model.best_loss) {
            model.best_loss = rec.loss;
            model.params = params;
        }
    }
    return model;
}

int predict_label(const TrainedModel& model, const std::vector<double>& pixels,
                  int shots, std::uint64_t seed) {
    if (shots <= 0) {
        const double e = model_expval(model.layout, model.params, pixels);
        return e < 0.0 ? 1 : 0;
    }
    const Circuit circuit =
        build_circuit(model.layout, model.params).without_cut_markers();
    Statevector state = amplitude_encode(pixels, model.layout.n_qubits);
    for (const Gate& g : circuit.gates()) apply_gate(state, g);
    const double mean =
        sample_expval_z(state, model.layout.measured_wire, shots, seed);
    return mean < 0.0 ? 1 : 0;
}

double evaluate_accuracy(const TrainedModel& model, const LabeledDataset& dataset,
                         Split split) {
    dataset.validate();
    const std::vector<int>& indices =
        split == Split::Train ? dataset.train_indices : dataset.test_indices;
    if (indices.empty()) throw std::invalid_argument("evaluation split is empty");
    int correct = 0;
    for (int idx : indices) {
        const int predicted = predict_label(model, dataset.items[idx].pixels);
        if (predicted == dataset.items[idx].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(indices.size());
}

namespace {

constexpr int kCheckpointVersion = 1;

}  // namespace

void save_model(const TrainedModel& model, const std::string& path) {
    nlohmann::json j;
    j["format_version"] = kCheckpointVersion;
    j["layout"] = {{"kind", to_string(model.layout.kind)},
                   {"n", model.layout.n_qubits},
                   {"n_V", model.layout.n_bond_qubits},
                   {"b", model.layout.block.n_block_qubits},
                   {"L", model.layout.block.n_layers}};
    j["params"] = model.params.values;
    j["seed"] = model.config.seed;
    j["config"] = {{"max_iters", model.config.max_iters},
                   {"a", model.config.gains.a},
                   {"c", model.config.gains.c},
                   {"A", model.config.resolved_gains().A},
                   {"alpha", model.config.gains.alpha},
                   {"gamma", model.config.gains.gamma},
                   {"shots", model.config.shots},
                   {"loss", to_string(model.config.loss)},
                   {"init_scale", model.config.init_scale}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
    out << j.dump(2) << "\n";
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path));
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(fmt::format("'{}' is not valid JSON: {}", path,
                                             e.what()));
    }
    try {
        if (j.at("format_version").get<int>() != kCheckpointVersion)
            throw std::runtime_error(
                fmt::format("unsupported checkpoint version {}",
                            j.at("format_version").get<int>()));
        const auto& jl = j.at("layout");
        BlockSpec block;
        block.n_block_qubits = jl.at("b").get<int>();
        block.n_layers = jl.at("L").get<int>();
        const AnsatzKind kind = ansatz_kind_from_string(jl.at("kind").get<std::string>());
        const int n = jl.at("n").get<int>();
        const int n_V = jl.at("n_V").get<int>();

        TrainedModel model;
        model.layout = kind == AnsatzKind::Mps ? make_mps_layout(n, n_V, block)
                                               : make_ttn_layout(n, n_V, block);
        model.params = ParamVector::zeros(model.layout);
        const std::vector<double> values = j.at("params").get<std::vector<double>>();
        if (static_cast<int>(values.size()) != model.params.count())
            throw std::runtime_error(
                fmt::format("checkpoint has {} parameters, layout wants {}",
                            values.size(), model.params.count()));
        model.params.values = values;

        const auto& jc = j.at("config");
        model.config.max_iters = jc.at("max_iters").get<int>();
        model.config.gains.a = jc.at("a").get<double>();
        model.config.gains.c = jc.at("c").get<double>();
        model.config.gains.A = jc.at("A").get<double>();
        model.config.gains.alpha = jc.at("alpha").get<double>();
        model.config.gains.gamma = jc.at("gamma").get<double>();
        model.config.shots = jc.at("shots").get<int>();
        model.config.loss = loss_kind_from_string(jc.at("loss").get<std::string>());
        model.config.init_scale = jc.value("init_scale", -1.0);
        model.config.seed = j.at("seed").get<std::uint64_t>();
        model.best_loss = std::numeric_limits<double>::quiet_NaN();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(
            fmt::format("checkpoint '{}' is malformed: {}", path, e.what()));
    }
}

std::string metrics_line(const IterationRecord& record) {
    nlohmann::json j;
    j["iter"] = record.iter;
    j["loss"] = record.loss;
    j["train_acc"] = record.train_acc;
    j["test_acc"] = record.test_acc;
    return j.dump();
}

}  // namespace tncirc
