#include "deepa2/errors.hpp"
#include "deepa2/generator.hpp"
#include "deepa2/importers.hpp"
#include "deepa2/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace deepa2::importers {

namespace {

void softmax(std::vector<double>& z) {
    const double top = *std::max_element(z.begin(), z.end());
    double total = 0;
    for (auto& v : z) total += (v = std::exp(v - top));
    for (auto& v : z) v /= total;
}

}  // namespace

std::vector<double> LabelClassifier::probabilities(const std::vector<double>& x) const {
    if (x.size() != mean.size())
        throw Error("expected " + std::to_string(mean.size()) + " features, got " + std::to_string(x.size()));
    std::vector<double> z(classes.size());
    for (std::size_t k = 0; k < classes.size(); ++k) {
        double s = weights[k][0];
        for (std::size_t j = 0; j < x.size(); ++j) s += weights[k][j + 1] * (x[j] - mean[j]) / scale[j];
        z[k] = s;
    }
    softmax(z);
    return z;
}

std::string LabelClassifier::predict(const std::vector<double>& x) const {
    const auto p = probabilities(x);
    return classes[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())];
}

LabelClassifier fit_label_classifier(std::span<const HoeFeatures> examples, const ClassifierOptions& options) {
    if (examples.empty()) throw Error("no training examples");
    const std::size_t dim = examples[0].values.size();
    std::map<std::string, std::size_t> counts;
    for (const auto& e : examples) {
        if (!e.label) throw Error("training example " + e.record_id + " has no label");
        if (e.values.size() != dim) throw Error("training examples differ in dimensionality");
        ++counts[*e.label];
    }
    if (counts.size() < 2) throw Error("training set has a single class");
    for (const auto& [label, n] : counts)
        if (n < 3) throw Error("class '" + label + "' has fewer than three examples");

    LabelClassifier c;
    for (const auto& [label, n] : counts) c.classes.push_back(label);
    const std::size_t k_classes = c.classes.size();
    const double n = static_cast<double>(examples.size());

    c.mean.assign(dim, 0);
    c.scale.assign(dim, 0);
    for (const auto& e : examples)
        for (std::size_t j = 0; j < dim; ++j) c.mean[j] += e.values[j] / n;
    for (const auto& e : examples)
        for (std::size_t j = 0; j < dim; ++j) c.scale[j] += (e.values[j] - c.mean[j]) * (e.values[j] - c.mean[j]) / n;
    for (auto& s : c.scale) s = s > 1e-24 ? std::sqrt(s) : 1.0;

    std::vector<std::vector<double>> xs;
    std::vector<std::size_t> ys;
    for (const auto& e : examples) {
        std::vector<double> x(dim + 1, 1.0);
        for (std::size_t j = 0; j < dim; ++j) x[j + 1] = (e.values[j] - c.mean[j]) / c.scale[j];
        xs.push_back(std::move(x));
        ys.push_back(static_cast<std::size_t>(
            std::find(c.classes.begin(), c.classes.end(), *e.label) - c.classes.begin()));
    }

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> init(0.0, 0.01);
    c.weights.assign(k_classes, std::vector<double>(dim + 1));
    for (auto& row : c.weights)
        for (auto& w : row) w = init(rng);

    std::vector<std::vector<double>> grad(k_classes, std::vector<double>(dim + 1));
    std::vector<double> z(k_classes);
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        for (auto& row : grad) std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (std::size_t k = 0; k < k_classes; ++k) {
                double s = 0;
                for (std::size_t j = 0; j <= dim; ++j) s += c.weights[k][j] * xs[i][j];
                z[k] = s;
            }
            softmax(z);
            for (std::size_t k = 0; k < k_classes; ++k) {
                const double err = z[k] - (ys[i] == k ? 1.0 : 0.0);
                for (std::size_t j = 0; j <= dim; ++j) grad[k][j] += err * xs[i][j] / n;
            }
        }
        for (std::size_t k = 0; k < k_classes; ++k)
            for (std::size_t j = 0; j <= dim; ++j) {
                const double reg = j == 0 ? 0.0 : options.l2 * c.weights[k][j];
                c.weights[k][j] -= options.learning_rate * (grad[k][j] + reg);
            }
    }
    return c;
}

std::string apply_label_classifier(const LabelClassifier& classifier, const HoeFeatures& features) {
    return classifier.predict(features.values);
}

double accuracy(const LabelClassifier& classifier, std::span<const HoeFeatures> examples) {
    if (examples.empty()) throw Error("accuracy of an empty set");
    std::size_t hits = 0;
    for (const auto& e : examples) {
        if (!e.label) throw Error("example " + e.record_id + " has no label");
        hits += classifier.predict(e.values) == *e.label;
    }
    return static_cast<double>(hits) / static_cast<double>(examples.size());
}

std::vector<HoeFeatures> synthetic_hoe_dataset(const SyntheticHoeOptions& options) {
    if (options.corruption.size() < 2) throw Error("need at least two labels");
    if (options.chain_ids.size() < 2) throw Error("higher-order evidence needs at least two chains");
    auto config = generator::GeneratorConfig::preset("AAAC02");
    config.seed = options.seed;
    const auto corpus = generator::generate_corpus(config, options.n_records, options.jobs);

    std::vector<std::string> labels;
    for (const auto& [label, rate] : options.corruption) labels.push_back(label);

    std::vector<HoeFeatures> out(corpus.size());
    for (std::size_t l = 0; l < labels.size(); ++l) {
        std::vector<std::size_t> members;
        std::vector<DeepA2Record> subset;
        for (std::size_t i = l; i < corpus.size(); i += labels.size()) {
            members.push_back(i);
            subset.push_back(corpus[i]);
        }
        if (subset.empty()) continue;
        model::NoisyOracleBackend backend(subset, options.corruption.at(labels[l]), options.seed * 31 + l);
        chains::RunOptions run;
        run.chain_ids = options.chain_ids;
        run.jobs = options.jobs;
        const auto results = chains::run_corpus(subset, backend, run);
        const std::size_t per = options.chain_ids.size();
        for (std::size_t m = 0; m < subset.size(); ++m) {
            std::vector<metrics::MetricReport> reports;
            for (std::size_t c = 0; c < per; ++c)
                reports.push_back(chains::evaluate_result(results[m * per + c], subset[m]));
            auto features = extract_hoe_features(std::span(results).subspan(m * per, per), reports);
            features.label = labels[l];
            out[members[m]] = std::move(features);
        }
    }
    return out;
}

std::vector<HoeFeatures> shuffle_labels(std::vector<HoeFeatures> examples, std::uint64_t seed) {
    std::vector<std::optional<std::string>> labels;
    for (const auto& e : examples) labels.push_back(e.label);
    std::mt19937_64 rng(seed);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t i = 0; i < examples.size(); ++i) examples[i].label = labels[i];
    return examples;
}

}  // namespace deepa2::importers
