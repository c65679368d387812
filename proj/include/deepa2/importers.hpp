#pragma once

#include "deepa2/chains.hpp"
#include "deepa2/core.hpp"
#include "deepa2/metrics.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deepa2::importers {

struct EntailmentStep {
    std::vector<std::string> from;  // sentence or intermediate ids
    std::string to;                 // an intermediate id or "hypothesis"
};

// One entailment-tree record. Sentence ids look like "sent3", intermediate
// ids like "int1"; the proof ends in "hypothesis".
struct EntailmentTreeRecord {
    std::string id;
    // Theory sentences in presentation order, distractors included.
    std::vector<std::pair<std::string, std::string>> sentences;
    std::vector<std::string> distractors;
    std::string hypothesis;
    std::map<std::string, std::string> intermediates;
    std::vector<EntailmentStep> proof;
};

// Parses a proof string such as "sent1 & sent3 -> int1: text; int1 & sent2 ->
// hypothesis;". Intermediate texts given inline are stored in `intermediates`.
// Throws ImportError.
std::vector<EntailmentStep> parse_proof(std::string_view proof, std::map<std::string, std::string>* intermediates = nullptr);

// Accepts the usual JSON-lines layout: "id", "hypothesis", "proof", and the
// sentences either in "meta.triples" or in a "context" string of the form
// "sent1: ... sent2: ...". Distractor ids come from "meta.distractors",
// intermediate texts from "meta.intermediate_conclusions". Throws ImportError.
EntailmentTreeRecord parse_entailment_record(std::string_view json_line);

// S is the theory followed by " All this entails: " and the hypothesis. A has
// one step per proof step, without scheme names. R quotes the sentences the
// proof uses, J the hypothesis. F, O and K stay absent. Throws ImportError for
// a proof that names an unknown id, derives something twice, or is not a
// single tree rooted in the hypothesis.
DeepA2Record import_entailmentbank(const EntailmentTreeRecord& rec);

enum class Label { Valid, Contradiction, Neutral };

std::string_view label_name(Label l);
// "valid", "contradiction", "neutral", plus the answer spellings "true",
// "false" and "unknown". Case-insensitive. Throws ImportError.
Label parse_label(std::string_view s);

struct RuleTakerRecord {
    std::string id;
    std::vector<std::string> theory;
    std::string hypothesis;
    Label label = Label::Neutral;
};

// JSON with "id", "theory" (string or list of sentences) or "context",
// "hypothesis" or "question", and "label" or "answer". Throws ImportError.
RuleTakerRecord parse_ruletaker_record(std::string_view json_line);

// Only S is set; the label goes to meta.label.
DeepA2Record import_ruletaker(const RuleTakerRecord& rec);

// ---------------------------------------------------------------------------
// Higher-order evidence

// Per-chain metrics in the feature vector, in this order.
inline constexpr std::array<std::string_view, 6> kHoeChainMetrics{"sys_val", "sys_flaws", "sys_sch",
                                                                  "exe_meq", "exe_rss",   "exe_jss"};
inline constexpr std::string_view kHoeLayoutVersion = "hoe-v1";

struct HoeFeatures {
    std::string record_id;
    std::vector<int> chain_ids;
    // 6 values per chain in chain-id order, then the agreement rate.
    std::vector<double> values;
    std::optional<std::string> label;
};

// Feature names matching HoeFeatures::values, e.g. "c1.sys_val", ...,
// "agreement".
std::vector<std::string> hoe_feature_names(std::vector<int> chain_ids);

// Final conclusion a chain arrived at: the last statement of its argdown
// output, or its conclusion output when A does not parse, or "".
std::string final_conclusion_text(const chains::ChainResult& result);

// `results[i]` and `reports[i]` belong together; all must concern one record.
// sys_flaws is the mean of the four basic flaw bits. The agreement rate is the
// mean pairwise default-scorer similarity of the chains' final conclusions.
// Throws Error for fewer than two chains, mismatched inputs, repeated chains
// or mixed records.
HoeFeatures extract_hoe_features(std::span<const chains::ChainResult> results,
                                 std::span<const metrics::MetricReport> reports);

struct ClassifierOptions {
    int epochs = 400;
    double learning_rate = 0.5;
    double l2 = 1e-3;
    std::uint64_t seed = 0;
};

// Multinomial logistic regression on standardized features.
struct LabelClassifier {
    std::vector<std::string> classes;
    std::vector<double> mean, scale;
    // One row per class: bias, then one weight per feature.
    std::vector<std::vector<double>> weights;

    std::vector<double> probabilities(const std::vector<double>& x) const;
    std::string predict(const std::vector<double>& x) const;
};

// Full-batch gradient descent from a seeded random start. Throws Error when an
// example is unlabeled, the dimensions disagree, only one class occurs or a
// class has fewer than three examples.
LabelClassifier fit_label_classifier(std::span<const HoeFeatures> examples, const ClassifierOptions& options = {});
std::string apply_label_classifier(const LabelClassifier& classifier, const HoeFeatures& features);
double accuracy(const LabelClassifier& classifier, std::span<const HoeFeatures> examples);

// Labeled features for the higher-order-evidence experiment without external
// data: generated records get labels in turn, and each label's chains run
// against a noisy oracle with that label's corruption rate.
struct SyntheticHoeOptions {
    std::size_t n_records = 300;
    std::uint64_t seed = 0;
    std::vector<int> chain_ids{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
    std::map<std::string, double> corruption{{"valid", 0.1}, {"contradiction", 0.3}, {"neutral", 0.5}};
    int jobs = 1;
};

std::vector<HoeFeatures> synthetic_hoe_dataset(const SyntheticHoeOptions& options);

// Copies with labels permuted by a seeded shuffle.
std::vector<HoeFeatures> shuffle_labels(std::vector<HoeFeatures> examples, std::uint64_t seed);

}  // namespace deepa2::importers
