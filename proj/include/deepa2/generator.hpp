#pragma once

#include "deepa2/core.hpp"
#include "deepa2/formula.hpp"
#include "deepa2/schemes.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace deepa2::generator {

struct Domain {
    std::string name;
    std::vector<std::string> names;
    std::vector<std::string> phrases;
};

struct DomainLexicon {
    std::string id;
    std::vector<Domain> domains;

    // Every predicate phrase of every domain.
    std::set<std::string> all_phrases() const;

    // Throws ParseError; an unreadable phrase or name is an error too.
    static DomainLexicon load(std::string_view text);
    // "AAAC01" or "AAAC02", compiled in from data/. Throws Error.
    static const DomainLexicon& builtin(std::string_view id);
};

struct TreeStep {
    std::string scheme;
    std::string variant;
    // Indices into ArgumentTree::formulas.
    std::vector<int> premises;
    int conclusion = 0;
};

// A valid argument built from catalog schemes. Node 0 is the final
// conclusion; every other node is a premise of exactly one step.
struct ArgumentTree {
    std::vector<formula::Formula> formulas;
    std::vector<TreeStep> steps;
    // Phrases for the predicate letters and names for the constants.
    SignatureKeys keys;
    std::string domain;
    bool intricate = false;

    // Nodes no step concludes, in node order.
    std::vector<int> leaves() const;
    const TreeStep* step_concluding(int node) const;
    // True for negation, composite formulas or an intricate scheme anywhere.
    bool uses_complex_schemes() const;
};

// Replaces source sentences by looser ones; must stay close to the input.
using Paraphraser = std::function<std::string(const std::string&)>;

struct GeneratorConfig {
    std::string lexicon = "AAAC01";
    // Relative weights of 1, 2, 3 and 4 inference steps.
    std::vector<double> step_weights{1, 1, 1, 1};
    // Shares of plain and mutilated presentations; the rest are mixed.
    double plain_share = 0.3;
    double mutilated_share = 0.3;
    // Mixed presentations: omission probabilities.
    double omit_premise_rate = 0.3;
    double omit_intermediate_rate = 0.4;
    double omit_final_rate = 0.15;
    // Mixed presentations: relative weights of 0, 1, 2, 3 distractors.
    std::vector<double> distractor_weights{3, 2, 2, 1};
    // At most this many sentences get an indicator word ("So", "Moreover").
    int indicator_budget = 2;
    bool paraphrase = true;
    double paraphrase_rate = 0.3;
    // Looser templates for quantified statements.
    bool imprecise = false;
    double imprecise_rate = 0.3;
    std::uint64_t seed = 0;
    // External paraphrase backend, applied after the rule table.
    Paraphraser paraphraser;

    // Defaults for the two corpus styles: AAAC02 allows imprecise renditions.
    static GeneratorConfig preset(std::string_view lexicon_id);
    // JSON object with the fields above; "preset" selects the starting point.
    // Throws Error.
    static GeneratorConfig from_json(std::string_view text);
    void validate() const;
};

struct Distractor {
    formula::Formula formula;
    SignatureKeys keys;
};

struct PresentationPlan {
    // Node ids in source order; omitted nodes are absent.
    std::vector<int> order;
    std::set<int> omitted;
    std::vector<Distractor> distractors;
    // Positions in `order` before which each distractor goes.
    std::vector<std::size_t> distractor_slots;
    int indicator_budget = 0;
    bool paraphrase = false;
    double paraphrase_rate = 0;
    Paraphraser paraphraser;
};

struct Verbalization {
    argdown::Argument argdown;
    // Statement number of each tree node.
    std::vector<int> number_of;
    // Sentence of each tree node, as it appears in A.
    std::vector<std::string> sentences;
    StatementList premises, conclusion, premises_form, conclusion_form;
    SignatureKeys keys;
};

struct SourceComposition {
    std::string source;
    StatementList reasons;
    StatementList conjectures;
    RecordMeta meta;
};

ArgumentTree sample_argument(const GeneratorConfig& config, std::mt19937_64& rng);

Verbalization verbalize_argument(const ArgumentTree& tree, const GeneratorConfig& config, std::mt19937_64& rng);

PresentationPlan sample_plan(const ArgumentTree& tree, const GeneratorConfig& config, std::mt19937_64& rng);

SourceComposition compose_source(const ArgumentTree& tree, const Verbalization& verbal, const PresentationPlan& plan,
                                 std::mt19937_64& rng);

// Checks a generated record: valid formalization, scheme ratio 1, refs closed,
// verbatim reasons and conjectures. Returns the failures.
std::vector<std::string> validate_record(const DeepA2Record& record);

// One record; `index` makes the id and the record's own random stream.
DeepA2Record generate_record(const GeneratorConfig& config, std::uint64_t index);

// `n` validated records, deterministic under config.seed. Throws
// GenerationError when more than 1% of the records cannot be generated.
std::vector<DeepA2Record> generate_corpus(const GeneratorConfig& config, std::size_t n, int jobs = 1);

// Counts of subset tags over a corpus.
std::map<Subset, std::size_t> subset_census(const std::vector<DeepA2Record>& records);

}  // namespace deepa2::generator
