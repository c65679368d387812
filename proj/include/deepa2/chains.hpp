#pragma once

#include "deepa2/core.hpp"
#include "deepa2/metrics.hpp"
#include "deepa2/model.hpp"
#include "deepa2/modes.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deepa2::chains {

// Current raw text per dimension; later modes overwrite earlier values.
using WorkDict = std::map<Dim, std::string>;

struct TraceStep {
    ModeSpec mode;
    std::map<Dim, std::string> inputs;
    std::string output;
};

struct ChainResult {
    int chain_id = 0;
    std::string record_id;
    bool with_formalization = false;
    WorkDict dict;
    std::vector<TraceStep> trace;
    // Set when the backend failed; the trace then stops at the failing step.
    std::optional<std::string> error;

    bool complete() const { return !error.has_value(); }
};

// Runs the modes of `chain` in order, then the formalization sub-chain if
// asked to. Backend failures end the run and are recorded in `error`; an input
// missing from the dictionary raises InvariantError.
ChainResult run_chain(const ChainSpec& chain, const std::string& source, model::ModelBackend& backend,
                      bool with_formalization, const std::string& record_id = "");

struct RunOptions {
    std::vector<int> chain_ids;
    bool with_formalization = true;
    int jobs = 1;
};

// Every requested chain on every record, record-major. Records are processed
// by `jobs` worker threads.
std::vector<ChainResult> run_corpus(const std::vector<DeepA2Record>& records, model::ModelBackend& backend,
                                    const RunOptions& options);

metrics::MetricReport evaluate_result(const ChainResult& result, const DeepA2Record& target,
                                      const metrics::EvalContext& ctx = {});

// Larger compares better, lexicographically.
using RankingKey = std::function<std::vector<double>(const metrics::MetricReport&)>;

// (sys_val, sum of the four basic flaw scores, sys_sch, exe_meq,
// mean of exe_rss and exe_jss). None of these needs the target record.
std::vector<double> default_ranking_key(const metrics::MetricReport& r);

struct Scored {
    const ChainResult* result = nullptr;
    const metrics::MetricReport* report = nullptr;
};

// Index of the best candidate; ties go to the earliest. Throws Error when
// `candidates` is empty.
std::size_t pool_index(std::span<const Scored> candidates, const RankingKey& key = default_ranking_key);
const ChainResult& pool(std::span<const Scored> candidates, const RankingKey& key = default_ranking_key);

struct TrainingPair {
    std::string input;
    std::string target;
    std::string mode;
};

// For every record, draws `n_per_record` modes with replacement, with
// probability proportional to the chosen weight column. Modes whose inputs or
// output the record lacks are never drawn. Throws Error for a record that
// supports no weighted mode at all.
std::vector<TrainingPair> export_training(const std::vector<DeepA2Record>& records, WeightColumn weights,
                                          int n_per_record, std::uint64_t seed);

// JSON-lines forms of traces and training pairs.
std::string result_to_json(const ChainResult& r);
ChainResult result_from_json(std::string_view line);
std::string pair_to_json(const TrainingPair& p);

}  // namespace deepa2::chains
