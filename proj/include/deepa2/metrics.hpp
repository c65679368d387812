#pragma once

#include "deepa2/argdown.hpp"
#include "deepa2/core.hpp"
#include "deepa2/schemes.hpp"

#include <array>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deepa2::metrics {

// Similarity in [-1, 1]; deterministic and symmetric, maximal on identical input.
using Scorer = std::function<double(std::string_view, std::string_view)>;

// 2 * token F1 - 1 over lowercased word unigrams.
double default_scorer(std::string_view a, std::string_view b);

struct BasicFlaws {
    int sys_pp = 0;  // no premise equals the final conclusion
    int sys_rp = 0;  // no premise occurs twice
    int sys_rc = 0;  // no conclusion occurs twice
    int sys_us = 0;  // every statement but the last is used by some inference
};

BasicFlaws eval_basic_flaws(const argdown::Argument& arg);

// 1 iff every formula parses and the premises entail the single conclusion.
int eval_sys_val(const StatementList& premises_form, const StatementList& conclusion_form,
                 std::string* diagnostic = nullptr);

// 1 iff every reason and conjecture is a verbatim quote of the source and the
// quotes get pairwise disjoint spans when, in source order, each takes its
// leftmost occurrence that is still free. There is no backtracking.
int eval_exe_meq(std::string_view source, const StatementList& reasons, const StatementList& conjectures);

// Mean over: every reason (scored against the premise its ref names, -1 when
// the ref names no premise) and every premise no reason refers to (-1).
// An empty reason list gives 0.
double eval_exe_rss(const StatementList& reasons, const argdown::Argument& arg, const Scorer& scorer);
// The same for conjectures against derived statements.
double eval_exe_jss(const StatementList& conjectures, const argdown::Argument& arg, const Scorer& scorer);

struct PrF1 {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

// Greedy one-to-one matching: each prediction, in order, takes the unmatched
// target with the highest token F1 if that reaches `threshold`.
PrF1 match_statements(const StatementList& predicted, const StatementList& target, double threshold = 0.8);
double eval_exe_ppr(const StatementList& predicted, const StatementList& target, double threshold = 0.8);
double eval_exe_ppj(const StatementList& predicted, const StatementList& target, double threshold = 0.8);

// True iff some conjecture refers to the final conclusion.
bool predicts_explicit_conclusion(const StatementList& conjectures, const argdown::Argument& arg);

struct TeItem {
    bool predicted_explicit = false;
    bool target_explicit = false;
};

// Corpus-level F1 with "explicit" as the positive class. Throws Error on an
// empty list. Without any positive prediction or target the score is 1.
double eval_exe_te(std::span<const TeItem> items);

struct MetricReport {
    int sys_pp = 0, sys_rp = 0, sys_rc = 0, sys_us = 0;
    double sys_sch = 0;
    int sys_val = 0;
    int exe_meq = 0;
    double exe_rss = -1, exe_jss = -1;
    double exe_ppr = 0, exe_ppj = 0;
    bool exe_te_prediction = false;
    bool exe_te_target = false;
    std::vector<std::string> diagnostics;
};

inline constexpr std::array<std::string_view, 12> kMetricNames{
    "sys_pp", "sys_rp", "sys_rc", "sys_us", "sys_sch", "sys_val",
    "exe_meq", "exe_rss", "exe_jss", "exe_ppr", "exe_ppj", "exe_te"};

// Value of a per-record metric by name; "exe_te" gives the prediction flag.
double metric_value(const MetricReport& r, std::string_view name);

struct EvalContext {
    const schemes::SchemeCatalog* catalog = &schemes::SchemeCatalog::builtin();
    const schemes::TemplateBook* book = &schemes::TemplateBook::builtin();
    Scorer scorer = default_scorer;
    double match_threshold = 0.8;
};

// Scores raw generated dimension texts against the target record. Missing or
// unparseable dimensions give the metric's minimum and a diagnostic; nothing
// here throws.
MetricReport evaluate(const std::map<Dim, std::string>& generated, const DeepA2Record& target,
                      const EvalContext& ctx = {});

// Same, reading the generated dimensions from a complete record.
MetricReport evaluate_record(const DeepA2Record& generated, const DeepA2Record& target, const EvalContext& ctx = {});

// Corpus means of the twelve metrics keyed by name; "exe_te" is the F1 over
// all items rather than a mean. Throws Error on an empty span.
std::map<std::string, double> aggregate(std::span<const MetricReport> reports);

// Flat JSON object with the twelve metric keys plus exe_te_target.
std::string report_to_json(const MetricReport& r);

}  // namespace deepa2::metrics
