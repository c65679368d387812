#include "deepa2/metrics.hpp"

#include "deepa2/errors.hpp"
#include "deepa2/formula.hpp"
#include "deepa2/text.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace deepa2::metrics {

double default_scorer(std::string_view a, std::string_view b) { return 2.0 * text::token_f1(a, b) - 1.0; }

BasicFlaws eval_basic_flaws(const argdown::Argument& arg) {
    BasicFlaws out;
    if (arg.statements.empty()) return out;
    const auto premises = argdown::premises_of(arg);
    const std::string final_text = text::normalize_ws(argdown::final_conclusion_of(arg).text);

    std::set<std::string> seen_premises;
    bool repeated_premise = false;
    bool premise_is_conclusion = false;
    for (const auto& p : premises) {
        const std::string t = text::normalize_ws(p.text);
        premise_is_conclusion = premise_is_conclusion || t == final_text;
        repeated_premise = !seen_premises.insert(t).second || repeated_premise;
    }
    std::set<std::string> seen_conclusions;
    bool repeated_conclusion = false;
    for (const auto& s : arg.statements) {
        if (!arg.is_derived(s.number)) continue;
        repeated_conclusion = !seen_conclusions.insert(text::normalize_ws(s.text)).second || repeated_conclusion;
    }
    std::set<int> used;
    for (const auto& inf : arg.inferences) used.insert(inf.from.begin(), inf.from.end());
    bool unused = false;
    for (const auto& s : arg.statements) {
        if (s.number != arg.statements.back().number && !used.count(s.number)) unused = true;
    }
    out.sys_pp = premise_is_conclusion ? 0 : 1;
    out.sys_rp = repeated_premise ? 0 : 1;
    out.sys_rc = repeated_conclusion ? 0 : 1;
    out.sys_us = unused ? 0 : 1;
    return out;
}

int eval_sys_val(const StatementList& premises_form, const StatementList& conclusion_form, std::string* diagnostic) {
    auto fail = [&](std::string msg) {
        if (diagnostic) *diagnostic = std::move(msg);
        return 0;
    };
    if (conclusion_form.size() != 1) return fail("conclusion_form must hold exactly one formula");
    std::vector<formula::Formula> premises;
    try {
        for (const auto& item : premises_form) premises.push_back(formula::parse_formula(item.text));
        const auto conclusion = formula::parse_formula(conclusion_form[0].text);
        return formula::check_entailment(premises, conclusion) ? 1 : fail("conclusion does not follow");
    } catch (const Error& e) {
        return fail(e.what());
    }
}

int eval_exe_meq(std::string_view source, const StatementList& reasons, const StatementList& conjectures) {
    const std::string src = text::normalize_ws(source);
    struct Quote {
        std::string text;
        std::size_t first;
    };
    std::vector<Quote> quotes;
    for (const auto* list : {&reasons, &conjectures}) {
        for (const auto& item : *list) {
            std::string q = text::normalize_ws(item.text);
            if (q.empty()) return 0;
            const auto pos = src.find(q);
            if (pos == std::string::npos) return 0;
            quotes.push_back({std::move(q), pos});
        }
    }
    // Source order; at equal starts the longer quote goes first.
    std::stable_sort(quotes.begin(), quotes.end(), [](const Quote& a, const Quote& b) {
        return a.first != b.first ? a.first < b.first : a.text.size() > b.text.size();
    });
    std::vector<std::pair<std::size_t, std::size_t>> taken;
    for (const auto& q : quotes) {
        bool placed = false;
        for (auto pos = q.first; pos != std::string::npos && !placed; pos = src.find(q.text, pos + 1)) {
            const std::pair span{pos, pos + q.text.size()};
            const bool overlaps = std::any_of(taken.begin(), taken.end(), [&](const auto& t) {
                return span.first < t.second && t.first < span.second;
            });
            if (!overlaps) {
                taken.push_back(span);
                placed = true;
            }
        }
        if (!placed) return 0;
    }
    return 1;
}

namespace {

double similarity_mean(const StatementList& quotes, const argdown::Argument& arg, const Scorer& scorer,
                       bool want_premises) {
    if (quotes.empty()) return 0.0;
    double sum = 0;
    int count = 0;
    std::set<int> covered;
    for (const auto& q : quotes) {
        ++count;
        const argdown::Statement* s = q.ref ? arg.statement(*q.ref) : nullptr;
        if (!s || arg.is_derived(s->number) == want_premises) {
            sum += -1.0;
            continue;
        }
        covered.insert(s->number);
        sum += std::clamp(scorer(q.text, s->text), -1.0, 1.0);
    }
    for (const auto& s : arg.statements) {
        if (arg.is_derived(s.number) == want_premises) continue;
        if (!covered.count(s.number)) {
            ++count;
            sum += -1.0;
        }
    }
    return count == 0 ? 0.0 : sum / count;
}

}  // namespace

double eval_exe_rss(const StatementList& reasons, const argdown::Argument& arg, const Scorer& scorer) {
    return similarity_mean(reasons, arg, scorer, true);
}

double eval_exe_jss(const StatementList& conjectures, const argdown::Argument& arg, const Scorer& scorer) {
    return similarity_mean(conjectures, arg, scorer, false);
}

PrF1 match_statements(const StatementList& predicted, const StatementList& target, double threshold) {
    PrF1 out;
    if (predicted.empty() && target.empty()) return {1.0, 1.0, 1.0};
    if (predicted.empty() || target.empty()) return out;
    std::vector<std::vector<std::string>> target_tokens;
    for (const auto& t : target) target_tokens.push_back(text::word_tokens(t.text));
    std::vector<bool> taken(target.size(), false);
    int matches = 0;
    for (const auto& p : predicted) {
        const auto tokens = text::word_tokens(p.text);
        double best = -1;
        std::size_t best_j = target.size();
        for (std::size_t j = 0; j < target.size(); ++j) {
            if (taken[j]) continue;
            const double f = text::token_f1(tokens, target_tokens[j]);
            if (f >= threshold && f > best) {
                best = f;
                best_j = j;
            }
        }
        if (best_j < target.size()) {
            taken[best_j] = true;
            ++matches;
        }
    }
    out.precision = static_cast<double>(matches) / static_cast<double>(predicted.size());
    out.recall = static_cast<double>(matches) / static_cast<double>(target.size());
    out.f1 = matches == 0 ? 0.0 : 2 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

double eval_exe_ppr(const StatementList& predicted, const StatementList& target, double threshold) {
    return match_statements(predicted, target, threshold).f1;
}

double eval_exe_ppj(const StatementList& predicted, const StatementList& target, double threshold) {
    return match_statements(predicted, target, threshold).f1;
}

bool predicts_explicit_conclusion(const StatementList& conjectures, const argdown::Argument& arg) {
    if (arg.statements.empty()) return false;
    const int final_number = arg.statements.back().number;
    return std::any_of(conjectures.begin(), conjectures.end(),
                       [&](const QuotedStatement& q) { return q.ref && *q.ref == final_number; });
}

double eval_exe_te(std::span<const TeItem> items) {
    if (items.empty()) throw Error("EXE-TE is undefined on an empty list");
    int tp = 0, fp = 0, fn = 0;
    for (const auto& i : items) {
        tp += i.predicted_explicit && i.target_explicit;
        fp += i.predicted_explicit && !i.target_explicit;
        fn += !i.predicted_explicit && i.target_explicit;
    }
    if (tp + fp + fn == 0) return 1.0;
    return 2.0 * tp / (2.0 * tp + fp + fn);
}

double metric_value(const MetricReport& r, std::string_view name) {
    if (name == "sys_pp") return r.sys_pp;
    if (name == "sys_rp") return r.sys_rp;
    if (name == "sys_rc") return r.sys_rc;
    if (name == "sys_us") return r.sys_us;
    if (name == "sys_sch") return r.sys_sch;
    if (name == "sys_val") return r.sys_val;
    if (name == "exe_meq") return r.exe_meq;
    if (name == "exe_rss") return r.exe_rss;
    if (name == "exe_jss") return r.exe_jss;
    if (name == "exe_ppr") return r.exe_ppr;
    if (name == "exe_ppj") return r.exe_ppj;
    if (name == "exe_te") return r.exe_te_prediction ? 1.0 : 0.0;
    throw Error("unknown metric '" + std::string(name) + "'");
}

namespace {

template <class T, class F>
std::optional<T> attempt(F&& f, std::vector<std::string>& diagnostics, std::string_view what) {
    try {
        return f();
    } catch (const std::exception& e) {
        diagnostics.push_back(std::string(what) + ": " + e.what());
        return std::nullopt;
    }
}

}  // namespace

MetricReport evaluate(const std::map<Dim, std::string>& generated, const DeepA2Record& target, const EvalContext& ctx) {
    MetricReport r;
    auto& diag = r.diagnostics;
    auto text_of = [&](Dim d) -> std::optional<std::string> {
        auto it = generated.find(d);
        if (it == generated.end()) {
            diag.push_back(std::string(keyword(d)) + ": not generated");
            return std::nullopt;
        }
        return it->second;
    };
    auto list_of = [&](Dim d) -> std::optional<StatementList> {
        auto t = text_of(d);
        if (!t) return std::nullopt;
        return attempt<StatementList>([&] { return parse_statement_list(*t); }, diag, keyword(d));
    };

    const auto arg = [&]() -> std::optional<argdown::Argument> {
        auto t = text_of(Dim::A);
        if (!t) return std::nullopt;
        return attempt<argdown::Argument>([&] { return argdown::parse_argdown(*t); }, diag, "argdown");
    }();
    const auto reasons = list_of(Dim::R);
    const auto conjectures = list_of(Dim::J);
    const auto pforms = list_of(Dim::F);
    const auto cforms = list_of(Dim::O);

    if (arg) {
        const BasicFlaws b = eval_basic_flaws(*arg);
        r.sys_pp = b.sys_pp;
        r.sys_rp = b.sys_rp;
        r.sys_rc = b.sys_rc;
        r.sys_us = b.sys_us;
        DeepA2Record forms_holder;
        forms_holder.premises_form = pforms;
        forms_holder.conclusion_form = cforms;
        const auto forms = schemes::formalization_of(forms_holder);
        r.sys_sch = schemes::sys_sch_ratio(*arg, *ctx.catalog, *ctx.book, &forms);
    }
    if (pforms && cforms) {
        std::string why;
        r.sys_val = eval_sys_val(*pforms, *cforms, &why);
        if (!why.empty()) diag.push_back("sys_val: " + why);
    }
    const std::string source = target.source.value_or(generated.count(Dim::S) ? generated.at(Dim::S) : "");
    if (reasons && conjectures) r.exe_meq = eval_exe_meq(source, *reasons, *conjectures);
    if (arg && reasons) r.exe_rss = eval_exe_rss(*reasons, *arg, ctx.scorer);
    if (arg && conjectures) r.exe_jss = eval_exe_jss(*conjectures, *arg, ctx.scorer);
    if (reasons && target.reasons) r.exe_ppr = eval_exe_ppr(*reasons, *target.reasons, ctx.match_threshold);
    if (conjectures && target.conjectures) {
        r.exe_ppj = eval_exe_ppj(*conjectures, *target.conjectures, ctx.match_threshold);
    }
    if (arg && conjectures) r.exe_te_prediction = predicts_explicit_conclusion(*conjectures, *arg);
    if (target.argdown && target.conjectures) {
        r.exe_te_target = predicts_explicit_conclusion(*target.conjectures, *target.argdown);
    } else {
        r.exe_te_target = target.meta.final_conclusion_explicit;
    }
    return r;
}

MetricReport evaluate_record(const DeepA2Record& generated, const DeepA2Record& target, const EvalContext& ctx) {
    std::map<Dim, std::string> dims;
    for (Dim d : kAllDims) {
        if (generated.has(d)) dims[d] = serialize_dimension(generated, d);
    }
    return evaluate(dims, target, ctx);
}

std::map<std::string, double> aggregate(std::span<const MetricReport> reports) {
    if (reports.empty()) throw Error("cannot aggregate an empty set of reports");
    std::map<std::string, double> out;
    std::vector<TeItem> te;
    for (const auto& r : reports) {
        for (auto name : kMetricNames)
            if (name != "exe_te") out[std::string(name)] += metric_value(r, name);
        te.push_back({r.exe_te_prediction, r.exe_te_target});
    }
    for (auto& [name, v] : out) v /= static_cast<double>(reports.size());
    out["exe_te"] = eval_exe_te(te);
    return out;
}

std::string report_to_json(const MetricReport& r) {
    nlohmann::json j = nlohmann::json::object();
    for (auto name : kMetricNames) {
        if (name == "exe_te") continue;
        j[std::string(name)] = metric_value(r, name);
    }
    j["exe_te_prediction"] = r.exe_te_prediction;
    j["exe_te_target"] = r.exe_te_target;
    if (!r.diagnostics.empty()) j["diagnostics"] = r.diagnostics;
    return j.dump();
}

}  // namespace deepa2::metrics
