#include "deepa2/importers.hpp"

#include "deepa2/argdown.hpp"
#include "deepa2/errors.hpp"
#include "deepa2/text.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <regex>
#include <set>

#include "json.hpp"

namespace deepa2::importers {

namespace {

using json = nlohmann::json;

constexpr std::string_view kEntailsTemplate = " All this entails: ";
constexpr std::string_view kHypothesis = "hypothesis";

std::string with_period(const std::string& s) {
    if (s.empty() || s.back() == '.' || s.back() == '?' || s.back() == '!') return s;
    return s + ".";
}

std::string theory_text(const std::vector<std::string>& sentences) {
    std::vector<std::string> parts;
    for (const auto& s : sentences) parts.push_back(with_period(s));
    return text::join(parts, " ");
}

json parse_json(std::string_view line, std::string_view what) {
    try {
        auto j = json::parse(line);
        if (!j.is_object()) throw ImportError(std::string(what) + " record is not a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw ImportError(std::string(what) + " record is not JSON: " + e.what());
    }
}

std::string string_field(const json& j, std::initializer_list<const char*> names, std::string_view what) {
    for (const char* n : names)
        if (j.contains(n) && j[n].is_string()) return text::normalize_ws(j[n].get<std::string>());
    throw ImportError(std::string(what) + " record lacks \"" + *names.begin() + "\"");
}

// "sent1: text sent2: text" -> [(sent1, text), (sent2, text)].
std::vector<std::pair<std::string, std::string>> split_context(const std::string& context) {
    static const std::regex marker(R"((^|\s)(sent\d+):\s*)");
    std::vector<std::pair<std::string, std::string>> out;
    std::vector<std::pair<std::string, std::size_t>> starts;  // id, text start
    std::vector<std::size_t> marker_begin;
    for (auto it = std::sregex_iterator(context.begin(), context.end(), marker); it != std::sregex_iterator(); ++it) {
        starts.emplace_back((*it)[2].str(), static_cast<std::size_t>(it->position() + it->length()));
        marker_begin.push_back(static_cast<std::size_t>(it->position()));
    }
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const std::size_t end = i + 1 < starts.size() ? marker_begin[i + 1] : context.size();
        out.emplace_back(starts[i].first, text::trim(context.substr(starts[i].second, end - starts[i].second)));
    }
    return out;
}

}  // namespace

std::vector<EntailmentStep> parse_proof(std::string_view proof, std::map<std::string, std::string>* intermediates) {
    std::vector<EntailmentStep> steps;
    for (const auto& raw : text::split(proof, ';')) {
        const std::string part = text::trim(raw);
        if (part.empty()) continue;
        const auto arrow = part.find("->");
        if (arrow == std::string::npos) throw ImportError("proof step without '->': " + part);
        EntailmentStep step;
        for (const auto& id : text::split(part.substr(0, arrow), '&')) {
            const std::string t = text::trim(id);
            if (t.empty()) throw ImportError("empty premise id in proof step: " + part);
            step.from.push_back(t);
        }
        std::string rhs = text::trim(part.substr(arrow + 2));
        const auto colon = rhs.find(':');
        if (colon != std::string::npos) {
            const std::string conclusion = text::trim(rhs.substr(colon + 1));
            rhs = text::trim(rhs.substr(0, colon));
            if (intermediates && !conclusion.empty()) (*intermediates)[rhs] = conclusion;
        }
        if (rhs.empty()) throw ImportError("proof step without conclusion id: " + part);
        step.to = rhs;
        steps.push_back(std::move(step));
    }
    if (steps.empty()) throw ImportError("empty proof");
    return steps;
}

EntailmentTreeRecord parse_entailment_record(std::string_view line) {
    const json j = parse_json(line, "entailment");
    EntailmentTreeRecord rec;
    rec.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : "";
    rec.hypothesis = string_field(j, {"hypothesis"}, "entailment");
    const json meta = j.contains("meta") && j["meta"].is_object() ? j["meta"] : json::object();
    try {
        if (meta.contains("triples")) {
            for (auto& [k, v] : meta["triples"].items()) rec.sentences.emplace_back(k, text::normalize_ws(v.get<std::string>()));
            // Object keys come back sorted as strings; restore numeric order.
            std::stable_sort(rec.sentences.begin(), rec.sentences.end(), [](const auto& a, const auto& b) {
                auto num = [](const std::string& id) {
                    const auto d = id.find_first_of("0123456789");
                    return d == std::string::npos ? 0L : std::stol(id.substr(d));
                };
                return num(a.first) < num(b.first);
            });
        } else {
            rec.sentences = split_context(string_field(j, {"context"}, "entailment"));
        }
        if (meta.contains("distractors"))
            for (const auto& d : meta["distractors"]) rec.distractors.push_back(d.get<std::string>());
        if (meta.contains("intermediate_conclusions"))
            for (auto& [k, v] : meta["intermediate_conclusions"].items())
                rec.intermediates[k] = text::normalize_ws(v.get<std::string>());
    } catch (const json::exception& e) {
        throw ImportError("malformed entailment record " + rec.id + ": " + e.what());
    }
    if (rec.sentences.empty()) throw ImportError("entailment record " + rec.id + " has no theory sentences");
    rec.proof = parse_proof(string_field(j, {"proof"}, "entailment"), &rec.intermediates);
    return rec;
}

DeepA2Record import_entailmentbank(const EntailmentTreeRecord& rec) {
    const std::string where = "entailment record " + (rec.id.empty() ? std::string("(no id)") : rec.id);
    std::map<std::string, std::string> sentence_text;
    for (const auto& [id, t] : rec.sentences)
        if (!sentence_text.emplace(id, t).second) throw ImportError(where + ": sentence id " + id + " repeats");
    const std::set<std::string> distractors(rec.distractors.begin(), rec.distractors.end());
    for (const auto& d : distractors)
        if (!sentence_text.count(d)) throw ImportError(where + ": unknown distractor id " + d);

    std::map<std::string, const EntailmentStep*> deriving;
    for (const auto& step : rec.proof) {
        if (step.to != kHypothesis && !rec.intermediates.count(step.to))
            throw ImportError(where + ": proof derives unknown id " + step.to);
        if (!deriving.emplace(step.to, &step).second) throw ImportError(where + ": " + step.to + " is derived twice");
        for (const auto& f : step.from) {
            if (distractors.count(f)) throw ImportError(where + ": proof uses distractor " + f);
            if (!sentence_text.count(f) && !rec.intermediates.count(f))
                throw ImportError(where + ": proof refers to unknown id " + f);
        }
    }
    if (!deriving.count(std::string(kHypothesis))) throw ImportError(where + ": proof never derives the hypothesis");

    // Post-order from the hypothesis; shared nodes keep their first number.
    argdown::Argument arg;
    std::map<std::string, int> number;
    std::set<std::string> open;
    std::set<std::string> used_sentences;
    std::function<int(const std::string&)> visit = [&](const std::string& id) -> int {
        if (auto it = number.find(id); it != number.end()) return it->second;
        if (!open.insert(id).second) throw ImportError(where + ": proof is circular at " + id);
        argdown::InferenceStep inference;
        std::string statement;
        if (auto d = deriving.find(id); d != deriving.end()) {
            for (const auto& f : d->second->from) inference.from.push_back(visit(f));
            statement = id == kHypothesis ? rec.hypothesis : rec.intermediates.at(id);
        } else if (sentence_text.count(id)) {
            statement = sentence_text.at(id);
            used_sentences.insert(id);
        } else {
            throw ImportError(where + ": intermediate " + id + " is used but never derived");
        }
        const int n = static_cast<int>(arg.statements.size()) + 1;
        arg.statements.push_back({n, statement});
        number[id] = n;
        open.erase(id);
        if (deriving.count(id)) {
            inference.derives = n;
            arg.inferences.push_back(inference);
        }
        return n;
    };
    visit(std::string(kHypothesis));
    for (const auto& [id, step] : deriving)
        if (!number.count(id)) throw ImportError(where + ": " + id + " does not lead to the hypothesis");
    try {
        argdown::validate(arg);
    } catch (const ParseError& e) {
        throw ImportError(where + ": " + e.what());
    }

    std::vector<std::string> theory;
    for (const auto& [id, t] : rec.sentences) theory.push_back(t);

    DeepA2Record out;
    out.source = theory_text(theory) + std::string(kEntailsTemplate) + rec.hypothesis;
    StatementList reasons;
    for (const auto& [id, t] : rec.sentences)
        if (used_sentences.count(id)) reasons.push_back({t, number.at(id)});
    out.reasons = std::move(reasons);
    out.conjectures = StatementList{{rec.hypothesis, number.at(std::string(kHypothesis))}};
    out.argdown = arg;
    StatementList premises, conclusion;
    for (const auto& s : argdown::premises_of(arg)) premises.push_back({s.text, s.number});
    const auto& last = argdown::final_conclusion_of(arg);
    conclusion.push_back({last.text, last.number});
    out.premises = std::move(premises);
    out.conclusion = std::move(conclusion);

    out.meta.id = rec.id;
    out.meta.n_inference_steps = static_cast<int>(arg.inferences.size());
    out.meta.n_implicit_premises = 0;
    out.meta.n_implicit_conclusions = static_cast<int>(arg.inferences.size()) - 1;
    out.meta.final_conclusion_explicit = true;
    out.meta.n_distractors = static_cast<int>(distractors.size());
    out.meta.domain_tag = "entailmentbank";
    return out;
}

std::string_view label_name(Label l) {
    switch (l) {
        case Label::Valid: return "valid";
        case Label::Contradiction: return "contradiction";
        case Label::Neutral: return "neutral";
    }
    return "neutral";
}

Label parse_label(std::string_view s) {
    std::string t = text::trim(s);
    for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "valid" || t == "true") return Label::Valid;
    if (t == "contradiction" || t == "false") return Label::Contradiction;
    if (t == "neutral" || t == "unknown") return Label::Neutral;
    throw ImportError("unknown label '" + std::string(s) + "'");
}

RuleTakerRecord parse_ruletaker_record(std::string_view line) {
    const json j = parse_json(line, "RuleTaker");
    RuleTakerRecord rec;
    rec.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : "";
    const char* theory_key = j.contains("theory") ? "theory" : "context";
    if (!j.contains(theory_key)) throw ImportError("RuleTaker record " + rec.id + " has no theory");
    const json& theory = j[theory_key];
    if (theory.is_string()) {
        rec.theory.push_back(text::normalize_ws(theory.get<std::string>()));
    } else if (theory.is_array()) {
        for (const auto& s : theory) {
            if (!s.is_string()) throw ImportError("RuleTaker record " + rec.id + ": theory items must be strings");
            rec.theory.push_back(text::normalize_ws(s.get<std::string>()));
        }
    } else {
        throw ImportError("RuleTaker record " + rec.id + ": theory must be a string or a list");
    }
    rec.hypothesis = string_field(j, {"hypothesis", "question"}, "RuleTaker");
    if (j.contains("label") && j["label"].is_string())
        rec.label = parse_label(j["label"].get<std::string>());
    else if (j.contains("answer") && j["answer"].is_boolean())
        rec.label = j["answer"].get<bool>() ? Label::Valid : Label::Contradiction;
    else if (j.contains("answer") && j["answer"].is_string())
        rec.label = parse_label(j["answer"].get<std::string>());
    else
        throw ImportError("RuleTaker record " + rec.id + " has no label");
    return rec;
}

DeepA2Record import_ruletaker(const RuleTakerRecord& rec) {
    DeepA2Record out;
    out.source = theory_text(rec.theory) + std::string(kEntailsTemplate) + rec.hypothesis;
    out.meta.id = rec.id;
    out.meta.label = std::string(label_name(rec.label));
    out.meta.domain_tag = "ruletaker";
    return out;
}

// ---------------------------------------------------------------------------
// Higher-order evidence

std::vector<std::string> hoe_feature_names(std::vector<int> chain_ids) {
    std::sort(chain_ids.begin(), chain_ids.end());
    std::vector<std::string> out;
    for (int id : chain_ids)
        for (auto m : kHoeChainMetrics) out.push_back("c" + std::to_string(id) + "." + std::string(m));
    out.push_back("agreement");
    return out;
}

std::string final_conclusion_text(const chains::ChainResult& result) {
    if (auto a = result.dict.find(Dim::A); a != result.dict.end()) {
        try {
            const auto arg = argdown::parse_argdown(a->second);
            if (!arg.statements.empty()) return argdown::final_conclusion_of(arg).text;
        } catch (const ParseError&) {
        }
    }
    if (auto c = result.dict.find(Dim::C); c != result.dict.end()) {
        const auto items = parse_statement_list(c->second);
        if (!items.empty()) return items.back().text;
    }
    return "";
}

HoeFeatures extract_hoe_features(std::span<const chains::ChainResult> results,
                                 std::span<const metrics::MetricReport> reports) {
    if (results.size() != reports.size()) throw Error("every chain result needs its metric report");
    if (results.size() < 2) throw Error("higher-order evidence needs at least two chains");
    std::vector<std::size_t> order(results.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return results[a].chain_id < results[b].chain_id; });

    HoeFeatures out;
    out.record_id = results[0].record_id;
    for (std::size_t i : order) {
        const auto& r = results[i];
        if (r.record_id != out.record_id) throw Error("chain results concern different records");
        if (!out.chain_ids.empty() && out.chain_ids.back() == r.chain_id)
            throw Error("chain " + std::to_string(r.chain_id) + " appears twice");
        out.chain_ids.push_back(r.chain_id);
        const auto& m = reports[i];
        out.values.push_back(m.sys_val);
        out.values.push_back((m.sys_pp + m.sys_rp + m.sys_rc + m.sys_us) / 4.0);
        out.values.push_back(m.sys_sch);
        out.values.push_back(m.exe_meq);
        out.values.push_back(m.exe_rss);
        out.values.push_back(m.exe_jss);
    }
    std::vector<std::string> conclusions;
    for (const auto& r : results) conclusions.push_back(final_conclusion_text(r));
    double sum = 0;
    int pairs = 0;
    for (std::size_t a = 0; a < conclusions.size(); ++a)
        for (std::size_t b = a + 1; b < conclusions.size(); ++b, ++pairs)
            sum += metrics::default_scorer(conclusions[a], conclusions[b]);
    out.values.push_back(sum / pairs);
    return out;
}

}  // namespace deepa2::importers
