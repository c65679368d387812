#include "deepa2/core.hpp"

#include "deepa2/errors.hpp"
#include "deepa2/formula.hpp"
#include "deepa2/text.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <regex>

#include "json.hpp"

namespace deepa2 {

using json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, 9> kKeywords{"source",   "reasons",       "conjectures",     "argdown", "premises",
                                                    "conclusion", "premises_form", "conclusion_form", "keys"};
constexpr std::string_view kLetters = "SRJAPCFOK";

std::size_t index_of(Dim d) { return static_cast<std::size_t>(d); }

std::string escape_pipes(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '|') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string unescape_pipes(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] == '|') continue;
        out.push_back(s[i]);
    }
    return out;
}

struct Piece {
    std::string_view text;
    std::size_t offset;
};

// Splits at unescaped '|'.
std::vector<Piece> split_items(std::string_view s) {
    std::vector<Piece> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '|' && (i == 0 || s[i - 1] != '\\')) {
            out.push_back({s.substr(start, i - start), start});
            start = i + 1;
        }
    }
    out.push_back({s.substr(start), start});
    return out;
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string_view keyword(Dim d) { return kKeywords[index_of(d)]; }

std::optional<Dim> dim_from_keyword(std::string_view kw) {
    for (Dim d : kAllDims) {
        if (keyword(d) == kw) return d;
    }
    return std::nullopt;
}

char letter(Dim d) { return kLetters[index_of(d)]; }

std::optional<Dim> dim_from_letter(char c) {
    const auto pos = kLetters.find(c);
    if (pos == std::string_view::npos) return std::nullopt;
    return kAllDims[pos];
}

bool DeepA2Record::has(Dim d) const {
    switch (d) {
        case Dim::S: return source.has_value();
        case Dim::R: return reasons.has_value();
        case Dim::J: return conjectures.has_value();
        case Dim::A: return argdown.has_value();
        case Dim::P: return premises.has_value();
        case Dim::C: return conclusion.has_value();
        case Dim::F: return premises_form.has_value();
        case Dim::O: return conclusion_form.has_value();
        case Dim::K: return keys.has_value();
    }
    return false;
}

DimensionValue DeepA2Record::get(Dim d) const {
    if (!has(d)) throw MissingDimensionError("record " + meta.id + " has no " + std::string(keyword(d)) + " dimension");
    switch (d) {
        case Dim::S: return *source;
        case Dim::R: return *reasons;
        case Dim::J: return *conjectures;
        case Dim::A: return *argdown;
        case Dim::P: return *premises;
        case Dim::C: return *conclusion;
        case Dim::F: return *premises_form;
        case Dim::O: return *conclusion_form;
        case Dim::K: return *keys;
    }
    return std::string{};
}

void DeepA2Record::set(Dim d, DimensionValue v) {
    switch (d) {
        case Dim::S: source = std::get<std::string>(std::move(v)); break;
        case Dim::R: reasons = std::get<StatementList>(std::move(v)); break;
        case Dim::J: conjectures = std::get<StatementList>(std::move(v)); break;
        case Dim::A: argdown = std::get<argdown::Argument>(std::move(v)); break;
        case Dim::P: premises = std::get<StatementList>(std::move(v)); break;
        case Dim::C: conclusion = std::get<StatementList>(std::move(v)); break;
        case Dim::F: premises_form = std::get<StatementList>(std::move(v)); break;
        case Dim::O: conclusion_form = std::get<StatementList>(std::move(v)); break;
        case Dim::K: keys = std::get<SignatureKeys>(std::move(v)); break;
    }
}

void DeepA2Record::clear(Dim d) {
    switch (d) {
        case Dim::S: source.reset(); break;
        case Dim::R: reasons.reset(); break;
        case Dim::J: conjectures.reset(); break;
        case Dim::A: argdown.reset(); break;
        case Dim::P: premises.reset(); break;
        case Dim::C: conclusion.reset(); break;
        case Dim::F: premises_form.reset(); break;
        case Dim::O: conclusion_form.reset(); break;
        case Dim::K: keys.reset(); break;
    }
}

std::string serialize_statement_list(const StatementList& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += " | ";
        out += escape_pipes(items[i].text);
        if (items[i].ref) out += " (ref: (" + std::to_string(*items[i].ref) + "))";
    }
    return out;
}

std::string serialize_keys(const SignatureKeys& keys) {
    std::string out;
    for (const auto& [symbol, phrase] : keys) {
        if (!out.empty()) out += " | ";
        out.push_back(symbol);
        out += ": " + escape_pipes(phrase);
    }
    return out;
}

std::string serialize_value(const DimensionValue& value) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else if constexpr (std::is_same_v<T, StatementList>) {
                return serialize_statement_list(v);
            } else if constexpr (std::is_same_v<T, argdown::Argument>) {
                return argdown::render_argdown(v);
            } else {
                return serialize_keys(v);
            }
        },
        value);
}

std::string serialize_dimension(const DeepA2Record& record, Dim d) { return serialize_value(record.get(d)); }

StatementList parse_statement_list(std::string_view text) {
    StatementList out;
    if (blank(text)) return out;
    static const std::regex ref_re(R"(^\(ref:\s*\((\d+)\)\)\s*$)");
    for (const Piece& piece : split_items(text)) {
        std::string_view item = piece.text;
        QuotedStatement qs;
        const auto ref_pos = item.rfind("(ref:");
        if (ref_pos != std::string_view::npos) {
            const std::string tail(item.substr(ref_pos));
            std::smatch m;
            if (!std::regex_match(tail, m, ref_re)) throw ParseError("malformed ref", piece.offset + ref_pos);
            const auto digits = m[1].str();
            const int ref = digits.size() > 6 ? 0 : std::stoi(digits);
            if (ref < 1) throw ParseError("ref must be a positive statement number", piece.offset + ref_pos);
            qs.ref = ref;
            item = item.substr(0, ref_pos);
        }
        qs.text = text::normalize_ws(unescape_pipes(item));
        if (qs.text.empty()) throw ParseError("empty list item", piece.offset);
        out.push_back(std::move(qs));
    }
    return out;
}

SignatureKeys parse_keys(std::string_view text) {
    SignatureKeys out;
    if (blank(text)) return out;
    static const std::regex key_re(R"(^\s*([A-Za-z])\s*:\s*(\S.*?)\s*$)");
    for (const Piece& piece : split_items(text)) {
        const std::string item(piece.text);
        std::smatch m;
        if (!std::regex_match(item, m, key_re)) throw ParseError("malformed key entry", piece.offset);
        const char symbol = m[1].str()[0];
        if (out.count(symbol)) throw ParseError("duplicate key '" + std::string(1, symbol) + "'", piece.offset);
        out[symbol] = text::normalize_ws(unescape_pipes(m[2].str()));
    }
    return out;
}

DimensionValue parse_dimension(std::string_view text, Dim d) {
    switch (d) {
        case Dim::S: return text::normalize_ws(text);
        case Dim::A: return argdown::parse_argdown(text);
        case Dim::K: return parse_keys(text);
        case Dim::F:
        case Dim::O: {
            StatementList items = parse_statement_list(text);
            for (const auto& item : items) {
                try {
                    formula::parse_formula(item.text);
                } catch (const ParseError& e) {
                    // Report the position within the whole dimension text.
                    const auto at = text.find(item.text);
                    throw ParseError(e.what(), (at == std::string_view::npos ? 0 : at) + e.position());
                }
            }
            return items;
        }
        default: return parse_statement_list(text);
    }
}

std::string_view subset_name(Subset s) {
    switch (s) {
        case Subset::Simple: return "simple";
        case Subset::Complex: return "complex";
        case Subset::Plain: return "plain";
        case Subset::Mutilated: return "mutilated";
        case Subset::ComplexAndMutilated: return "C&M";
    }
    return "";
}

std::set<Subset> classify_subsets(const RecordMeta& meta) {
    std::set<Subset> out;
    const bool complex = meta.n_inference_steps == 4 && meta.uses_complex_schemes;
    if (meta.n_inference_steps == 1 && !meta.uses_complex_schemes) out.insert(Subset::Simple);
    if (complex) out.insert(Subset::Complex);
    if (meta.n_implicit_premises == 0 && meta.n_implicit_conclusions == 0 && meta.n_distractors == 0) {
        out.insert(Subset::Plain);
    }
    if (meta.n_implicit_premises >= 2 && meta.n_implicit_conclusions >= 1 && meta.n_distractors == 2 &&
        meta.final_conclusion_explicit) {
        out.insert(Subset::Mutilated);
    }
    if (complex && meta.n_distractors >= 2) out.insert(Subset::ComplexAndMutilated);
    return out;
}

std::vector<std::string> dangling_refs(const DeepA2Record& record) {
    std::vector<std::string> out;
    if (!record.argdown) return out;
    const int n = static_cast<int>(record.argdown->statements.size());
    for (Dim d : {Dim::R, Dim::J, Dim::P, Dim::C, Dim::F, Dim::O}) {
        if (!record.has(d)) continue;
        for (const auto& item : std::get<StatementList>(record.get(d))) {
            if (item.ref && (*item.ref < 1 || *item.ref > n)) {
                out.push_back(std::string(keyword(d)) + ": (" + std::to_string(*item.ref) + ")");
            }
        }
    }
    return out;
}

std::string to_json_line(const DeepA2Record& record) {
    json j = json::object();
    for (Dim d : kAllDims) {
        if (record.has(d)) j[std::string(keyword(d))] = serialize_dimension(record, d);
    }
    const RecordMeta& m = record.meta;
    json meta = {{"id", m.id},
                 {"n_inference_steps", m.n_inference_steps},
                 {"n_implicit_premises", m.n_implicit_premises},
                 {"n_implicit_conclusions", m.n_implicit_conclusions},
                 {"final_conclusion_explicit", m.final_conclusion_explicit},
                 {"n_distractors", m.n_distractors},
                 {"uses_complex_schemes", m.uses_complex_schemes},
                 {"domain_tag", m.domain_tag}};
    if (m.label) meta["label"] = *m.label;
    j["meta"] = std::move(meta);
    return j.dump();
}

DeepA2Record from_json_line(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
    }
    if (!j.is_object()) throw ParseError("record is not a JSON object", 0);
    DeepA2Record r;
    for (Dim d : kAllDims) {
        const auto it = j.find(std::string(keyword(d)));
        if (it == j.end() || it->is_null()) continue;
        if (!it->is_string()) throw ParseError("field " + std::string(keyword(d)) + " is not a string", 0);
        r.set(d, parse_dimension(it->get<std::string>(), d));
    }
    if (auto it = j.find("meta"); it != j.end() && it->is_object()) {
        const json& m = *it;
        r.meta.id = m.value("id", std::string{});
        r.meta.n_inference_steps = m.value("n_inference_steps", 0);
        r.meta.n_implicit_premises = m.value("n_implicit_premises", 0);
        r.meta.n_implicit_conclusions = m.value("n_implicit_conclusions", 0);
        r.meta.final_conclusion_explicit = m.value("final_conclusion_explicit", true);
        r.meta.n_distractors = m.value("n_distractors", 0);
        r.meta.uses_complex_schemes = m.value("uses_complex_schemes", false);
        r.meta.domain_tag = m.value("domain_tag", std::string{});
        if (m.contains("label") && m["label"].is_string()) r.meta.label = m["label"].get<std::string>();
    }
    return r;
}

std::vector<DeepA2Record> read_corpus(std::istream& in) {
    std::vector<DeepA2Record> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        try {
            out.push_back(from_json_line(line));
        } catch (const ParseError& e) {
            throw ParseError("corpus line " + std::to_string(lineno) + ": " + e.what(), e.position());
        }
    }
    return out;
}

void write_corpus(std::ostream& out, const std::vector<DeepA2Record>& records) {
    for (const auto& r : records) out << to_json_line(r) << '\n';
}

}  // namespace deepa2
