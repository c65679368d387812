#include "deepa2/schemes.hpp"

#include "deepa2/embedded.hpp"
#include "deepa2/errors.hpp"
#include "deepa2/text.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace deepa2::schemes {

using formula::Formula;

const SchemeVariant* SchemeSpec::variant(std::string_view n) const {
    for (const auto& v : variants) {
        if (v.name == n) return &v;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Catalog

SchemeCatalog SchemeCatalog::load(std::string_view content) {
    SchemeCatalog cat;
    SchemeSpec* scheme = nullptr;
    std::optional<SchemeVariant> variant;
    std::optional<Formula> conclusion;

    auto close_variant = [&](std::size_t pos) {
        if (!variant) return;
        if (!scheme) throw ParseError("variant outside a scheme", pos);
        if (variant->premises.empty()) throw ParseError("variant '" + variant->name + "' has no premises", pos);
        if (!conclusion) throw ParseError("variant '" + variant->name + "' has no conclusion", pos);
        variant->conclusion = *conclusion;
        conclusion.reset();
        if (!formula::check_entailment(variant->premises, variant->conclusion)) {
            throw InvariantError("scheme '" + scheme->name + "' (" + variant->name + ") is not valid");
        }
        scheme->variants.push_back(std::move(*variant));
        variant.reset();
    };
    auto close_scheme = [&](std::size_t pos) {
        close_variant(pos);
        if (scheme && scheme->variants.empty()) throw ParseError("scheme '" + scheme->name + "' has no variants", pos);
    };

    std::size_t offset = 0;
    for (const auto& raw : text::split(content, '\n')) {
        const std::size_t pos = offset;
        offset += raw.size() + 1;
        std::string line = raw.substr(0, raw.find('#'));
        line = text::trim(line);
        if (line.empty()) continue;
        if (line == "intricate") {
            if (!scheme) throw ParseError("'intricate' outside a scheme", pos);
            scheme->intricate = true;
            continue;
        }
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("expected 'key: value'", pos);
        const std::string key = text::trim(line.substr(0, colon));
        const std::string value = text::trim(line.substr(colon + 1));
        if (key == "scheme") {
            close_scheme(pos);
            if (cat.find(value)) throw ParseError("duplicate scheme '" + value + "'", pos);
            cat.schemes_.push_back(SchemeSpec{value, false, {}});
            scheme = &cat.schemes_.back();
        } else if (key == "variant") {
            close_variant(pos);
            if (!scheme) throw ParseError("variant outside a scheme", pos);
            if (scheme->variant(value)) throw ParseError("duplicate variant '" + value + "'", pos);
            variant = SchemeVariant{value, {}, Formula::atom('F', formula::Term{'a'})};
        } else if (key == "premise" || key == "conclusion") {
            if (!variant) throw ParseError(key + " outside a variant", pos);
            Formula f = [&] {
                try {
                    return formula::parse_formula(value);
                } catch (const ParseError& e) {
                    throw ParseError(e.what(), pos + colon + 1);
                }
            }();
            if (key == "premise") {
                variant->premises.push_back(f);
            } else {
                if (conclusion) throw ParseError("variant has two conclusions", pos);
                conclusion = f;
            }
        } else {
            throw ParseError("unknown key '" + key + "'", pos);
        }
    }
    close_scheme(offset);
    return cat;
}

const SchemeCatalog& SchemeCatalog::builtin() {
    static const SchemeCatalog cat = load(embedded::lookup("schemes.txt"));
    return cat;
}

const SchemeSpec* SchemeCatalog::find(std::string_view name) const {
    for (const auto& s : schemes_) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Templates

std::string_view article_for(std::string_view phrase) {
    if (phrase.empty()) return "a";
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(phrase.front())));
    return std::string_view("aeiou").find(c) != std::string_view::npos ? "an" : "a";
}

namespace {

struct Slot {
    char symbol;
    enum class Form { Article, Bare, Name } form;
};

// Splits "{F} is {G:bare}" into literal text and slots.
std::vector<std::variant<std::string, Slot>> tokenize_pattern(const std::string& pattern) {
    std::vector<std::variant<std::string, Slot>> out;
    std::string lit;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] != '{') {
            lit.push_back(pattern[i]);
            continue;
        }
        const auto close = pattern.find('}', i);
        if (close == std::string::npos) throw ParseError("unterminated slot in template", i);
        const std::string body = pattern.substr(i + 1, close - i - 1);
        if (body.empty()) throw ParseError("empty slot in template", i);
        Slot slot{body[0], Slot::Form::Article};
        if (formula::is_constant_letter(slot.symbol)) {
            slot.form = Slot::Form::Name;
            if (body.size() != 1) throw ParseError("name slots take no modifier", i);
        } else if (formula::is_predicate_letter(slot.symbol)) {
            if (body == std::string(1, slot.symbol) + ":bare") {
                slot.form = Slot::Form::Bare;
            } else if (body.size() != 1) {
                throw ParseError("unknown slot '" + body + "'", i);
            }
        } else {
            throw ParseError("unknown slot '" + body + "'", i);
        }
        if (!lit.empty()) out.emplace_back(std::move(lit));
        lit.clear();
        out.emplace_back(slot);
        i = close;
    }
    if (!lit.empty()) out.emplace_back(std::move(lit));
    return out;
}

std::string regex_escape(const std::string& s) {
    static const std::string special = R"(\^$.|?*+()[]{}/)";
    std::string out;
    for (char c : s) {
        if (special.find(c) != std::string::npos) out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string strip_final_period(std::string s) {
    s = text::normalize_ws(s);
    while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
    return s;
}

// Words that belong to the template language and never start or continue a
// predicate phrase.
const char* const kPhraseWord = R"((?!(?:a|an|or|and|nor|not|who|is|are|then|both|neither|provided|that|if)\b)[^\s,.]+)";
const char* const kNameWord = R"([A-Z][A-Za-z'\-]*)";

}  // namespace

bool phrase_is_readable(std::string_view phrase) {
    static const std::regex re(std::string("^") + kPhraseWord + "(?: " + kPhraseWord + ")*$");
    return std::regex_match(std::string(phrase), re);
}

bool name_is_readable(std::string_view name) {
    static const std::regex re(std::string("^") + kNameWord + "(?: " + kNameWord + ")*$");
    return std::regex_match(std::string(name), re);
}

struct TemplateBook::Compiled {
    std::regex re;
    std::vector<Slot> slots;
};

TemplateBook TemplateBook::load(std::string_view content) {
    TemplateBook book;
    std::size_t offset = 0;
    for (const auto& raw : text::split(content, '\n')) {
        const std::size_t pos = offset;
        offset += raw.size() + 1;
        std::string line = text::trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (auto at = line.find("=>"); at != std::string::npos; at = line.find("=>", start)) {
            parts.push_back(text::trim(line.substr(start, at - start)));
            start = at + 2;
        }
        parts.push_back(text::trim(line.substr(start)));
        if (parts.size() < 2 || parts.size() > 3) throw ParseError("expected '<shape> => <sentence>'", pos);
        SentenceTemplate tpl{formula::parse_formula(parts[0]), parts[1], false};
        if (parts.size() == 3) {
            if (parts[2] != "imprecise") throw ParseError("unknown template flag '" + parts[2] + "'", pos);
            tpl.imprecise = true;
        }
        if (!(formula::canonical_shape(tpl.shape) == tpl.shape)) {
            throw ParseError("template shape is not canonical: " + parts[0], pos);
        }

        auto compiled = std::make_shared<Compiled>();
        std::string re = "^";
        const std::string phrase = std::string("(") + kPhraseWord + "(?: " + kPhraseWord + ")*)";
        const std::string name = std::string("(") + kNameWord + "(?: " + kNameWord + ")*)";
        const auto symbols_in_shape = [&] {
            auto s = formula::predicates_of(tpl.shape);
            auto c = formula::constants_of(tpl.shape);
            s.insert(c.begin(), c.end());
            return s;
        }();
        std::set<char> seen;
        std::vector<std::variant<std::string, Slot>> pieces;
        try {
            pieces = tokenize_pattern(strip_final_period(tpl.pattern));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), pos);
        }
        for (const auto& piece : pieces) {
            if (const auto* lit = std::get_if<std::string>(&piece)) {
                re += regex_escape(*lit);
                continue;
            }
            const Slot slot = std::get<Slot>(piece);
            if (!symbols_in_shape.count(slot.symbol)) {
                throw ParseError(std::string("slot '") + slot.symbol + "' does not occur in the shape", pos);
            }
            seen.insert(slot.symbol);
            compiled->slots.push_back(slot);
            switch (slot.form) {
                case Slot::Form::Article: re += "(?:[Aa]n?) " + phrase; break;
                case Slot::Form::Bare: re += phrase; break;
                case Slot::Form::Name: re += name; break;
            }
        }
        if (seen != symbols_in_shape) throw ParseError("template leaves a symbol of its shape unmentioned", pos);
        re += "$";
        compiled->re = std::regex(re);
        book.templates_.push_back(std::move(tpl));
        book.compiled_.push_back(std::move(compiled));
    }
    return book;
}

const TemplateBook& TemplateBook::builtin() {
    static const TemplateBook book = load(embedded::lookup("templates.txt"));
    return book;
}

std::vector<const SentenceTemplate*> TemplateBook::templates_for(const Formula& f, bool allow_imprecise) const {
    const Formula shape = formula::canonical_shape(f);
    std::vector<const SentenceTemplate*> out;
    for (const auto& t : templates_) {
        if (t.shape == shape && (allow_imprecise || !t.imprecise)) out.push_back(&t);
    }
    return out;
}

std::string TemplateBook::render(const Formula& f, const SentenceTemplate& tpl, const SignatureKeys& keys) const {
    formula::Binding original;
    const Formula shape = formula::canonical_shape(f, &original);
    if (!(shape == tpl.shape)) throw Error("template does not fit formula " + formula::render_formula(f));
    std::string out;
    for (const auto& piece : tokenize_pattern(tpl.pattern)) {
        if (const auto* lit = std::get_if<std::string>(&piece)) {
            out += *lit;
            continue;
        }
        const Slot slot = std::get<Slot>(piece);
        const char symbol = original.at(slot.symbol);
        const auto it = keys.find(symbol);
        if (it == keys.end()) throw Error(std::string("no key for symbol '") + symbol + "'");
        if (slot.form == Slot::Form::Article) {
            out += std::string(article_for(it->second)) + " ";
        }
        out += it->second;
    }
    return text::capitalize_first(out);
}

std::vector<Formula> TemplateBook::read(std::string_view sentence, std::map<std::string, char>& symbols) const {
    static const std::string kPredicates = "FGHIJKLMNOPQRSTUVWXYZABCD";
    static const std::string kConstants = "abcdefghijklmnopqrstuw";
    std::vector<Formula> out;
    const std::string plain = strip_final_period(std::string(sentence));
    if (plain.empty()) return out;
    std::vector<std::string> spellings{plain};
    const std::string cap = text::capitalize_first(plain);
    if (cap != plain) spellings.push_back(cap);

    auto intern = [&](const std::string& key, bool is_name) -> std::optional<char> {
        if (auto it = symbols.find(key); it != symbols.end()) return it->second;
        const std::string& pool = is_name ? kConstants : kPredicates;
        std::size_t used = 0;
        for (const auto& [k, v] : symbols) used += (pool.find(v) != std::string::npos) ? 1 : 0;
        if (used >= pool.size()) return std::nullopt;
        symbols[key] = pool[used];
        return pool[used];
    };

    for (std::size_t t = 0; t < templates_.size(); ++t) {
        const Compiled& c = *compiled_[t];
        for (const auto& s : spellings) {
            std::smatch m;
            if (!std::regex_match(s, m, c.re)) continue;
            std::map<char, std::string> captured;
            bool consistent = true;
            for (std::size_t i = 0; i < c.slots.size(); ++i) {
                const std::string value = m[i + 1].str();
                auto [it, inserted] = captured.emplace(c.slots[i].symbol, value);
                if (!inserted && it->second != value) consistent = false;
            }
            if (!consistent) continue;
            formula::Binding b;
            bool ok = true;
            for (const auto& [symbol, value] : captured) {
                const bool is_name = formula::is_constant_letter(symbol);
                const auto letter = intern(is_name ? "=" + value : value, is_name);
                if (!letter) {
                    ok = false;
                    break;
                }
                b[symbol] = *letter;
            }
            if (!ok) continue;
            const Formula f = formula::substitute(templates_[t].shape, b);
            if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scheme instantiation

Formalization formalization_of(const DeepA2Record& record) {
    Formalization out;
    for (const auto* list : {&record.premises_form, &record.conclusion_form}) {
        if (!*list) continue;
        for (const auto& item : **list) {
            if (!item.ref) continue;
            try {
                out.insert_or_assign(*item.ref, formula::parse_formula(item.text));
            } catch (const ParseError&) {
            }
        }
    }
    return out;
}

namespace {

bool match_premises(const std::vector<Formula>& patterns, const std::vector<Formula>& targets, std::vector<bool>& used,
                    std::size_t i, const formula::Binding& binding) {
    if (i == patterns.size()) return true;
    for (std::size_t j = 0; j < targets.size(); ++j) {
        if (used[j]) continue;
        formula::Binding b = binding;
        if (!formula::unify(patterns[i], targets[j], b)) continue;
        used[j] = true;
        if (match_premises(patterns, targets, used, i + 1, b)) return true;
        used[j] = false;
    }
    return false;
}

bool matches(const SchemeVariant& v, const std::vector<Formula>& premises, const Formula& conclusion) {
    if (v.premises.size() != premises.size()) return false;
    formula::Binding b;
    if (!formula::unify(v.conclusion, conclusion, b)) return false;
    std::vector<bool> used(premises.size(), false);
    return match_premises(v.premises, premises, used, 0, b);
}

void note(std::string* diagnostic, std::string msg) {
    if (diagnostic) *diagnostic = std::move(msg);
}

}  // namespace

bool check_scheme_instantiation(const argdown::InferenceStep& step, const argdown::Argument& arg,
                                const SchemeCatalog& catalog, const TemplateBook& book, const Formalization* forms,
                                std::string* diagnostic) {
    const std::string where = "step deriving (" + std::to_string(step.derives) + ")";
    if (!step.scheme) {
        note(diagnostic, where + " declares no scheme");
        return false;
    }
    const SchemeSpec* scheme = catalog.find(*step.scheme);
    if (!scheme) {
        note(diagnostic, where + ": unknown scheme '" + *step.scheme + "'");
        return false;
    }
    std::vector<const SchemeVariant*> variants;
    if (step.variant) {
        const SchemeVariant* v = scheme->variant(*step.variant);
        if (!v) {
            note(diagnostic, where + ": unknown variant '" + *step.variant + "' of " + scheme->name);
            return false;
        }
        variants.push_back(v);
    } else {
        for (const auto& v : scheme->variants) variants.push_back(&v);
    }

    std::vector<int> numbers = step.from;
    numbers.push_back(step.derives);
    for (int n : numbers) {
        if (!arg.statement(n)) {
            note(diagnostic, where + ": no statement (" + std::to_string(n) + ")");
            return false;
        }
    }

    const bool formal =
        forms && std::all_of(numbers.begin(), numbers.end(), [&](int n) { return forms->count(n) > 0; });
    if (formal) {
        std::vector<Formula> premises;
        for (int n : step.from) premises.push_back(forms->at(n));
        const Formula& conclusion = forms->at(step.derives);
        for (const auto* v : variants) {
            if (matches(*v, premises, conclusion)) return true;
        }
        note(diagnostic, where + ": formalization does not fit " + scheme->name);
        return false;
    }

    std::map<std::string, char> symbols;
    std::vector<std::vector<Formula>> readings;
    for (int n : numbers) {
        readings.push_back(book.read(arg.statement(n)->text, symbols));
        if (readings.back().empty()) {
            note(diagnostic, where + ": cannot read statement (" + std::to_string(n) + ")");
            return false;
        }
    }
    // Enumerate combinations of readings; there are rarely more than a few.
    std::vector<std::size_t> idx(readings.size(), 0);
    for (int guard = 0; guard < 4096; ++guard) {
        std::vector<Formula> premises;
        for (std::size_t i = 0; i + 1 < readings.size(); ++i) premises.push_back(readings[i][idx[i]]);
        const Formula& conclusion = readings.back()[idx.back()];
        for (const auto* v : variants) {
            if (matches(*v, premises, conclusion)) return true;
        }
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == readings[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    note(diagnostic, where + ": statements do not fit " + scheme->name);
    return false;
}

double sys_sch_ratio(const argdown::Argument& arg, const SchemeCatalog& catalog, const TemplateBook& book,
                     const Formalization* forms) {
    int declared = 0;
    int passed = 0;
    for (const auto& step : arg.inferences) {
        if (!step.scheme) continue;
        ++declared;
        if (check_scheme_instantiation(step, arg, catalog, book, forms)) ++passed;
    }
    return declared == 0 ? 0.0 : static_cast<double>(passed) / declared;
}

}  // namespace deepa2::schemes
