#pragma once

#include "deepa2/argdown.hpp"
#include "deepa2/core.hpp"
#include "deepa2/formula.hpp"

#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace deepa2::schemes {

struct SchemeVariant {
    std::string name;  // "base" for the unlabelled variant
    std::vector<formula::Formula> premises;
    formula::Formula conclusion;

    bool is_base() const { return name == "base"; }
};

struct SchemeSpec {
    std::string name;
    bool intricate = false;
    std::vector<SchemeVariant> variants;

    const SchemeVariant* variant(std::string_view name) const;
};

// Immutable after load. Loading checks every variant with check_entailment
// and throws InvariantError for an invalid one, ParseError for bad syntax.
class SchemeCatalog {
public:
    static SchemeCatalog load(std::string_view text);
    // The catalog compiled in from data/schemes.txt.
    static const SchemeCatalog& builtin();

    const SchemeSpec* find(std::string_view name) const;
    const std::vector<SchemeSpec>& schemes() const { return schemes_; }

private:
    std::vector<SchemeSpec> schemes_;
};

struct SentenceTemplate {
    formula::Formula shape;
    std::string pattern;
    bool imprecise = false;
};

// Sentence templates keyed by canonical formula shape.
class TemplateBook {
public:
    static TemplateBook load(std::string_view text);
    static const TemplateBook& builtin();

    // Templates for the canonical shape of `f`; empty when none is known.
    std::vector<const SentenceTemplate*> templates_for(const formula::Formula& f, bool allow_imprecise) const;

    // Renders `f` with the given template; `keys` supplies phrases for the
    // predicates and names for the constants of `f`. Throws Error for a
    // symbol without a key.
    std::string render(const formula::Formula& f, const SentenceTemplate& tpl, const SignatureKeys& keys) const;

    // Every reading of `sentence` under some template. Phrases and names are
    // interned in `symbols` (phrase -> letter), so readings of several
    // sentences share letters.
    std::vector<formula::Formula> read(std::string_view sentence, std::map<std::string, char>& symbols) const;

    const std::vector<SentenceTemplate>& all() const { return templates_; }

private:
    struct Compiled;
    std::vector<SentenceTemplate> templates_;
    std::vector<std::shared_ptr<const Compiled>> compiled_;
};

// Formulas of the statements of an argument, keyed by statement number.
using Formalization = std::map<int, formula::Formula>;

// Builds the formalization from F and O refs. Unparseable items are skipped.
Formalization formalization_of(const DeepA2Record& record);

// Whether `step` instantiates its declared scheme. Uses formulas when every
// statement of the step is formalized, otherwise reads the sentences against
// the template book. An absent or unknown scheme yields false with a
// diagnostic.
bool check_scheme_instantiation(const argdown::InferenceStep& step, const argdown::Argument& arg,
                                const SchemeCatalog& catalog, const TemplateBook& book,
                                const Formalization* forms = nullptr, std::string* diagnostic = nullptr);

// Share of steps with a declared scheme that instantiate it. Steps without a
// scheme name are left out; with none left the ratio is 0.
double sys_sch_ratio(const argdown::Argument& arg, const SchemeCatalog& catalog, const TemplateBook& book,
                     const Formalization* forms = nullptr);

// Whether a predicate phrase or a name can be recovered from a rendered
// sentence: phrases avoid the words the templates are built from ("a", "or",
// "not", ...) and punctuation; names are capitalized words.
bool phrase_is_readable(std::string_view phrase);
bool name_is_readable(std::string_view name);

// Indefinite article for a phrase.
std::string_view article_for(std::string_view phrase);

}  // namespace deepa2::schemes
