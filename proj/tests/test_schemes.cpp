#include "doctest.h"

#include "deepa2/errors.hpp"
#include "deepa2/schemes.hpp"
#include "deepa2/text.hpp"
#include "support/appendix_record.hpp"

#include <random>

using namespace deepa2;
using namespace deepa2::schemes;
using formula::Formula;
using formula::parse_formula;

namespace {

const SchemeCatalog& cat() { return SchemeCatalog::builtin(); }
const TemplateBook& book() { return TemplateBook::builtin(); }

argdown::Argument arg_of(const char* text) { return argdown::parse_argdown(text); }

Formalization forms_of(std::initializer_list<std::pair<int, const char*>> items) {
    Formalization out;
    for (auto& [n, f] : items) out.emplace(n, parse_formula(f));
    return out;
}

const SignatureKeys kKeys{{'F', "admirer of Chico"},       {'G', "visitor of Stockton"}, {'H', "fan of Real Madrid"},
                          {'I', "owner of Lush soap"},    {'J', "ex-fan of Inter"},     {'K', "uncle of Darin"},
                          {'a', "Tracy"},                    {'b', "Mary Ann"}};

}  // namespace

TEST_CASE("builtin catalog") {
    for (const char* name : {"modus ponens", "hypothetical syllogism", "generalized dilemma", "classical dilemma",
                             "instantiation", "transposition", "de Morgan"}) {
        CAPTURE(name);
        CHECK(cat().find(name) != nullptr);
    }
    REQUIRE(cat().find("generalized dilemma")->variant("neg variant") != nullptr);
    CHECK(cat().find("transposition")->intricate);
    CHECK_FALSE(cat().find("modus ponens")->intricate);
    for (const auto& s : cat().schemes()) {
        for (const auto& v : s.variants) {
            CAPTURE(s.name);
            CAPTURE(v.name);
            CHECK(formula::check_entailment(v.premises, v.conclusion));
        }
    }
}

TEST_CASE("catalog load rejects invalid schemes") {
    CHECK_THROWS_AS(SchemeCatalog::load("scheme: bogus\nvariant: base\npremise: F a\nconclusion: G a\n"), InvariantError);
    CHECK_THROWS_AS(SchemeCatalog::load("scheme: x\nvariant: base\nconclusion: G a\n"), ParseError);
    CHECK_THROWS_AS(SchemeCatalog::load("variant: base\n"), ParseError);
    CHECK_THROWS_AS(SchemeCatalog::load("scheme: x\nvariant: base\npremise: F a &\nconclusion: F a\n"), ParseError);
    const auto extra = SchemeCatalog::load(
        "scheme: double negation\nintricate\nvariant: base\npremise: not not F a\nconclusion: F a\n");
    REQUIRE(extra.find("double negation"));
    CHECK(extra.find("double negation")->intricate);
}

TEST_CASE("every pattern shape has a precise template") {
    for (const auto& s : cat().schemes()) {
        for (const auto& v : s.variants) {
            std::vector<Formula> all = v.premises;
            all.push_back(v.conclusion);
            for (const auto& f : all) {
                CAPTURE(formula::render_formula(f));
                CHECK_FALSE(book().templates_for(f, false).empty());
            }
        }
    }
}

TEST_CASE("templates read back what they render") {
    for (const auto& tpl : book().all()) {
        CAPTURE(tpl.pattern);
        // Use letters other than the canonical ones so renaming is exercised.
        formula::Binding to_keys{{'F', 'I'}, {'G', 'J'}, {'H', 'K'}, {'a', 'b'}};
        const Formula f = formula::substitute(tpl.shape, to_keys);
        const std::string sentence = book().render(f, tpl, kKeys);
        CAPTURE(sentence);
        std::map<std::string, char> symbols;
        const auto readings = book().read(sentence, symbols);
        bool found = false;
        for (const auto& r : readings) {
            formula::Binding b;
            found = found || (formula::unify(r, f, b) && formula::canonical_shape(r) == tpl.shape);
        }
        CHECK(found);
        // A lowercased, unpunctuated quote reads the same way.
        std::string quoted = text::lowercase_first(sentence);
        quoted.pop_back();
        std::map<std::string, char> symbols2;
        CHECK(book().read(quoted, symbols2).size() == readings.size());
    }
}

TEST_CASE("phrases must avoid template words") {
    CHECK(phrase_is_readable("owner of Lush soap"));
    CHECK(phrase_is_readable("ex-fan of Inter"));
    CHECK_FALSE(phrase_is_readable("owner of a Lush soap"));
    CHECK_FALSE(phrase_is_readable("friend or foe"));
    CHECK_FALSE(phrase_is_readable("uncle of Tom, Jr."));
    CHECK_FALSE(phrase_is_readable(""));
    CHECK(name_is_readable("Mary Ann"));
    CHECK_FALSE(name_is_readable("mary"));
}

TEST_CASE("rendering picks the article") {
    const auto tpls = book().templates_for(parse_formula("F a"), false);
    REQUIRE_FALSE(tpls.empty());
    CHECK(book().render(parse_formula("F a"), *tpls[0], kKeys) == "Tracy is an admirer of Chico.");
    CHECK(book().render(parse_formula("G b"), *tpls[0], kKeys) == "Mary Ann is a visitor of Stockton.");
    CHECK_THROWS_AS(book().render(parse_formula("Z a"), *tpls[0], kKeys), Error);
}

TEST_CASE("check_scheme_instantiation: worked dilemma with formalization") {
    const auto r = testing::dilemma_record();
    const auto forms = formalization_of(r);
    CHECK(forms.size() == 4);
    std::string diag;
    CHECK(check_scheme_instantiation(r.argdown->inferences[0], *r.argdown, cat(), book(), &forms, &diag));
    // Without formulas the hand-written sentences are outside the template
    // language: a false negative.
    CHECK_FALSE(check_scheme_instantiation(r.argdown->inferences[0], *r.argdown, cat(), book(), nullptr, &diag));
    CHECK(diag.find("cannot read") != std::string::npos);
}

TEST_CASE("check_scheme_instantiation: wrong shape") {
    const auto arg = arg_of("(1) p\n(2) q\n--\nwith modus ponens from (1) (2)\n--\n(3) r");
    const auto forms = forms_of({{1, "(x): Fx -> Gx"}, {2, "(x): Gx -> Hx"}, {3, "(x): Fx -> Hx"}});
    CHECK_FALSE(check_scheme_instantiation(arg.inferences[0], arg, cat(), book(), &forms));
    auto hs = arg;
    hs.inferences[0].scheme = "hypothetical syllogism";
    CHECK(check_scheme_instantiation(hs.inferences[0], hs, cat(), book(), &forms));
}

TEST_CASE("check_scheme_instantiation: transposition") {
    const auto arg = arg_of("(1) p\n--\nwith transposition from (1)\n--\n(2) q");
    const auto forms = forms_of({{1, "(x): Fx -> Gx"}, {2, "(x): not Gx -> not Fx"}});
    CHECK(check_scheme_instantiation(arg.inferences[0], arg, cat(), book(), &forms));
    const auto wrong = forms_of({{1, "(x): Fx -> Gx"}, {2, "(x): not Fx -> not Gx"}});
    CHECK_FALSE(check_scheme_instantiation(arg.inferences[0], arg, cat(), book(), &wrong));
}

TEST_CASE("check_scheme_instantiation: natural-language path") {
    const auto arg = arg_of(
        "(1) If someone is an admirer of Chico, then they are a visitor of Stockton.\n"
        "(2) Tracy is an admirer of Chico.\n"
        "--\nwith modus ponens from (1) (2)\n--\n"
        "(3) Tracy is a visitor of Stockton.");
    CHECK(check_scheme_instantiation(arg.inferences[0], arg, cat(), book()));
    auto wrong = arg;
    wrong.statements[2].text = "Tracy is a fan of Real Madrid.";
    std::string diag;
    CHECK_FALSE(check_scheme_instantiation(wrong.inferences[0], wrong, cat(), book(), nullptr, &diag));
    CHECK(diag.find("do not fit") != std::string::npos);
}

TEST_CASE("unknown schemes and variants count as failures") {
    auto arg = arg_of("(1) p\n--\nwith wishful thinking from (1)\n--\n(2) q");
    std::string diag;
    CHECK_FALSE(check_scheme_instantiation(arg.inferences[0], arg, cat(), book(), nullptr, &diag));
    CHECK(diag.find("unknown scheme") != std::string::npos);
    arg.inferences[0].scheme = "transposition";
    arg.inferences[0].variant = "sideways variant";
    CHECK_FALSE(check_scheme_instantiation(arg.inferences[0], arg, cat(), book(), nullptr, &diag));
    CHECK(diag.find("unknown variant") != std::string::npos);
}

TEST_CASE("sys_sch_ratio") {
    const auto arg = arg_of(
        "(1) a\n(2) b\n--\nwith hypothetical syllogism from (1) (2)\n--\n(3) c\n"
        "--\nwith transposition from (3)\n--\n(4) d\n"
        "--\nwith transposition from (4)\n--\n(5) e\n"
        "(6) f\n--\nwith modus ponens from (5) (6)\n--\n(7) g");
    const auto forms = forms_of({{1, "(x): F x -> G x"},
                                 {2, "(x): G x -> H x"},
                                 {3, "(x): F x -> H x"},
                                 {4, "(x): not H x -> not F x"},
                                 {5, "(x): F x -> H x"},
                                 {6, "F a"},
                                 {7, "G a"}});
    // steps 1 and 2 fit; step 3 is no transposition; step 4 derives G a instead of H a
    CHECK(sys_sch_ratio(arg, cat(), book(), &forms) == doctest::Approx(0.5));

    const auto unannotated = arg_of("(1) a\n(2) b\n----\n(3) c");
    CHECK(sys_sch_ratio(unannotated, cat(), book()) == 0.0);
    auto mixed = arg;
    mixed.inferences[2].scheme.reset();
    mixed.inferences[2].variant.reset();
    CHECK(sys_sch_ratio(mixed, cat(), book(), &forms) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("instantiation implies local validity") {
    std::mt19937_64 rng(17);
    const std::string preds = "FGHIJK";
    const std::string consts = "abc";
    int checked = 0;
    for (int round = 0; round < 40; ++round) {
        for (const auto& s : cat().schemes()) {
            for (const auto& v : s.variants) {
                // Random, possibly non-injective renaming of the metavariables.
                formula::Binding b;
                std::vector<Formula> all = v.premises;
                all.push_back(v.conclusion);
                for (const auto& f : all) {
                    for (char p : formula::predicates_of(f)) {
                        if (!b.count(p)) b[p] = preds[std::uniform_int_distribution<std::size_t>(0, 5)(rng)];
                    }
                    for (char c : formula::constants_of(f)) {
                        if (!b.count(c)) b[c] = consts[std::uniform_int_distribution<std::size_t>(0, 2)(rng)];
                    }
                }
                argdown::Argument arg;
                Formalization forms;
                std::vector<Formula> premises;
                argdown::InferenceStep step{s.name, v.is_base() ? std::nullopt : std::optional<std::string>(v.name), {}, 0};
                int n = 0;
                for (const auto& p : v.premises) {
                    ++n;
                    arg.statements.push_back({n, "s"});
                    forms.emplace(n, formula::substitute(p, b));
                    premises.push_back(forms.at(n));
                    step.from.push_back(n);
                }
                ++n;
                arg.statements.push_back({n, "c"});
                forms.emplace(n, formula::substitute(v.conclusion, b));
                step.derives = n;
                arg.inferences.push_back(step);
                std::shuffle(arg.inferences[0].from.begin(), arg.inferences[0].from.end(), rng);
                REQUIRE(check_scheme_instantiation(arg.inferences[0], arg, cat(), book(), &forms));
                CHECK(formula::check_entailment(premises, forms.at(n)));
                ++checked;
            }
        }
    }
    CHECK(checked > 500);
}
