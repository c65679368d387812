#include "doctest.h"

#include "deepa2/chains.hpp"
#include "deepa2/errors.hpp"
#include "deepa2/generator.hpp"
#include "deepa2/metrics.hpp"
#include "deepa2/text.hpp"

#include <set>

using namespace deepa2;
using namespace deepa2::generator;

namespace {

GeneratorConfig config_with_seed(std::uint64_t seed, std::string_view preset = "AAAC01") {
    auto c = GeneratorConfig::preset(preset);
    c.seed = seed;
    return c;
}

std::string corpus_bytes(const std::vector<DeepA2Record>& records) {
    std::string out;
    for (const auto& r : records) out += to_json_line(r) + "\n";
    return out;
}

std::map<int, formula::Formula> formulas_by_ref(const DeepA2Record& r) {
    std::map<int, formula::Formula> out;
    for (const auto* list : {&*r.premises_form, &*r.conclusion_form})
        for (const auto& item : *list) out.emplace(*item.ref, formula::parse_formula(item.text));
    return out;
}

// Independent of the scheme checker: walks the steps in order and requires
// each to be a substitution instance of the variant it names, with premises
// in the variant's order. Intermediate conclusions carry no formula, so their
// formulas are derived from the instance; the final one must match O.
bool steps_instantiate(const DeepA2Record& r) {
    auto forms = formulas_by_ref(r);
    for (const auto& step : r.argdown->inferences) {
        const auto* scheme = schemes::SchemeCatalog::builtin().find(*step.scheme);
        if (!scheme) return false;
        bool matched = false;
        for (const auto& v : scheme->variants) {
            if (step.variant ? v.name != *step.variant : !v.is_base()) continue;
            if (v.premises.size() != step.from.size()) continue;
            formula::Binding b;
            bool ok = true;
            for (std::size_t i = 0; ok && i < v.premises.size(); ++i)
                ok = forms.count(step.from[i]) && formula::unify(v.premises[i], forms.at(step.from[i]), b);
            if (!ok) continue;
            if (forms.count(step.derives)) {
                if (!formula::unify(v.conclusion, forms.at(step.derives), b)) continue;
            } else {
                forms.emplace(step.derives, formula::substitute(v.conclusion, b));
            }
            matched = true;
            break;
        }
        if (!matched) return false;
    }
    return true;
}

std::set<char> predicates_of_forms(const DeepA2Record& r) {
    std::set<char> out;
    for (const auto& [n, f] : formulas_by_ref(r))
        for (char c : formula::predicates_of(f)) out.insert(c);
    return out;
}

}  // namespace

TEST_SUITE("lexicons") {
    TEST_CASE("both built-in lexicons load with readable phrases and names") {
        for (const char* id : {"AAAC01", "AAAC02"}) {
            const auto& lex = DomainLexicon::builtin(id);
            CHECK(lex.id == id);
            CHECK(lex.domains.size() >= 2);
            for (const auto& d : lex.domains) {
                for (const auto& p : d.phrases) CHECK(schemes::phrase_is_readable(p));
                for (const auto& n : d.names) CHECK(schemes::name_is_readable(n));
            }
        }
        CHECK(&DomainLexicon::builtin("aaac01") == &DomainLexicon::builtin("AAAC01"));
        CHECK_THROWS_AS(DomainLexicon::builtin("AAAC03"), Error);
    }

    TEST_CASE("the two lexicons share no predicate phrase") {
        const auto a = DomainLexicon::builtin("AAAC01").all_phrases();
        const auto b = DomainLexicon::builtin("AAAC02").all_phrases();
        for (const auto& p : a) CHECK_MESSAGE(!b.count(p), p);
    }

    TEST_CASE("malformed lexicon text is rejected") {
        CHECK_THROWS_AS(DomainLexicon::load("domain: x\n"), ParseError);
        CHECK_THROWS_AS(DomainLexicon::load("lexicon: L\nphrase: fan of tea\n"), ParseError);
        CHECK_THROWS_AS(DomainLexicon::load("lexicon: L\ndomain: d\ncolour: red\n"), ParseError);
        CHECK_THROWS_AS(DomainLexicon::load("lexicon: L\ndomain: d\nphrase: fan of tea or coffee\n"), ParseError);
        CHECK_THROWS_AS(DomainLexicon::load("lexicon: L\ndomain: d\nnames: Ann, bob\n"), ParseError);
        // Too few phrases for an argument plus its distractors.
        CHECK_THROWS_AS(DomainLexicon::load("lexicon: L\ndomain: d\nnames: Ann, Bob, Cid, Dee\nphrase: fan of tea\n"),
                        ParseError);
    }
}

TEST_SUITE("argument trees") {
    TEST_CASE("sampled trees are connected and their leaves entail the root") {
        const auto config = config_with_seed(3);
        std::mt19937_64 rng(3);
        for (int i = 0; i < 200; ++i) {
            const auto tree = sample_argument(config, rng);
            REQUIRE(!tree.steps.empty());
            CHECK(tree.steps.size() <= 4);
            std::vector<formula::Formula> leaves;
            for (int l : tree.leaves()) leaves.push_back(tree.formulas[l]);
            CHECK(formula::check_entailment(leaves, tree.formulas[0]));
            // Every node but the root is the premise of exactly one step.
            std::vector<int> uses(tree.formulas.size(), 0);
            for (const auto& s : tree.steps)
                for (int p : s.premises) ++uses[p];
            CHECK(uses[0] == 0);
            for (std::size_t n = 1; n < uses.size(); ++n) CHECK(uses[n] == 1);
            // No formula occurs twice.
            for (std::size_t a = 0; a < tree.formulas.size(); ++a)
                for (std::size_t b = a + 1; b < tree.formulas.size(); ++b) CHECK(!(tree.formulas[a] == tree.formulas[b]));
        }
    }

    TEST_CASE("step weights fix the depth") {
        auto config = config_with_seed(1);
        std::mt19937_64 rng(1);
        for (int depth = 1; depth <= 4; ++depth) {
            config.step_weights = {0, 0, 0, 0};
            config.step_weights[depth - 1] = 1;
            for (int i = 0; i < 20; ++i) CHECK(sample_argument(config, rng).steps.size() == std::size_t(depth));
        }
    }
}

TEST_SUITE("generated records") {
    TEST_CASE("generation is deterministic under the seed") {
        const auto config = config_with_seed(11);
        CHECK(generate_record(config, 5) == generate_record(config, 5));
        CHECK(!(generate_record(config, 5) == generate_record(config, 6)));
        CHECK(!(generate_record(config, 5) == generate_record(config_with_seed(12), 5)));

        const auto one = generate_corpus(config, 60, 1);
        const auto four = generate_corpus(config, 60, 4);
        CHECK(corpus_bytes(one) == corpus_bytes(four));
    }

    TEST_CASE("records carry readable ids and domain tags") {
        const auto r = generate_record(config_with_seed(7, "AAAC02"), 42);
        CHECK(r.meta.id == "aaac02-7-42");
        CHECK(text::starts_with(r.meta.domain_tag, "AAAC02:"));
    }

    TEST_CASE("every record is sound: valid, scheme-conformant, closed refs, verbatim quotes") {
        for (const char* preset : {"AAAC01", "AAAC02"}) {
            const auto corpus = generate_corpus(config_with_seed(2024, preset), 500, 1);
            for (const auto& r : corpus) {
                INFO(to_json_line(r));
                CHECK(validate_record(r).empty());
                CHECK(metrics::eval_sys_val(*r.premises_form, *r.conclusion_form) == 1);
                CHECK(steps_instantiate(r));
                // Statement texts of A reappear in P and C.
                for (const auto& p : *r.premises) CHECK(r.argdown->statement(*p.ref)->text == p.text);
                CHECK(argdown::final_conclusion_of(*r.argdown).number == (*r.conclusion)[0].ref);
                CHECK(r.meta.n_inference_steps == static_cast<int>(r.argdown->inferences.size()));
            }
        }
    }

    TEST_CASE("keys cover exactly the predicates of the formalization") {
        const auto corpus = generate_corpus(config_with_seed(5), 200, 1);
        for (const auto& r : corpus) {
            std::set<char> key_predicates;
            for (const auto& [c, phrase] : *r.keys)
                if (formula::is_predicate_letter(c)) key_predicates.insert(c);
            CHECK(key_predicates == predicates_of_forms(r));
        }
    }

    TEST_CASE("meta counts match the presentation") {
        const auto corpus = generate_corpus(config_with_seed(9), 300, 1);
        for (const auto& r : corpus) {
            const auto& arg = *r.argdown;
            std::set<int> quoted;
            for (const auto& q : *r.reasons) quoted.insert(*q.ref);
            for (const auto& q : *r.conjectures) quoted.insert(*q.ref);
            int implicit_premises = 0, implicit_conclusions = 0;
            for (const auto& s : arg.statements) {
                if (quoted.count(s.number)) continue;
                (arg.is_derived(s.number) ? implicit_conclusions : implicit_premises)++;
            }
            CHECK(r.meta.n_implicit_premises == implicit_premises);
            CHECK(r.meta.n_implicit_conclusions == implicit_conclusions);
            CHECK(r.meta.final_conclusion_explicit ==
                  quoted.count(argdown::final_conclusion_of(arg).number) > 0);
            // At least one premise is always stated.
            CHECK(!r.reasons->empty());
        }
    }
}

TEST_SUITE("presentation plans") {
    TEST_CASE("distractors never share a predicate with the argument and keep it consistent") {
        auto config = config_with_seed(17);
        config.plain_share = 0;
        config.mutilated_share = 0;
        config.distractor_weights = {0, 0, 0, 1};
        std::mt19937_64 rng(17);
        int checked = 0;
        for (int i = 0; i < 500; ++i) {
            const auto tree = sample_argument(config, rng);
            const auto plan = sample_plan(tree, config, rng);
            CHECK(plan.distractors.size() == 3);
            CHECK(plan.distractor_slots.size() == plan.distractors.size());
            std::set<char> argument_predicates;
            std::vector<formula::Formula> premises;
            for (int l : tree.leaves()) premises.push_back(tree.formulas[l]);
            for (const auto& f : tree.formulas)
                for (char c : formula::predicates_of(f)) argument_predicates.insert(c);
            auto with_distractors = premises;
            for (const auto& d : plan.distractors) {
                for (char c : formula::predicates_of(d.formula)) CHECK(!argument_predicates.count(c));
                for (const auto& [c, phrase] : d.keys)
                    if (formula::is_predicate_letter(c))
                        for (const auto& [tc, tp] : tree.keys) CHECK(tp != phrase);
                with_distractors.push_back(d.formula);
            }
            if (formula::check_satisfiable(premises)) {
                CHECK(formula::check_satisfiable(with_distractors));
                ++checked;
            }
        }
        CHECK(checked > 400);
    }

    TEST_CASE("plain presentations state everything and add nothing") {
        auto config = config_with_seed(23);
        config.plain_share = 1;
        config.mutilated_share = 0;
        const auto corpus = generate_corpus(config, 150, 1);
        for (const auto& r : corpus) {
            CHECK(r.meta.n_implicit_premises == 0);
            CHECK(r.meta.n_implicit_conclusions == 0);
            CHECK(r.meta.n_distractors == 0);
            CHECK(classify_subsets(r.meta).count(Subset::Plain));
            // With every premise quoted, each reason scores well against its premise.
            CHECK(metrics::eval_exe_rss(*r.reasons, *r.argdown, metrics::default_scorer) >= 0.8);
        }
    }

    TEST_CASE("mutilated presentations omit and distract when the tree allows it") {
        auto config = config_with_seed(29);
        config.plain_share = 0;
        config.mutilated_share = 1;
        config.step_weights = {0, 0, 0, 1};
        const auto corpus = generate_corpus(config, 150, 1);
        int mutilated = 0;
        for (const auto& r : corpus) {
            if (!classify_subsets(r.meta).count(Subset::Mutilated)) continue;
            ++mutilated;
            CHECK(r.meta.n_implicit_premises >= 2);
            CHECK(r.meta.n_implicit_conclusions >= 1);
            CHECK(r.meta.final_conclusion_explicit);
            CHECK(r.meta.n_distractors == 2);
        }
        CHECK(mutilated > 100);
    }

    TEST_CASE("paraphrase hooks that stray too far are ignored") {
        auto config = config_with_seed(31);
        config.paraphrase_rate = 1;
        config.paraphraser = [](const std::string&) { return std::string("Something else entirely"); };
        for (const auto& r : generate_corpus(config, 40, 1))
            CHECK(r.source->find("Something else entirely") == std::string::npos);

        config.paraphraser = [](const std::string& s) { return s + " indeed"; };
        int used = 0;
        for (const auto& r : generate_corpus(config, 40, 1)) {
            used += r.source->find(" indeed") != std::string::npos;
            CHECK(validate_record(r).empty());
        }
        CHECK(used > 0);
    }
}

TEST_SUITE("corpora") {
    TEST_CASE("a default corpus fills every subset") {
        const auto corpus = generate_corpus(config_with_seed(1), 10000, 1);
        const auto census = subset_census(corpus);
        for (Subset s : {Subset::Simple, Subset::Complex, Subset::Plain, Subset::Mutilated,
                         Subset::ComplexAndMutilated})
            CHECK_MESSAGE(census.at(s) > 0, subset_name(s));
        // One-step and four-step records only; the two never overlap.
        CHECK(census.at(Subset::Simple) + census.at(Subset::Complex) < corpus.size());
        CHECK(census.at(Subset::ComplexAndMutilated) <= census.at(Subset::Complex));
    }

    TEST_CASE("an oracle reproduces the generated records perfectly") {
        const auto corpus = generate_corpus(config_with_seed(77), 40, 1);
        model::OracleBackend oracle(corpus);
        chains::RunOptions options;
        options.chain_ids = {1, 11};
        const auto results = chains::run_corpus(corpus, oracle, options);
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& target = corpus[i / 2];
            const auto report = chains::evaluate_result(results[i], target);
            CHECK(report.sys_val == 1);
            CHECK(report.sys_sch == doctest::Approx(1.0));
            CHECK(report.sys_pp + report.sys_rp + report.sys_rc + report.sys_us == 4);
            CHECK(report.exe_meq == 1);
            CHECK(report.exe_ppr == doctest::Approx(1.0));
            CHECK(report.exe_ppj == doctest::Approx(1.0));
        }
    }

    TEST_CASE("generated corpora survive a JSON-lines round trip") {
        const auto corpus = generate_corpus(config_with_seed(8, "AAAC02"), 50, 1);
        for (const auto& r : corpus) CHECK(from_json_line(to_json_line(r)) == r);
    }
}

TEST_SUITE("configuration") {
    TEST_CASE("presets differ only in lexicon and imprecision") {
        const auto a = GeneratorConfig::preset("AAAC01");
        const auto b = GeneratorConfig::preset("AAAC02");
        CHECK(a.lexicon == "AAAC01");
        CHECK(b.lexicon == "AAAC02");
        CHECK(!a.imprecise);
        CHECK(b.imprecise);
    }

    TEST_CASE("JSON configs start from a preset and override fields") {
        const auto c = GeneratorConfig::from_json(
            R"({"preset": "AAAC02", "seed": 99, "step_weights": [1, 0, 0, 0], "paraphrase": false})");
        CHECK(c.lexicon == "AAAC02");
        CHECK(c.imprecise);
        CHECK(c.seed == 99);
        CHECK(c.step_weights == std::vector<double>{1, 0, 0, 0});
        CHECK(!c.paraphrase);
    }

    TEST_CASE("bad configs are rejected") {
        CHECK_THROWS_AS(GeneratorConfig::from_json("[1, 2]"), Error);
        CHECK_THROWS_AS(GeneratorConfig::from_json("{"), Error);
        CHECK_THROWS_AS(GeneratorConfig::from_json(R"({"colour": 1})"), Error);
        CHECK_THROWS_AS(GeneratorConfig::from_json(R"({"plain_share": 1.5})"), Error);
        CHECK_THROWS_AS(GeneratorConfig::from_json(R"({"plain_share": 0.6, "mutilated_share": 0.6})"), Error);
        CHECK_THROWS_AS(GeneratorConfig::from_json(R"({"step_weights": [1, 1]})"), Error);
        CHECK_THROWS_AS(GeneratorConfig::from_json(R"({"step_weights": [0, 0, 0, 0]})"), Error);
        CHECK_THROWS_AS(GeneratorConfig::from_json(R"({"seed": "abc"})"), Error);
        CHECK_THROWS_AS(GeneratorConfig::from_json(R"({"lexicon": "AAAC09"})"), Error);
    }
}
