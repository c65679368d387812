#include "doctest.h"

#include "deepa2/errors.hpp"
#include "deepa2/formula.hpp"
#include "support/brute_force.hpp"
#include "support/formula_gen.hpp"

#include <random>

using namespace deepa2;
using formula::Formula;
using formula::Term;
using formula::parse_formula;
using formula::render_formula;

namespace {

Formula atom(char p, char t) { return Formula::atom(p, Term{t}); }

std::vector<Formula> parse_all(std::initializer_list<const char*> texts) {
    std::vector<Formula> out;
    for (auto t : texts) out.push_back(parse_formula(t));
    return out;
}

}  // namespace

TEST_CASE("parse_formula: examples") {
    CHECK(parse_formula("(x): F x -> not I x") ==
          Formula::forall('x', Formula::implication(atom('F', 'x'), Formula::negation(atom('I', 'x')))));
    CHECK(parse_formula("F a") == atom('F', 'a'));
    CHECK(parse_formula("(x): Fx -> (G x v H x)") ==
          Formula::forall('x', Formula::implication(atom('F', 'x'), Formula::disjunction(atom('G', 'x'), atom('H', 'x')))));
}

TEST_CASE("parse_formula: precedence and associativity") {
    // not > & > v > -> > <->
    CHECK(parse_formula("not F a & G a v H a -> I a <-> J a") ==
          Formula::equivalence(
              Formula::implication(
                  Formula::disjunction(Formula::conjunction(Formula::negation(atom('F', 'a')), atom('G', 'a')), atom('H', 'a')),
                  atom('I', 'a')),
              atom('J', 'a')));
    CHECK(parse_formula("F a -> G a -> H a") ==
          Formula::implication(atom('F', 'a'), Formula::implication(atom('G', 'a'), atom('H', 'a'))));
    CHECK(parse_formula("F a & G a & H a") ==
          Formula::conjunction(Formula::conjunction(atom('F', 'a'), atom('G', 'a')), atom('H', 'a')));
    // quantifier scopes over the remaining expression
    CHECK(parse_formula("F a & (x): G x -> H x") ==
          Formula::conjunction(atom('F', 'a'), Formula::forall('x', Formula::implication(atom('G', 'x'), atom('H', 'x')))));
    CHECK(parse_formula("(Ex): F x & G x") == Formula::exists('x', Formula::conjunction(atom('F', 'x'), atom('G', 'x'))));
    CHECK(parse_formula("(E x): F x") == Formula::exists('x', atom('F', 'x')));
}

TEST_CASE("parse_formula: errors carry positions") {
    auto position_of = [](const char* text) -> std::size_t {
        try {
            parse_formula(text);
        } catch (const ParseError& e) {
            return e.position();
        }
        FAIL("expected a parse error for " << text);
        return 0;
    };
    CHECK(position_of("F x") == 2);          // unbound variable
    CHECK(position_of("F a b") == 4);        // binary predicate
    CHECK(position_of("Fab") == 2);          // fused binary predicate
    CHECK(position_of("F a and G a") == 4);  // unknown token
    CHECK(position_of("(x): F x ->") == 11);
    CHECK(position_of("F a % G a") == 4);
    CHECK(position_of("E a") == 0);
    CHECK(position_of("(x): (x): F x") == 6);
    CHECK_THROWS_AS(parse_formula("F v"), ParseError);
    CHECK_THROWS_AS(parse_formula(""), ParseError);
}

TEST_CASE("render_formula: examples") {
    CHECK(render_formula(Formula::forall('x', Formula::implication(atom('F', 'x'), atom('G', 'x')))) == "(x): F x -> G x");
    CHECK(render_formula(atom('F', 'a')) == "F a");
    CHECK(render_formula(Formula::negation(atom('F', 'a'))) == "not F a");
    CHECK(render_formula(parse_formula("(x): Fx -> (G x v H x)")) == "(x): F x -> (G x v H x)");
    CHECK(render_formula(parse_formula("(x): Fx -> (G x v H x)")) == "(x): F x -> (G x v H x)");
    // a quantifier that is not in tail position is bracketed
    const auto f = Formula::conjunction(Formula::forall('x', atom('F', 'x')), atom('G', 'a'));
    CHECK(render_formula(f) == "((x): F x) & G a");
    CHECK(parse_formula(render_formula(f)) == f);
}

TEST_CASE("round trip: parse . render = id on fuzzed trees") {
    std::mt19937_64 rng(7);
    testing::FormulaGen gen;
    gen.predicates = "FGHIJ";
    gen.constants = "abc";
    gen.max_depth = 6;
    for (int i = 0; i < 10000; ++i) {
        const Formula f = gen.closed(rng);
        const std::string text = render_formula(f);
        INFO(text);
        REQUIRE(parse_formula(text) == f);
    }
}

TEST_CASE("check_entailment: examples") {
    CHECK(formula::check_entailment(parse_all({"(x): Fx -> (Gx v Hx)", "(x): Gx -> not Ix", "(x): Hx -> not Ix"}),
                                    parse_formula("(x): Fx -> not Ix")));
    CHECK(formula::check_entailment(parse_all({"F a", "(x): F x -> G x"}), parse_formula("G a")));
    CHECK_FALSE(formula::check_entailment(parse_all({"F a"}), parse_formula("G a")));
    CHECK(formula::check_entailment({}, parse_formula("(x): F x -> F x")));
}

TEST_CASE("check_satisfiable: examples") {
    CHECK_FALSE(formula::check_satisfiable(parse_all({"F a", "not F a"})));
    CHECK(formula::check_satisfiable(parse_all({"(x): F x -> G x"})));
    const auto set = parse_all({"(x): Fx -> Gx", "(Ex): Fx", "(x): not G x"});
    // expected value from the brute-force interpreter (domains up to 2^2 + 0)
    REQUIRE_FALSE(testing::brute_force_satisfiable(set));
    CHECK_FALSE(formula::check_satisfiable(set));
}

TEST_CASE("open formulas are outside the supported fragment") {
    const Formula open = atom('F', 'x');
    CHECK_THROWS_AS(formula::check_satisfiable(std::vector<Formula>{open}), UnsupportedFragmentError);
}

TEST_CASE("oracle equivalence on random formula sets") {
    std::mt19937_64 rng(2024);
    testing::FormulaGen gen;
    gen.max_depth = 4;
    int entailed = 0;
    for (int i = 0; i < 250; ++i) {
        std::uniform_int_distribution<int> kdist(1, 3), mdist(0, 2), ndist(0, 3);
        gen.predicates = std::string("FGH").substr(0, static_cast<std::size_t>(kdist(rng)));
        gen.constants = std::string("ab").substr(0, static_cast<std::size_t>(mdist(rng)));
        std::vector<Formula> premises;
        const int n = ndist(rng);
        for (int j = 0; j < n; ++j) premises.push_back(gen.closed(rng));
        const Formula conclusion = gen.closed(rng);
        const bool expected = testing::brute_force_entails(premises, conclusion);
        entailed += expected ? 1 : 0;
        std::string shown;
        for (auto& p : premises) shown += render_formula(p) + " ; ";
        INFO(shown << " |= " << render_formula(conclusion));
        REQUIRE(formula::check_entailment(premises, conclusion) == expected);
    }
    CHECK(entailed > 10);
}

TEST_CASE("oracle equivalence on flat formula sets") {
    std::mt19937_64 rng(31337);
    testing::FormulaGen gen;
    gen.flat = true;
    gen.max_depth = 5;
    int entailed = 0;
    for (int i = 0; i < 400; ++i) {
        std::uniform_int_distribution<int> kdist(1, 3), mdist(0, 2), ndist(0, 4);
        gen.predicates = std::string("FGH").substr(0, static_cast<std::size_t>(kdist(rng)));
        gen.constants = std::string("ab").substr(0, static_cast<std::size_t>(mdist(rng)));
        std::vector<Formula> premises;
        const int n = ndist(rng);
        for (int j = 0; j < n; ++j) premises.push_back(gen.closed(rng));
        const Formula conclusion = gen.closed(rng);
        const bool expected = testing::brute_force_entails(premises, conclusion);
        entailed += expected ? 1 : 0;
        std::string shown;
        for (auto& p : premises) shown += render_formula(p) + " ; ";
        INFO(shown << " |= " << render_formula(conclusion));
        REQUIRE(formula::check_entailment(premises, conclusion) == expected);
    }
    CHECK(entailed > 10);
}

TEST_CASE("monotonicity and self-entailment") {
    std::mt19937_64 rng(99);
    testing::FormulaGen gen;
    gen.predicates = "FGHI";
    gen.constants = "abc";
    for (int i = 0; i < 300; ++i) {
        const Formula c = gen.closed(rng);
        CHECK(formula::check_entailment(std::vector<Formula>{c}, c));
        std::vector<Formula> premises{gen.closed(rng), gen.closed(rng)};
        if (formula::check_entailment(premises, c)) {
            premises.push_back(gen.closed(rng));
            CHECK(formula::check_entailment(premises, c));
        }
    }
}

TEST_CASE("larger signatures stay tractable") {
    // a 12-predicate hypothetical-syllogism chain
    std::vector<Formula> premises;
    const std::string preds = "FGHIJKLMNOPQ";
    for (std::size_t i = 0; i + 1 < preds.size(); ++i) {
        premises.push_back(Formula::forall('x', Formula::implication(atom(preds[i], 'x'), atom(preds[i + 1], 'x'))));
    }
    premises.push_back(atom('F', 'a'));
    CHECK(formula::check_entailment(premises, atom('Q', 'a')));
    CHECK_FALSE(formula::check_entailment(premises, atom('Q', 'b')));
}

TEST_CASE("unify and canonical shapes") {
    formula::Binding b;
    CHECK(formula::unify(parse_formula("(x): F x -> G x"), parse_formula("(x): H x -> F x"), b));
    CHECK(b.at('F') == 'H');
    CHECK(b.at('G') == 'F');
    formula::Binding c;
    CHECK_FALSE(formula::unify(parse_formula("(x): F x -> F x"), parse_formula("(x): H x -> G x"), c));
    formula::Binding d;
    CHECK_FALSE(formula::unify(parse_formula("F a"), parse_formula("(x): F x"), d));

    formula::Binding orig;
    const auto shape = formula::canonical_shape(parse_formula("(x): K x -> not (M x & K x)"), &orig);
    CHECK(render_formula(shape) == "(x): F x -> not (G x & F x)");
    CHECK(orig.at('F') == 'K');
    CHECK(orig.at('G') == 'M');
}
