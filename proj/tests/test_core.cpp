#include "doctest.h"

#include "deepa2/core.hpp"
#include "deepa2/errors.hpp"
#include "deepa2/text.hpp"
#include "support/appendix_record.hpp"

#include <random>
#include <sstream>

using namespace deepa2;

TEST_CASE("dimension keywords") {
    std::set<std::string_view> seen;
    for (Dim d : kAllDims) {
        seen.insert(keyword(d));
        CHECK(dim_from_keyword(keyword(d)) == d);
        CHECK(dim_from_letter(letter(d)) == d);
    }
    CHECK(seen.size() == 9);
    CHECK(keyword(Dim::F) == "premises_form");
    CHECK_FALSE(dim_from_keyword("formalize").has_value());
}

TEST_CASE("serialize_dimension: worked record") {
    const auto r = testing::dilemma_record();
    CHECK(serialize_dimension(r, Dim::K) ==
          "F: admirer of Chico | G: admirer of Laguna Beach | H: visitor of Stockton | I: visitor of Monterey");
    CHECK(serialize_dimension(r, Dim::F) ==
          "(x): Fx -> (G x v H x) (ref: (1)) | (x): G x -> not I x (ref: (2)) | (x): H x -> not I x (ref: (3))");
    CHECK(serialize_dimension(r, Dim::R) == "loving Laguna Beach is sufficient for not having visited Monterey (ref: (2))");
    CHECK(serialize_dimension(r, Dim::A) == testing::kDilemmaArgdown);
}

TEST_CASE("serialize_dimension: trivial lists and absent dimensions") {
    DeepA2Record r;
    r.reasons = StatementList{};
    CHECK(serialize_dimension(r, Dim::R) == "");
    r.premises = StatementList{{"p", 1}};
    CHECK(serialize_dimension(r, Dim::P) == "p (ref: (1))");
    CHECK_THROWS_AS(serialize_dimension(r, Dim::J), MissingDimensionError);
}

TEST_CASE("parse_dimension: examples") {
    auto r = std::get<StatementList>(
        parse_dimension("it is wrong to intentionally kill innocent human beings (ref: (1))", Dim::R));
    REQUIRE(r.size() == 1);
    CHECK(r[0].text == "it is wrong to intentionally kill innocent human beings");
    CHECK(r[0].ref == 1);
    CHECK(std::get<StatementList>(parse_dimension("", Dim::R)).empty());

    auto p = std::get<StatementList>(parse_dimension("a | b", Dim::P));
    REQUIRE(p.size() == 2);
    CHECK_FALSE(p[0].ref.has_value());
    CHECK_FALSE(p[1].ref.has_value());
    DeepA2Record rec;
    rec.premises = p;
    CHECK(serialize_dimension(rec, Dim::P) == "a | b");
}

TEST_CASE("parse_dimension: malformed refs report positions") {
    auto position_of = [](const char* text) -> std::size_t {
        try {
            parse_dimension(text, Dim::R);
        } catch (const ParseError& e) {
            return e.position();
        }
        FAIL("expected a parse error for " << text);
        return 0;
    };
    CHECK(position_of("abc (ref: 1)") == 4);
    CHECK(position_of("abc (ref: (1)) | def (ref: (x))") == 21);
    CHECK(position_of("abc (ref: (0))") == 4);
    CHECK(position_of("abc (ref: (2)) trailing") == 4);
    CHECK(position_of("a |  | b") == 3);
    CHECK_THROWS_AS(parse_dimension("(x): F x -> (ref: (1))", Dim::F), ParseError);
    CHECK_THROWS_AS(parse_dimension("F: a | F: b", Dim::K), ParseError);
    CHECK_THROWS_AS(parse_dimension("no colon here", Dim::K), ParseError);
}

TEST_CASE("escaped pipes survive a round trip") {
    DeepA2Record r;
    r.premises = StatementList{{"either a | or b", 1}, {"c", std::nullopt}};
    const auto text = serialize_dimension(r, Dim::P);
    CHECK(text == "either a \\| or b (ref: (1)) | c");
    CHECK(std::get<StatementList>(parse_dimension(text, Dim::P)) == *r.premises);
}

TEST_CASE("whitespace is normalized on parse") {
    auto items = std::get<StatementList>(parse_dimension("  a   b  (ref: (3))|c\t d ", Dim::R));
    REQUIRE(items.size() == 2);
    CHECK(items[0].text == "a b");
    CHECK(items[0].ref == 3);
    CHECK(items[1].text == "c d");
}

TEST_CASE("classify_subsets: examples") {
    RecordMeta simple_plain;
    simple_plain.n_inference_steps = 1;
    CHECK(classify_subsets(simple_plain) == std::set<Subset>{Subset::Simple, Subset::Plain});

    RecordMeta complex;
    complex.n_inference_steps = 4;
    complex.n_distractors = 2;
    complex.uses_complex_schemes = true;
    CHECK(classify_subsets(complex) == std::set<Subset>{Subset::Complex, Subset::ComplexAndMutilated});

    RecordMeta none;
    none.n_inference_steps = 2;
    none.n_implicit_premises = 1;
    none.n_distractors = 1;
    CHECK(classify_subsets(none).empty());

    RecordMeta mutilated;
    mutilated.n_inference_steps = 2;
    mutilated.n_implicit_premises = 2;
    mutilated.n_implicit_conclusions = 1;
    mutilated.n_distractors = 2;
    CHECK(classify_subsets(mutilated) == std::set<Subset>{Subset::Mutilated});
    mutilated.final_conclusion_explicit = false;
    CHECK(classify_subsets(mutilated).empty());
}

TEST_CASE("subset tags stay mutually exclusive") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> steps(1, 4), small(0, 3), coin(0, 1);
    for (int i = 0; i < 2000; ++i) {
        RecordMeta m;
        m.n_inference_steps = steps(rng);
        m.n_implicit_premises = small(rng);
        m.n_implicit_conclusions = small(rng);
        m.n_distractors = small(rng);
        m.final_conclusion_explicit = coin(rng);
        m.uses_complex_schemes = coin(rng);
        const auto tags = classify_subsets(m);
        CHECK_FALSE((tags.count(Subset::Plain) && tags.count(Subset::Mutilated)));
        CHECK_FALSE((tags.count(Subset::Simple) && tags.count(Subset::Complex)));
    }
}

TEST_CASE("json lines round trip") {
    auto r = testing::dilemma_record();
    r.meta.label = "valid";
    const auto line = to_json_line(r);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(from_json_line(line) == r);

    DeepA2Record partial;
    partial.source = "Only a source.";
    partial.meta.id = "p1";
    const auto pline = to_json_line(partial);
    CHECK(pline.find("reasons") == std::string::npos);
    CHECK(from_json_line(pline) == partial);

    std::stringstream ss;
    write_corpus(ss, {r, partial});
    const auto back = read_corpus(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == r);
    CHECK(back[1] == partial);
    CHECK_THROWS_AS(from_json_line("{not json"), ParseError);
}

TEST_CASE("dangling refs are reported") {
    auto r = testing::dilemma_record();
    CHECK(dangling_refs(r).empty());
    r.reasons->push_back({"stray", 9});
    CHECK(dangling_refs(r) == std::vector<std::string>{"reasons: (9)"});
}

TEST_CASE("round trip over randomized statement lists") {
    std::mt19937_64 rng(11);
    const std::vector<std::string> words{"alpha", "beta", "gamma", "|", "x", "(1)", "not", "Tracy", "Monterey,"};
    std::uniform_int_distribution<std::size_t> w(0, words.size() - 1);
    std::uniform_int_distribution<int> len(1, 8), n(0, 5), ref(0, 9);
    for (int i = 0; i < 1000; ++i) {
        StatementList items;
        const int count = n(rng);
        for (int j = 0; j < count; ++j) {
            std::vector<std::string> toks;
            const int l = len(rng);
            for (int k = 0; k < l; ++k) toks.push_back(words[w(rng)]);
            QuotedStatement qs{text::join(toks, " "), std::nullopt};
            if (int rr = ref(rng); rr > 0) qs.ref = rr;
            items.push_back(qs);
        }
        DeepA2Record rec;
        rec.reasons = items;
        const auto s = serialize_dimension(rec, Dim::R);
        INFO(s);
        REQUIRE(std::get<StatementList>(parse_dimension(s, Dim::R)) == items);
    }
}
