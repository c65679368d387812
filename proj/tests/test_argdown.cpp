#include "doctest.h"

#include "deepa2/argdown.hpp"
#include "deepa2/errors.hpp"
#include "support/appendix_record.hpp"

using namespace deepa2;
using namespace deepa2::argdown;

namespace {

std::vector<int> numbers(const std::vector<Statement>& ss) {
    std::vector<int> out;
    for (const auto& s : ss) out.push_back(s.number);
    return out;
}

std::size_t error_position(const char* text) {
    try {
        parse_argdown(text);
    } catch (const ParseError& e) {
        return e.position();
    }
    FAIL("expected a parse error");
    return 0;
}

}  // namespace

TEST_CASE("parse_argdown: embryo argument") {
    const auto arg = parse_argdown(
        "(1) It is impermissible to kill innocent human beings.\n"
        "(2) Destroying a human embryo is killing an innocent human being.\n"
        "--\n"
        "with hypothetical syllogism from (1) (2)\n"
        "--\n"
        "(3) It is unethical to destroy human embryos.");
    REQUIRE(arg.statements.size() == 3);
    REQUIRE(arg.inferences.size() == 1);
    CHECK(arg.inferences[0].scheme == "hypothetical syllogism");
    CHECK_FALSE(arg.inferences[0].variant.has_value());
    CHECK(arg.inferences[0].from == std::vector<int>{1, 2});
    CHECK(arg.inferences[0].derives == 3);
}

TEST_CASE("parse_argdown: bare separator") {
    const char* text =
        "(1) Socrates is human.\n"
        "(2) Every human is mortal.\n"
        "----\n"
        "(3) Socrates is mortal.";
    const auto arg = parse_argdown(text);
    REQUIRE(arg.inferences.size() == 1);
    CHECK_FALSE(arg.inferences[0].scheme.has_value());
    CHECK(arg.inferences[0].from == std::vector<int>{1, 2});
    CHECK(arg.inferences[0].derives == 3);
    CHECK(render_argdown(arg) == text);
}

TEST_CASE("parse_argdown: variant and one-line form") {
    const auto arg = parse_argdown(testing::kDilemmaArgdown);
    CHECK(arg.inferences[0].scheme == "generalized dilemma");
    CHECK(arg.inferences[0].variant == "neg variant");
    CHECK(arg.inferences[0].from == std::vector<int>{1, 2, 3});
    CHECK(render_argdown(arg) == testing::kDilemmaArgdown);

    const auto one_line = parse_argdown("(1) a\n(2) b\n-- with modus ponens from (1) (2) --\n(3) c");
    CHECK(one_line.inferences[0].scheme == "modus ponens");
    CHECK(render_argdown(one_line) == "(1) a\n(2) b\n--\nwith modus ponens from (1) (2)\n--\n(3) c");
}

TEST_CASE("parse_argdown: errors") {
    CHECK_THROWS_WITH_AS(parse_argdown("(1) Socrates is human."), doctest::Contains("no inference"), ParseError);
    CHECK(error_position("(1) a\n(3) b") == 6);
    CHECK(error_position("(1) a\n(2) b\n--\nwith modus ponens from (1) (4)\n--\n(3) c") == 12);
    CHECK_THROWS_WITH_AS(parse_argdown("(1) a\n(2) b\n----\n(3) c\n(4) d"), doctest::Contains("missing final conclusion"),
                         ParseError);
    CHECK_THROWS_AS(parse_argdown("----\n(1) a"), ParseError);
    CHECK_THROWS_AS(parse_argdown("(1) a\n--\nwith x from (1)\n(2) b"), ParseError);
    CHECK_THROWS_AS(parse_argdown("(1) a\n----"), ParseError);
    CHECK_THROWS_AS(parse_argdown(""), ParseError);
}

TEST_CASE("premises and conclusions") {
    const auto dilemma = parse_argdown(testing::kDilemmaArgdown);
    CHECK(numbers(premises_of(dilemma)) == std::vector<int>{1, 2, 3});
    CHECK(final_conclusion_of(dilemma).number == 4);

    const auto chain = parse_argdown(
        "(1) a\n(2) b\n--\nwith modus ponens from (1) (2)\n--\n(3) c\n(4) d\n"
        "--\nwith modus ponens from (3) (4)\n--\n(5) e");
    CHECK(numbers(premises_of(chain)) == std::vector<int>{1, 2, 4});
    CHECK(numbers(intermediate_conclusions_of(chain)) == std::vector<int>{3});
    CHECK(final_conclusion_of(chain).number == 5);

    const auto single = parse_argdown("(1) a\n(2) b\n----\n(3) c");
    CHECK(numbers(premises_of(single)) == std::vector<int>{1, 2});
}

TEST_CASE("implicit from-lists follow the previous conclusion") {
    const auto arg = parse_argdown("(1) a\n(2) b\n----\n(3) c\n(4) d\n----\n(5) e");
    CHECK(arg.inferences[1].from == std::vector<int>{3, 4});
    Argument edited = arg;
    edited.inferences[1].from = {1, 4};
    const auto text = render_argdown(edited);
    CHECK(text == "(1) a\n(2) b\n----\n(3) c\n(4) d\n--\nfrom (1) (4)\n--\n(5) e");
    CHECK(parse_argdown(text) == edited);
}

TEST_CASE("wrapped statement lines are joined") {
    const auto arg = parse_argdown("(1) a long\n   statement\n(2) b\n----\n(3) c");
    CHECK(arg.statements[0].text == "a long statement");
}

TEST_CASE("validate mirrors the parser's structural rules") {
    Argument arg;
    arg.statements = {{1, "a"}, {2, "b"}};
    CHECK_THROWS_AS(validate(arg), ParseError);
    arg.inferences = {{std::nullopt, std::nullopt, {1, 2}, 2}};
    CHECK_THROWS_AS(validate(arg), ParseError);
    arg.inferences = {{std::nullopt, std::nullopt, {1}, 2}};
    CHECK_NOTHROW(validate(arg));
}
