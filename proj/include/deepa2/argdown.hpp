#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deepa2::argdown {

struct Statement {
    int number = 0;
    std::string text;

    friend bool operator==(const Statement&, const Statement&) = default;
};

// One "--" block. A bare "----" separator leaves the scheme absent and takes
// the previous conclusion plus every statement written since it as premises.
struct InferenceStep {
    std::optional<std::string> scheme;
    std::optional<std::string> variant;
    std::vector<int> from;
    int derives = 0;

    friend bool operator==(const InferenceStep&, const InferenceStep&) = default;
};

struct Argument {
    std::vector<Statement> statements;
    std::vector<InferenceStep> inferences;

    const Statement* statement(int number) const;
    const InferenceStep* inference_deriving(int number) const;
    bool is_derived(int number) const { return inference_deriving(number) != nullptr; }

    friend bool operator==(const Argument&, const Argument&) = default;
};

// Throws ParseError; the position is the byte offset of the offending line.
Argument parse_argdown(std::string_view text);
std::string render_argdown(const Argument& arg);

// Structural checks shared by the parser and by code that builds arguments
// directly. Throws ParseError with position 0.
void validate(const Argument& arg);

// Statements never derived, in numeric order.
std::vector<Statement> premises_of(const Argument& arg);
const Statement& final_conclusion_of(const Argument& arg);
// Derived statements other than the final one.
std::vector<Statement> intermediate_conclusions_of(const Argument& arg);

// The from-list a bare separator before `derives` stands for.
std::vector<int> implicit_from(const Argument& arg, int derives);

}  // namespace deepa2::argdown
