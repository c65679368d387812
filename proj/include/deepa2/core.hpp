#pragma once

#include "deepa2/argdown.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace deepa2 {

// The nine dimensions of a multi-angular analysis.
enum class Dim { S, R, J, A, P, C, F, O, K };

inline constexpr std::array<Dim, 9> kAllDims{Dim::S, Dim::R, Dim::J, Dim::A, Dim::P,
                                             Dim::C, Dim::F, Dim::O, Dim::K};

// "source", "reasons", ..., "keys".
std::string_view keyword(Dim d);
std::optional<Dim> dim_from_keyword(std::string_view kw);
char letter(Dim d);
std::optional<Dim> dim_from_letter(char c);

struct QuotedStatement {
    std::string text;
    std::optional<int> ref;

    friend bool operator==(const QuotedStatement&, const QuotedStatement&) = default;
};

using StatementList = std::vector<QuotedStatement>;

// Predicate letters and individual constants mapped to their phrases.
using SignatureKeys = std::map<char, std::string>;

struct RecordMeta {
    std::string id;
    int n_inference_steps = 0;
    int n_implicit_premises = 0;
    int n_implicit_conclusions = 0;
    bool final_conclusion_explicit = true;
    int n_distractors = 0;
    bool uses_complex_schemes = false;
    std::string domain_tag;
    // Ground-truth label for imported RuleTaker-style records.
    std::optional<std::string> label;

    friend bool operator==(const RecordMeta&, const RecordMeta&) = default;
};

using DimensionValue = std::variant<std::string, StatementList, argdown::Argument, SignatureKeys>;

// A possibly partial analysis: any dimension may be absent.
struct DeepA2Record {
    std::optional<std::string> source;
    std::optional<StatementList> reasons;
    std::optional<StatementList> conjectures;
    std::optional<argdown::Argument> argdown;
    std::optional<StatementList> premises;
    std::optional<StatementList> conclusion;
    std::optional<StatementList> premises_form;
    std::optional<StatementList> conclusion_form;
    std::optional<SignatureKeys> keys;
    RecordMeta meta;

    bool has(Dim d) const;
    // Throws MissingDimensionError.
    DimensionValue get(Dim d) const;
    // Throws std::bad_variant_access when the value's alternative does not fit d.
    void set(Dim d, DimensionValue v);
    void clear(Dim d);

    friend bool operator==(const DeepA2Record&, const DeepA2Record&) = default;
};

// Plain-text rendering: list items joined by " | ", refs as " (ref: (n))",
// keys as "F: phrase | G: phrase". Throws MissingDimensionError.
std::string serialize_dimension(const DeepA2Record& record, Dim d);
std::string serialize_value(const DimensionValue& value);

// Inverse of serialize_dimension up to whitespace normalization. Formula
// dimensions are checked with the formula parser. Throws ParseError.
DimensionValue parse_dimension(std::string_view text, Dim d);

// Lenient list parsing for model output: never checks formulas.
StatementList parse_statement_list(std::string_view text);
SignatureKeys parse_keys(std::string_view text);
std::string serialize_statement_list(const StatementList& items);
std::string serialize_keys(const SignatureKeys& keys);

enum class Subset { Simple, Complex, Plain, Mutilated, ComplexAndMutilated };
std::string_view subset_name(Subset s);
std::set<Subset> classify_subsets(const RecordMeta& meta);

// Refs in R, J, P, C, F and O that do not name a statement of A. Empty when A
// is absent.
std::vector<std::string> dangling_refs(const DeepA2Record& record);

// JSON-lines corpus format: the nine keywords plus "meta"; absent dimensions
// are omitted.
std::string to_json_line(const DeepA2Record& record);
DeepA2Record from_json_line(std::string_view line);
std::vector<DeepA2Record> read_corpus(std::istream& in);
void write_corpus(std::ostream& out, const std::vector<DeepA2Record>& records);

}  // namespace deepa2
