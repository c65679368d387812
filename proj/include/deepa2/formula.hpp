#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deepa2::formula {

// A term is a variable (x, y, z) or an individual constant (any other
// lowercase letter except "v", which is the disjunction token).
struct Term {
    char name = 'a';

    bool is_variable() const noexcept { return name == 'x' || name == 'y' || name == 'z'; }
    friend bool operator==(const Term&, const Term&) = default;
};

bool is_predicate_letter(char c) noexcept;
bool is_constant_letter(char c) noexcept;
bool is_variable_letter(char c) noexcept;

enum class Kind { Atom, Not, And, Or, Implies, Iff, ForAll, Exists };

class Formula;

namespace detail {
struct Node;
}

// Immutable monadic first-order formula. Copies share structure.
class Formula {
public:
    static Formula atom(char predicate, Term term);
    static Formula negation(Formula f);
    static Formula conjunction(Formula l, Formula r);
    static Formula disjunction(Formula l, Formula r);
    static Formula implication(Formula l, Formula r);
    static Formula equivalence(Formula l, Formula r);
    static Formula forall(char var, Formula body);
    static Formula exists(char var, Formula body);
    static Formula binary(Kind kind, Formula l, Formula r);

    Kind kind() const noexcept;
    // Atom only.
    char predicate() const noexcept;
    Term term() const noexcept;
    // Quantifiers only.
    char variable() const noexcept;
    // Not / quantifier body: child(0). Binary connectives: child(0), child(1).
    const Formula& child(std::size_t i) const;
    std::size_t arity() const noexcept;

    bool is_binary() const noexcept;
    bool is_quantifier() const noexcept;

    friend bool operator==(const Formula& a, const Formula& b);

private:
    explicit Formula(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const detail::Node> node_;
};

namespace detail {
struct Node {
    Kind kind = Kind::Atom;
    char symbol = 0;  // predicate letter or quantified variable
    Term term{};
    std::vector<Formula> children;
};
}  // namespace detail

// Parses the formalization syntax: quantifier prefixes "(x):" and "(Ex):" scope
// over the rest of the expression; connectives by decreasing binding strength
// are not, &, v, ->, <->; "->" is right-associative, the others associate
// left. Atoms are written "F x" or fused "Fx". Throws ParseError.
Formula parse_formula(std::string_view text);

// Canonical spaced rendering (never fused); parse_formula inverts it.
std::string render_formula(const Formula& f);

std::set<char> predicates_of(const Formula& f);
std::set<char> constants_of(const Formula& f);
std::set<char> free_variables_of(const Formula& f);
bool is_closed(const Formula& f);
bool contains_negation(const Formula& f);
// True for &, v and <-> anywhere in the formula.
bool contains_composition(const Formula& f);
std::size_t depth_of(const Formula& f);

// Satisfiability of a set of closed monadic formulas. Searches the finite
// interpretations whose domain size is bounded by 2^k + m (k predicates,
// m constants); for the monadic fragment without equality this bound makes
// the search complete. Throws UnsupportedFragmentError for open formulas or
// more than kMaxPredicates predicates.
bool check_satisfiable(std::span<const Formula> formulas);

// premises entail conclusion iff premises + {not conclusion} is unsatisfiable.
bool check_entailment(std::span<const Formula> premises, const Formula& conclusion);

inline constexpr std::size_t kMaxPredicates = 20;

// Pattern unification: predicate letters, constants and variables occurring in
// `pattern` act as metavariables. `binding` is extended in place; on failure it
// is left in an unspecified state.
using Binding = std::map<char, char>;
bool unify(const Formula& pattern, const Formula& target, Binding& binding);

// Replaces every symbol of `f` that has an entry in `binding`.
Formula substitute(const Formula& f, const Binding& binding);

// Renames predicates in order of first occurrence to F, G, H, ... and
// constants to a, b, ... and bound variables to x, y, z. The inverse renaming is
// written to `original`.
Formula canonical_shape(const Formula& f, Binding* original = nullptr);

}  // namespace deepa2::formula
