#include "deepa2/formula.hpp"

#include "deepa2/errors.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace deepa2::formula {

bool is_predicate_letter(char c) noexcept { return c >= 'A' && c <= 'Z' && c != 'E'; }
bool is_variable_letter(char c) noexcept { return c == 'x' || c == 'y' || c == 'z'; }
bool is_constant_letter(char c) noexcept { return c >= 'a' && c <= 'z' && c != 'v' && !is_variable_letter(c); }

namespace {

std::shared_ptr<const detail::Node> make_node(Kind kind, char symbol, Term term, std::vector<Formula> children) {
    auto n = std::make_shared<detail::Node>();
    n->kind = kind;
    n->symbol = symbol;
    n->term = term;
    n->children = std::move(children);
    return n;
}

}  // namespace

Formula Formula::atom(char predicate, Term term) { return Formula(make_node(Kind::Atom, predicate, term, {})); }
Formula Formula::negation(Formula f) { return Formula(make_node(Kind::Not, 0, {}, {std::move(f)})); }
Formula Formula::binary(Kind kind, Formula l, Formula r) {
    return Formula(make_node(kind, 0, {}, {std::move(l), std::move(r)}));
}
Formula Formula::conjunction(Formula l, Formula r) { return binary(Kind::And, std::move(l), std::move(r)); }
Formula Formula::disjunction(Formula l, Formula r) { return binary(Kind::Or, std::move(l), std::move(r)); }
Formula Formula::implication(Formula l, Formula r) { return binary(Kind::Implies, std::move(l), std::move(r)); }
Formula Formula::equivalence(Formula l, Formula r) { return binary(Kind::Iff, std::move(l), std::move(r)); }
Formula Formula::forall(char var, Formula body) { return Formula(make_node(Kind::ForAll, var, {}, {std::move(body)})); }
Formula Formula::exists(char var, Formula body) { return Formula(make_node(Kind::Exists, var, {}, {std::move(body)})); }

Kind Formula::kind() const noexcept { return node_->kind; }
char Formula::predicate() const noexcept { return node_->symbol; }
Term Formula::term() const noexcept { return node_->term; }
char Formula::variable() const noexcept { return node_->symbol; }
const Formula& Formula::child(std::size_t i) const { return node_->children.at(i); }
std::size_t Formula::arity() const noexcept { return node_->children.size(); }
bool Formula::is_binary() const noexcept { return node_->children.size() == 2; }
bool Formula::is_quantifier() const noexcept { return node_->kind == Kind::ForAll || node_->kind == Kind::Exists; }

bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind() || a.node_->symbol != b.node_->symbol) return false;
    if (a.kind() == Kind::Atom) return a.term() == b.term();
    if (a.arity() != b.arity()) return false;
    for (std::size_t i = 0; i < a.arity(); ++i) {
        if (!(a.child(i) == b.child(i))) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { LParen, RParen, Colon, Arrow, DoubleArrow, Amp, Not, Or, Pred, TermTok, End };

struct Token {
    Tok kind;
    char symbol = 0;
    std::size_t pos = 0;
};

std::vector<Token> lex(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '(') { out.push_back({Tok::LParen, 0, i}); ++i; continue; }
        if (c == ')') { out.push_back({Tok::RParen, 0, i}); ++i; continue; }
        if (c == ':') { out.push_back({Tok::Colon, 0, i}); ++i; continue; }
        if (c == '&') { out.push_back({Tok::Amp, 0, i}); ++i; continue; }
        if (s.substr(i, 3) == "<->") { out.push_back({Tok::DoubleArrow, 0, i}); i += 3; continue; }
        if (s.substr(i, 2) == "->") { out.push_back({Tok::Arrow, 0, i}); i += 2; continue; }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) ++j;
            const std::string_view word = s.substr(i, j - i);
            if (word == "not") {
                out.push_back({Tok::Not, 0, i});
            } else if (word == "v") {
                out.push_back({Tok::Or, 0, i});
            } else if (word.size() == 1 && std::isupper(static_cast<unsigned char>(c))) {
                out.push_back({Tok::Pred, c, i});
            } else if (word.size() == 1) {
                out.push_back({Tok::TermTok, c, i});
            } else if (std::isupper(static_cast<unsigned char>(word[0])) &&
                       std::all_of(word.begin() + 1, word.end(), [](char ch) { return std::islower(static_cast<unsigned char>(ch)); })) {
                // Fused atom "Fx"; extra term letters are reported by the parser.
                out.push_back({Tok::Pred, word[0], i});
                for (std::size_t k = 1; k < word.size(); ++k) out.push_back({Tok::TermTok, word[k], i + k});
            } else {
                throw ParseError("unknown token '" + std::string(word) + "'", i);
            }
            i = j;
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
    out.push_back({Tok::End, 0, s.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Formula parse_all() {
        Formula f = parse_formula();
        if (peek().kind != Tok::End) {
            if (peek().kind == Tok::TermTok) throw ParseError("binary predicate syntax is not supported", peek().pos);
            throw ParseError("unexpected token", peek().pos);
        }
        return f;
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    void expect(Tok kind, const char* what) {
        if (peek().kind != kind) throw ParseError(std::string("expected ") + what, peek().pos);
        take();
    }

    // "(" [E] var ")" ":" — returns the prefix length in tokens, or 0.
    std::size_t quantifier_prefix() const {
        if (peek().kind != Tok::LParen) return 0;
        std::size_t k = 1;
        if (peek(k).kind == Tok::Pred && peek(k).symbol == 'E') ++k;
        if (peek(k).kind != Tok::TermTok || !is_variable_letter(peek(k).symbol)) return 0;
        if (peek(k + 1).kind != Tok::RParen || peek(k + 2).kind != Tok::Colon) return 0;
        return k + 3;
    }

    Formula parse_formula() { return parse_iff(); }

    Formula parse_iff() {
        Formula left = parse_implies();
        while (peek().kind == Tok::DoubleArrow) {
            take();
            left = Formula::equivalence(left, parse_implies());
        }
        return left;
    }

    Formula parse_implies() {
        Formula left = parse_or();
        if (peek().kind == Tok::Arrow) {
            take();
            return Formula::implication(left, parse_implies());
        }
        return left;
    }

    Formula parse_or() {
        Formula left = parse_and();
        while (peek().kind == Tok::Or) {
            take();
            left = Formula::disjunction(left, parse_and());
        }
        return left;
    }

    Formula parse_and() {
        Formula left = parse_unary();
        while (peek().kind == Tok::Amp) {
            take();
            left = Formula::conjunction(left, parse_unary());
        }
        return left;
    }

    Formula parse_unary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Not:
                take();
                return Formula::negation(parse_unary());
            case Tok::LParen: {
                if (std::size_t len = quantifier_prefix()) {
                    const bool existential = len == 5;
                    const Token var_tok = peek(existential ? 2 : 1);
                    const char var = var_tok.symbol;
                    if (std::find(bound_.begin(), bound_.end(), var) != bound_.end()) {
                        throw ParseError(std::string("variable '") + var + "' is already bound", var_tok.pos);
                    }
                    pos_ += len;
                    bound_.push_back(var);
                    // The quantifier scopes over the whole remaining expression.
                    Formula body = parse_formula();
                    bound_.pop_back();
                    return existential ? Formula::exists(var, body) : Formula::forall(var, body);
                }
                take();
                Formula inner = parse_formula();
                expect(Tok::RParen, "')'");
                return inner;
            }
            case Tok::Pred: {
                if (t.symbol == 'E') throw ParseError("'E' is reserved for existential quantifiers", t.pos);
                take();
                const Token& term = peek();
                if (term.kind != Tok::TermTok) throw ParseError("expected a term after predicate", term.pos);
                take();
                if (term.symbol == 'v') throw ParseError("'v' cannot be used as a term", term.pos);
                if (is_variable_letter(term.symbol) &&
                    std::find(bound_.begin(), bound_.end(), term.symbol) == bound_.end()) {
                    throw ParseError(std::string("unbound variable '") + term.symbol + "'", term.pos);
                }
                if (peek().kind == Tok::TermTok) throw ParseError("binary predicate syntax is not supported", peek().pos);
                return Formula::atom(t.symbol, Term{term.symbol});
            }
            case Tok::End:
                throw ParseError("unexpected end of formula", t.pos);
            default:
                throw ParseError("unexpected token", t.pos);
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<char> bound_;
};

const char* connective(Kind k) {
    switch (k) {
        case Kind::And: return " & ";
        case Kind::Or: return " v ";
        case Kind::Implies: return " -> ";
        case Kind::Iff: return " <-> ";
        default: return "";
    }
}

// `tail` is true when nothing follows the rendered text at the current
// parenthesis level, so a quantifier may extend to the end unbracketed.
void render(const Formula& f, bool tail, std::string& out) {
    switch (f.kind()) {
        case Kind::Atom:
            out.push_back(f.predicate());
            out.push_back(' ');
            out.push_back(f.term().name);
            return;
        case Kind::Not: {
            out.append("not ");
            const Formula& c = f.child(0);
            const bool paren = c.is_binary();
            if (paren) {
                out.push_back('(');
                render(c, true, out);
                out.push_back(')');
            } else {
                render(c, tail, out);
            }
            return;
        }
        case Kind::ForAll:
        case Kind::Exists: {
            if (!tail) out.push_back('(');
            out.append(f.kind() == Kind::Exists ? "(E" : "(");
            out.push_back(f.variable());
            out.append("): ");
            render(f.child(0), true, out);
            if (!tail) out.push_back(')');
            return;
        }
        default: {
            // Mixed binary connectives are always bracketed ("F x -> (G x v H x)");
            // chains of one connective only where associativity requires it.
            const Formula& l = f.child(0);
            const Formula& r = f.child(1);
            const bool right_assoc = f.kind() == Kind::Implies;
            const bool lparen = l.is_binary() && (l.kind() != f.kind() || right_assoc);
            const bool rparen = r.is_binary() && (r.kind() != f.kind() || !right_assoc);
            if (lparen) out.push_back('(');
            render(l, lparen, out);
            if (lparen) out.push_back(')');
            out.append(connective(f.kind()));
            if (rparen) out.push_back('(');
            render(r, rparen || tail, out);
            if (rparen) out.push_back(')');
            return;
        }
    }
}

void collect(const Formula& f, std::set<char>& preds, std::set<char>& consts, std::set<char>& free, std::vector<char>& bound) {
    switch (f.kind()) {
        case Kind::Atom: {
            preds.insert(f.predicate());
            const char t = f.term().name;
            if (is_variable_letter(t)) {
                if (std::find(bound.begin(), bound.end(), t) == bound.end()) free.insert(t);
            } else {
                consts.insert(t);
            }
            return;
        }
        case Kind::ForAll:
        case Kind::Exists:
            bound.push_back(f.variable());
            collect(f.child(0), preds, consts, free, bound);
            bound.pop_back();
            return;
        default:
            for (std::size_t i = 0; i < f.arity(); ++i) collect(f.child(i), preds, consts, free, bound);
    }
}

struct Symbols {
    std::set<char> preds, consts, free;
};

Symbols symbols_of(const Formula& f) {
    Symbols s;
    std::vector<char> bound;
    collect(f, s.preds, s.consts, s.free, bound);
    return s;
}

bool any_node(const Formula& f, bool (*pred)(Kind)) {
    if (pred(f.kind())) return true;
    for (std::size_t i = 0; i < f.arity(); ++i) {
        if (any_node(f.child(i), pred)) return true;
    }
    return false;
}

char symbol_class(char c) {
    if (is_variable_letter(c)) return 'x';
    if (c >= 'a' && c <= 'z') return 'a';
    return 'F';
}

bool bind(char from, char to, Binding& binding) {
    if (symbol_class(from) != symbol_class(to)) return false;
    auto [it, inserted] = binding.emplace(from, to);
    return inserted || it->second == to;
}

char lookup(const Binding& b, char c) {
    auto it = b.find(c);
    return it == b.end() ? c : it->second;
}

constexpr std::string_view kCanonicalPredicates = "FGHIJKLMNOPQRSTUVWXYZABCD";
constexpr std::string_view kCanonicalConstants = "abcdefghijklmnopqrstuw";

void canonical_walk(const Formula& f, Binding& forward) {
    switch (f.kind()) {
        case Kind::Atom: {
            if (!forward.contains(f.predicate())) {
                std::size_t n = 0;
                for (auto& [k, v] : forward) n += std::isupper(static_cast<unsigned char>(k)) ? 1 : 0;
                forward[f.predicate()] = kCanonicalPredicates.at(n);
            }
            const char t = f.term().name;
            if (!is_variable_letter(t) && !forward.contains(t)) {
                std::size_t n = 0;
                for (auto& [k, v] : forward) n += is_constant_letter(k) ? 1 : 0;
                forward[t] = kCanonicalConstants.at(n);
            }
            return;
        }
        case Kind::ForAll:
        case Kind::Exists: {
            if (!forward.contains(f.variable())) {
                std::size_t n = 0;
                for (auto& [k, v] : forward) n += is_variable_letter(k) ? 1 : 0;
                forward[f.variable()] = "xyz"[n];
            }
            canonical_walk(f.child(0), forward);
            return;
        }
        default:
            for (std::size_t i = 0; i < f.arity(); ++i) canonical_walk(f.child(i), forward);
    }
}

}  // namespace

Formula parse_formula(std::string_view text) { return Parser(lex(text)).parse_all(); }

std::string render_formula(const Formula& f) {
    std::string out;
    render(f, true, out);
    return out;
}

std::set<char> predicates_of(const Formula& f) { return symbols_of(f).preds; }
std::set<char> constants_of(const Formula& f) { return symbols_of(f).consts; }
std::set<char> free_variables_of(const Formula& f) { return symbols_of(f).free; }
bool is_closed(const Formula& f) { return symbols_of(f).free.empty(); }

bool contains_negation(const Formula& f) {
    return any_node(f, [](Kind k) { return k == Kind::Not; });
}

bool contains_composition(const Formula& f) {
    return any_node(f, [](Kind k) { return k == Kind::And || k == Kind::Or || k == Kind::Iff; });
}

std::size_t depth_of(const Formula& f) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < f.arity(); ++i) d = std::max(d, depth_of(f.child(i)));
    return d + 1;
}

bool unify(const Formula& pattern, const Formula& target, Binding& binding) {
    if (pattern.kind() != target.kind()) return false;
    switch (pattern.kind()) {
        case Kind::Atom:
            return bind(pattern.predicate(), target.predicate(), binding) &&
                   bind(pattern.term().name, target.term().name, binding);
        case Kind::ForAll:
        case Kind::Exists:
            return bind(pattern.variable(), target.variable(), binding) && unify(pattern.child(0), target.child(0), binding);
        default:
            for (std::size_t i = 0; i < pattern.arity(); ++i) {
                if (!unify(pattern.child(i), target.child(i), binding)) return false;
            }
            return true;
    }
}

Formula substitute(const Formula& f, const Binding& b) {
    switch (f.kind()) {
        case Kind::Atom:
            return Formula::atom(lookup(b, f.predicate()), Term{lookup(b, f.term().name)});
        case Kind::Not:
            return Formula::negation(substitute(f.child(0), b));
        case Kind::ForAll:
            return Formula::forall(lookup(b, f.variable()), substitute(f.child(0), b));
        case Kind::Exists:
            return Formula::exists(lookup(b, f.variable()), substitute(f.child(0), b));
        default:
            return Formula::binary(f.kind(), substitute(f.child(0), b), substitute(f.child(1), b));
    }
}

Formula canonical_shape(const Formula& f, Binding* original) {
    Binding forward;
    canonical_walk(f, forward);
    if (original) {
        original->clear();
        for (auto& [from, to] : forward) (*original)[to] = from;
    }
    return substitute(f, forward);
}

}  // namespace deepa2::formula
