// Small-model decision procedure for closed monadic formulas.
//
// Without equality, whether a set of monadic sentences holds in an
// interpretation depends only on which predicate profiles (subsets of the k
// predicates) are inhabited and on the profile of each constant. Every
// interpretation over a domain of size up to 2^k + m therefore collapses to a
// pair (inhabited profile set, constant profiles), and conversely each such
// pair is realised by a domain of at most 2^k elements. The search below
// encodes that pair space propositionally and solves it with a CDCL solver.

#include "deepa2/errors.hpp"
#include "deepa2/formula.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <unordered_map>

namespace deepa2::formula {

namespace {

// ---------------------------------------------------------------------------
// Propositional DAG with constant folding

struct PNode {
    enum class K { True, False, Var, Not, And, Or };
    K kind;
    int var = -1;
    std::vector<int> kids;
};

class PropGraph {
public:
    static constexpr int kTrue = 0;
    static constexpr int kFalse = 1;

    PropGraph() {
        nodes_.push_back({PNode::K::True, -1, {}});
        nodes_.push_back({PNode::K::False, -1, {}});
    }

    const PNode& at(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

    int var(int v) {
        auto [it, inserted] = var_nodes_.emplace(v, static_cast<int>(nodes_.size()));
        if (inserted) nodes_.push_back({PNode::K::Var, v, {}});
        return it->second;
    }

    int negate(int a) {
        if (a == kTrue) return kFalse;
        if (a == kFalse) return kTrue;
        if (at(a).kind == PNode::K::Not) return at(a).kids[0];
        auto [it, inserted] = not_nodes_.emplace(a, static_cast<int>(nodes_.size()));
        if (inserted) nodes_.push_back({PNode::K::Not, -1, {a}});
        return it->second;
    }

    int conj(std::vector<int> kids) { return nary(PNode::K::And, std::move(kids)); }
    int disj(std::vector<int> kids) { return nary(PNode::K::Or, std::move(kids)); }

private:
    int nary(PNode::K kind, std::vector<int> kids) {
        const int absorbing = kind == PNode::K::And ? kFalse : kTrue;
        const int neutral = kind == PNode::K::And ? kTrue : kFalse;
        std::vector<int> flat;
        flat.reserve(kids.size());
        for (int k : kids) {
            if (k == absorbing) return absorbing;
            if (k == neutral) continue;
            if (at(k).kind == kind) {
                flat.insert(flat.end(), at(k).kids.begin(), at(k).kids.end());
            } else {
                flat.push_back(k);
            }
        }
        std::sort(flat.begin(), flat.end());
        flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
        if (flat.empty()) return neutral;
        if (flat.size() == 1) return flat[0];
        nodes_.push_back({kind, -1, std::move(flat)});
        return static_cast<int>(nodes_.size()) - 1;
    }

    std::vector<PNode> nodes_;
    std::unordered_map<int, int> var_nodes_;
    std::unordered_map<int, int> not_nodes_;
};

// ---------------------------------------------------------------------------
// CDCL: two watched literals, first-UIP clause learning, non-chronological
// backjumping, activity-ordered branching with phase saving.
// Literals are +/-(v+1).

class Solver {
public:
    explicit Solver(int num_vars) { grow(static_cast<std::size_t>(num_vars) + 1); }

    int new_var() {
        grow(assign_.size() + 1);
        return static_cast<int>(assign_.size()) - 1;
    }

    void add_clause(std::vector<int> lits) {
        if (unsat_) return;
        std::sort(lits.begin(), lits.end());
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        for (int l : lits) {
            if (std::binary_search(lits.begin(), lits.end(), -l)) return;  // tautology
        }
        if (lits.empty()) {
            unsat_ = true;
            return;
        }
        if (lits.size() == 1) {
            units_.push_back(lits[0]);
            return;
        }
        clauses_.push_back(std::move(lits));
        attach(static_cast<int>(clauses_.size()) - 1);
    }

    bool solve() {
        if (unsat_) return false;
        for (int u : units_) {
            if (value(u) == -1) return false;
            if (value(u) == 0) enqueue(u, -1);
        }
        while (true) {
            const int conflict = propagate();
            if (conflict >= 0) {
                if (trail_lim_.empty()) return false;
                auto [learnt, back] = analyze(conflict);
                cancel_until(back);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], -1);
                } else {
                    clauses_.push_back(std::move(learnt));
                    const int id = static_cast<int>(clauses_.size()) - 1;
                    attach(id);
                    enqueue(clauses_.back()[0], id);
                }
                var_inc_ /= 0.95;
                continue;
            }
            const int v = pick_branch();
            if (v == 0) return true;
            trail_lim_.push_back(trail_.size());
            enqueue(phase_[static_cast<std::size_t>(v)] ? v : -v, -1);
        }
    }

private:
    void grow(std::size_t n) {
        assign_.resize(n, 0);
        level_.resize(n, 0);
        reason_.resize(n, -1);
        activity_.resize(n, 0.0);
        phase_.resize(n, 0);
        seen_.resize(n, 0);
        watches_.resize(2 * n);
    }

    static std::size_t var_of(int lit) { return static_cast<std::size_t>(std::abs(lit)); }
    static std::size_t index(int lit) { return 2 * var_of(lit) + (lit < 0 ? 1 : 0); }

    int value(int lit) const {
        const int8_t v = assign_[var_of(lit)];
        return lit > 0 ? v : -v;
    }

    void attach(int id) {
        const auto& c = clauses_[static_cast<std::size_t>(id)];
        watches_[index(c[0])].push_back(id);
        watches_[index(c[1])].push_back(id);
    }

    void enqueue(int lit, int reason) {
        const std::size_t v = var_of(lit);
        assign_[v] = lit > 0 ? 1 : -1;
        level_[v] = static_cast<int>(trail_lim_.size());
        reason_[v] = reason;
        trail_.push_back(lit);
    }

    void cancel_until(std::size_t level) {
        if (trail_lim_.size() <= level) return;
        const std::size_t pos = trail_lim_[level];
        while (trail_.size() > pos) {
            const std::size_t v = var_of(trail_.back());
            phase_[v] = assign_[v] > 0;
            assign_[v] = 0;
            reason_[v] = -1;
            trail_.pop_back();
        }
        trail_lim_.resize(level);
        head_ = std::min(head_, pos);
    }

    void bump(std::size_t v) {
        activity_[v] += var_inc_;
        if (activity_[v] > 1e100) {
            for (auto& a : activity_) a *= 1e-100;
            var_inc_ *= 1e-100;
        }
    }

    int pick_branch() const {
        int best = 0;
        double best_activity = -1;
        for (std::size_t v = 1; v < assign_.size(); ++v) {
            if (assign_[v] == 0 && activity_[v] > best_activity) {
                best = static_cast<int>(v);
                best_activity = activity_[v];
            }
        }
        return best;
    }

    // Returns the learnt clause (asserting literal first, a literal of the
    // backjump level second) and the level to backjump to.
    std::pair<std::vector<int>, std::size_t> analyze(int conflict) {
        const int current = static_cast<int>(trail_lim_.size());
        std::vector<int> learnt{0};
        int pending = 0;
        int p = 0;
        std::size_t idx = trail_.size();
        int cid = conflict;
        do {
            const auto& c = clauses_[static_cast<std::size_t>(cid)];
            for (std::size_t j = p == 0 ? 0 : 1; j < c.size(); ++j) {
                const std::size_t v = var_of(c[j]);
                if (seen_[v] || level_[v] == 0) continue;
                seen_[v] = 1;
                bump(v);
                if (level_[v] >= current)
                    ++pending;
                else
                    learnt.push_back(c[j]);
            }
            while (!seen_[var_of(trail_[--idx])]) {
            }
            p = trail_[idx];
            cid = reason_[var_of(p)];
            seen_[var_of(p)] = 0;
            --pending;
        } while (pending > 0);
        learnt[0] = -p;

        std::size_t back = 0;
        for (std::size_t i = 1; i < learnt.size(); ++i) {
            seen_[var_of(learnt[i])] = 0;
            const auto lv = static_cast<std::size_t>(level_[var_of(learnt[i])]);
            if (lv > back) {
                back = lv;
                std::swap(learnt[1], learnt[i]);
            }
        }
        return {std::move(learnt), back};
    }

    // Index of a conflicting clause, or -1.
    int propagate() {
        while (head_ < trail_.size()) {
            const int falsified = -trail_[head_++];
            auto& ws = watches_[index(falsified)];
            std::size_t keep = 0;
            int conflict = -1;
            for (std::size_t i = 0; i < ws.size(); ++i) {
                const int cid = ws[i];
                if (conflict >= 0) {
                    ws[keep++] = cid;
                    continue;
                }
                auto& c = clauses_[static_cast<std::size_t>(cid)];
                if (c[0] == falsified) std::swap(c[0], c[1]);
                if (value(c[0]) == 1) {
                    ws[keep++] = cid;
                    continue;
                }
                bool moved = false;
                for (std::size_t j = 2; j < c.size(); ++j) {
                    if (value(c[j]) != -1) {
                        std::swap(c[1], c[j]);
                        watches_[index(c[1])].push_back(cid);
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                ws[keep++] = cid;
                if (value(c[0]) == -1) {
                    conflict = cid;
                } else if (value(c[0]) == 0) {
                    enqueue(c[0], cid);
                }
            }
            ws.resize(keep);
            if (conflict >= 0) return conflict;
        }
        return -1;
    }

    std::vector<int8_t> assign_;
    std::vector<int> level_;
    std::vector<int> reason_;
    std::vector<double> activity_;
    std::vector<char> phase_;
    std::vector<char> seen_;
    std::vector<std::vector<int>> watches_;
    std::vector<std::vector<int>> clauses_;
    std::vector<int> units_;
    std::vector<int> trail_;
    std::vector<std::size_t> trail_lim_;
    std::size_t head_ = 0;
    double var_inc_ = 1.0;
    bool unsat_ = false;
};

// ---------------------------------------------------------------------------
// Grounding

struct Signature {
    std::vector<char> predicates;
    std::vector<char> constants;

    int pred_index(char p) const {
        return static_cast<int>(std::lower_bound(predicates.begin(), predicates.end(), p) - predicates.begin());
    }
    int const_index(char c) const {
        return static_cast<int>(std::lower_bound(constants.begin(), constants.end(), c) - constants.begin());
    }
};

// A variable is bound either to a predicate profile or to a named constant.
struct Element {
    bool is_constant = false;
    std::uint32_t id = 0;
};

// Two encodings of the same question.
//
// Profile mode: one variable per predicate profile saying whether some
// element has exactly that profile. Complete for any nesting of quantifiers,
// but the formula size grows with 2^k.
//
// Witness mode: a fixed pool of anonymous elements with free atom variables.
// Used when no quantifier occurs inside another, so every quantified
// subformula is closed; a model then stays a model when cut down to the
// constants plus one witness per quantifier occurrence, and a smaller model can
// be padded by copying an element. A pool of that size is therefore enough.
class Grounder {
public:
    Grounder(const Signature& sig, PropGraph& g, std::uint32_t witnesses) : sig_(sig), g_(g), witnesses_(witnesses) {
        k_ = static_cast<int>(sig.predicates.size());
        profiles_ = 1u << k_;
    }

    bool witness_mode() const { return witnesses_ > 0; }
    std::uint32_t profiles() const { return profiles_; }
    int inhabited_var(std::uint32_t p) const { return static_cast<int>(p); }
    int constant_atom_var(int c, int pred) const { return base() + c * k_ + pred; }
    int witness_atom_var(std::uint32_t w, int pred) const {
        return base() + static_cast<int>(sig_.constants.size()) * k_ + static_cast<int>(w) * k_ + pred;
    }
    int num_vars() const {
        return base() + static_cast<int>(sig_.constants.size() + witnesses_) * k_;
    }

    int ground(const Formula& f) {
        std::map<char, Element> env;
        return ground(f, env);
    }

private:
    int base() const { return witness_mode() ? 0 : static_cast<int>(profiles_); }

    int atom_value(int pred, Element e) {
        if (e.is_constant) return g_.var(constant_atom_var(static_cast<int>(e.id), pred));
        if (witness_mode()) return g_.var(witness_atom_var(e.id, pred));
        return ((e.id >> pred) & 1u) ? PropGraph::kTrue : PropGraph::kFalse;
    }

    // A subformula's grounding only depends on the bindings of its own free
    // variables, so nested quantifiers over independent variables are shared.
    int ground(const Formula& f, std::map<char, Element>& env) {
        if (f.kind() == Kind::Atom) return ground_uncached(f, env);
        auto fv = free_.find(&f);
        if (fv == free_.end()) fv = free_.emplace(&f, free_variables_of(f)).first;
        MemoKey key{&f, {}};
        for (char v : fv->second) {
            const Element e = env.at(v);
            key.second.push_back((static_cast<std::uint64_t>(e.is_constant) << 32) | e.id);
        }
        auto hit = memo_.find(key);
        if (hit != memo_.end()) return hit->second;
        const int node = ground_uncached(f, env);
        memo_.emplace(std::move(key), node);
        return node;
    }

    int ground_uncached(const Formula& f, std::map<char, Element>& env) {
        switch (f.kind()) {
            case Kind::Atom: {
                const int pred = sig_.pred_index(f.predicate());
                const char t = f.term().name;
                if (is_variable_letter(t)) return atom_value(pred, env.at(t));
                return atom_value(pred, Element{true, static_cast<std::uint32_t>(sig_.const_index(t))});
            }
            case Kind::Not:
                return g_.negate(ground(f.child(0), env));
            case Kind::And:
                return g_.conj({ground(f.child(0), env), ground(f.child(1), env)});
            case Kind::Or:
                return g_.disj({ground(f.child(0), env), ground(f.child(1), env)});
            case Kind::Implies:
                return g_.disj({g_.negate(ground(f.child(0), env)), ground(f.child(1), env)});
            case Kind::Iff: {
                const int a = ground(f.child(0), env);
                const int b = ground(f.child(1), env);
                return g_.conj({g_.disj({g_.negate(a), b}), g_.disj({a, g_.negate(b)})});
            }
            case Kind::ForAll:
            case Kind::Exists: {
                const bool universal = f.kind() == Kind::ForAll;
                const char var = f.variable();
                auto saved = env.find(var) != env.end() ? std::optional<Element>(env[var]) : std::nullopt;
                std::vector<int> parts;
                if (witness_mode()) {
                    for (std::uint32_t w = 0; w < witnesses_; ++w) {
                        env[var] = Element{false, w};
                        parts.push_back(ground(f.child(0), env));
                    }
                    for (std::uint32_t c = 0; c < sig_.constants.size(); ++c) {
                        env[var] = Element{true, c};
                        parts.push_back(ground(f.child(0), env));
                    }
                    if (saved) env[var] = *saved; else env.erase(var);
                    return universal ? g_.conj(std::move(parts)) : g_.disj(std::move(parts));
                }
                parts.reserve(profiles_ + sig_.constants.size());
                for (std::uint32_t p = 0; p < profiles_; ++p) {
                    env[var] = Element{false, p};
                    const int body = ground(f.child(0), env);
                    const int inh = g_.var(inhabited_var(p));
                    parts.push_back(universal ? g_.disj({g_.negate(inh), body}) : g_.conj({inh, body}));
                }
                if (universal) {
                    // Instances at the constants are implied (their profiles are
                    // inhabited) and let unit propagation see through them.
                    for (std::uint32_t c = 0; c < sig_.constants.size(); ++c) {
                        env[var] = Element{true, c};
                        parts.push_back(ground(f.child(0), env));
                    }
                }
                if (saved) env[var] = *saved; else env.erase(var);
                return universal ? g_.conj(std::move(parts)) : g_.disj(std::move(parts));
            }
        }
        return PropGraph::kTrue;
    }

    using MemoKey = std::pair<const Formula*, std::vector<std::uint64_t>>;

    const Signature& sig_;
    PropGraph& g_;
    std::uint32_t witnesses_ = 0;
    std::map<const Formula*, std::set<char>> free_;
    std::map<MemoKey, int> memo_;
    int k_ = 0;
    std::uint32_t profiles_ = 1;
};

class Encoder {
public:
    Encoder(const PropGraph& g, Solver& s) : g_(g), s_(s) {}

    void assert_true(int node) {
        const PNode& n = g_.at(node);
        switch (n.kind) {
            case PNode::K::True: return;
            case PNode::K::False: s_.add_clause({}); return;
            case PNode::K::And:
                for (int k : n.kids) assert_true(k);
                return;
            case PNode::K::Or: {
                std::vector<int> clause;
                clause.reserve(n.kids.size());
                for (int k : n.kids) clause.push_back(literal(k));
                s_.add_clause(std::move(clause));
                return;
            }
            default:
                s_.add_clause({literal(node)});
        }
    }

private:
    int literal(int node) {
        const PNode& n = g_.at(node);
        switch (n.kind) {
            case PNode::K::Var: return n.var + 1;
            case PNode::K::Not: return -literal(n.kids[0]);
            case PNode::K::True:
            case PNode::K::False: {
                // Folding removes constants below the root; keep a fixed variable for safety.
                const int t = s_.new_var();
                s_.add_clause({n.kind == PNode::K::True ? t : -t});
                return t;
            }
            default: break;
        }
        if (auto it = memo_.find(node); it != memo_.end()) return it->second;
        std::vector<int> kids;
        kids.reserve(n.kids.size());
        for (int k : n.kids) kids.push_back(literal(k));
        const int t = s_.new_var();
        if (n.kind == PNode::K::And) {
            std::vector<int> back{t};
            for (int l : kids) {
                s_.add_clause({-t, l});
                back.push_back(-l);
            }
            s_.add_clause(std::move(back));
        } else {
            std::vector<int> fwd{-t};
            for (int l : kids) {
                s_.add_clause({t, -l});
                fwd.push_back(l);
            }
            s_.add_clause(std::move(fwd));
        }
        memo_.emplace(node, t);
        return t;
    }

    const PropGraph& g_;
    Solver& s_;
    std::unordered_map<int, int> memo_;
};

// Number of quantifier occurrences, and whether any of them sits inside
// another quantifier.
std::pair<std::size_t, bool> quantifier_occurrences(const Formula& f, bool under_quantifier) {
    if (f.kind() == Kind::Atom) return {0, false};
    std::size_t count = 0;
    bool nested = false;
    if (f.is_quantifier()) {
        count = 1;
        nested = under_quantifier;
        under_quantifier = true;
    }
    for (std::size_t i = 0; i < f.arity(); ++i) {
        const auto [c, n] = quantifier_occurrences(f.child(i), under_quantifier);
        count += c;
        nested = nested || n;
    }
    return {count, nested};
}

bool satisfiable_component(std::span<const Formula> formulas) {
    Signature sig;
    std::set<char> preds, consts;
    for (const auto& f : formulas) {
        auto p = predicates_of(f);
        auto c = constants_of(f);
        preds.insert(p.begin(), p.end());
        consts.insert(c.begin(), c.end());
    }
    if (preds.size() > kMaxPredicates) {
        throw UnsupportedFragmentError("too many predicates for the small-model search: " + std::to_string(preds.size()));
    }
    sig.predicates.assign(preds.begin(), preds.end());
    sig.constants.assign(consts.begin(), consts.end());

    std::size_t occurrences = 0;
    bool flat = true;
    for (const auto& f : formulas) {
        const auto [count, nested] = quantifier_occurrences(f, false);
        occurrences += count;
        flat = flat && !nested;
    }
    const std::size_t profile_count = std::size_t{1} << preds.size();
    const auto witnesses = flat && occurrences + 1 < profile_count ? static_cast<std::uint32_t>(occurrences + 1) : 0u;

    PropGraph g;
    Grounder grounder(sig, g, witnesses);
    Solver solver(grounder.num_vars());
    Encoder enc(g, solver);
    if (grounder.witness_mode()) {
        for (const auto& f : formulas) enc.assert_true(grounder.ground(f));
        return solver.solve();
    }

    const auto k = static_cast<int>(sig.predicates.size());
    // The domain is non-empty, and every constant denotes an inhabited profile.
    {
        std::vector<int> some;
        for (std::uint32_t p = 0; p < grounder.profiles(); ++p) some.push_back(grounder.inhabited_var(p) + 1);
        solver.add_clause(std::move(some));
    }
    for (int c = 0; c < static_cast<int>(sig.constants.size()); ++c) {
        for (std::uint32_t p = 0; p < grounder.profiles(); ++p) {
            std::vector<int> clause;
            clause.reserve(static_cast<std::size_t>(k) + 1);
            for (int i = 0; i < k; ++i) {
                const int v = grounder.constant_atom_var(c, i) + 1;
                clause.push_back(((p >> i) & 1u) ? -v : v);
            }
            clause.push_back(grounder.inhabited_var(p) + 1);
            solver.add_clause(std::move(clause));
        }
    }
    for (const auto& f : formulas) enc.assert_true(grounder.ground(f));
    return solver.solve();
}

// Formulas sharing no predicate or constant can be decided independently:
// without equality, models of symbol-disjoint sets combine.
std::vector<std::vector<Formula>> components(std::span<const Formula> formulas) {
    const std::size_t n = formulas.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    std::map<char, std::size_t> owner;
    for (std::size_t i = 0; i < n; ++i) {
        auto syms = predicates_of(formulas[i]);
        auto consts = constants_of(formulas[i]);
        syms.insert(consts.begin(), consts.end());
        for (char s : syms) {
            auto [it, inserted] = owner.emplace(s, i);
            if (!inserted) parent[find(i)] = find(it->second);
        }
    }
    std::map<std::size_t, std::vector<Formula>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(formulas[i]);
    std::vector<std::vector<Formula>> out;
    for (auto& [root, fs] : groups) out.push_back(std::move(fs));
    return out;
}

}  // namespace

bool check_satisfiable(std::span<const Formula> formulas) {
    for (const auto& f : formulas) {
        auto free = free_variables_of(f);
        if (!free.empty()) {
            throw UnsupportedFragmentError("formula has free variable '" + std::string(1, *free.begin()) +
                                           "': " + render_formula(f));
        }
    }
    for (const auto& group : components(formulas)) {
        if (!satisfiable_component(group)) return false;
    }
    return true;
}

bool check_entailment(std::span<const Formula> premises, const Formula& conclusion) {
    std::vector<Formula> all(premises.begin(), premises.end());
    all.push_back(Formula::negation(conclusion));
    return !check_satisfiable(all);
}

}  // namespace deepa2::formula
