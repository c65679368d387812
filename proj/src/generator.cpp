#include "deepa2/generator.hpp"

#include "deepa2/embedded.hpp"
#include "deepa2/errors.hpp"
#include "deepa2/metrics.hpp"
#include "deepa2/text.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <mutex>
#include <numeric>
#include <thread>

#include "json.hpp"

namespace deepa2::generator {

using formula::Formula;

namespace {

constexpr std::string_view kPredicateLetters = "FGHIJKLMNOPQRSTUVWXYZABCD";
constexpr std::string_view kConstantLetters = "abcdefghijklmnopqrstuw";
// Leaves room for distractor predicates within the decision procedure's limit.
constexpr std::size_t kMaxArgumentPredicates = 14;
constexpr int kMaxDistractors = 3;
constexpr int kAttemptsPerRecord = 50;

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool chance(double p, std::mt19937_64& rng) { return std::bernoulli_distribution(std::clamp(p, 0.0, 1.0))(rng); }

struct VariantRef {
    const schemes::SchemeSpec* scheme;
    const schemes::SchemeVariant* variant;
};

std::vector<VariantRef> all_variants() {
    std::vector<VariantRef> out;
    for (const auto& s : schemes::SchemeCatalog::builtin().schemes())
        for (const auto& v : s.variants) out.push_back({&s, &v});
    return out;
}

// Hands out predicate letters and constants not used so far.
struct SymbolPool {
    std::set<char> used;

    char fresh_predicate() {
        for (char c : kPredicateLetters)
            if (!used.count(c)) {
                used.insert(c);
                return c;
            }
        throw GenerationError("out of predicate letters");
    }
    char fresh_constant() {
        for (char c : kConstantLetters)
            if (!used.count(c)) {
                used.insert(c);
                return c;
            }
        throw GenerationError("out of constants");
    }
    void note(const Formula& f) {
        for (char c : formula::predicates_of(f)) used.insert(c);
        for (char c : formula::constants_of(f)) used.insert(c);
    }
};

std::set<char> pattern_symbols(const schemes::SchemeVariant& v) {
    std::set<char> out;
    auto add = [&](const Formula& f) {
        for (char c : formula::predicates_of(f)) out.insert(c);
        for (char c : formula::constants_of(f)) out.insert(c);
    };
    for (const auto& p : v.premises) add(p);
    add(v.conclusion);
    return out;
}

// Completes `binding` with fresh predicates; unbound constants go to
// `constant`, bound variables stay as they are.
void complete_binding(const schemes::SchemeVariant& v, formula::Binding& binding, SymbolPool& pool, char constant) {
    for (char c : pattern_symbols(v)) {
        if (binding.count(c)) continue;
        binding[c] = formula::is_predicate_letter(c) ? pool.fresh_predicate() : constant;
    }
    for (char var : {'x', 'y', 'z'})
        if (!binding.count(var)) binding[var] = var;
}

std::string variant_label(const schemes::SchemeVariant& v) { return v.is_base() ? "" : v.name; }

bool is_quantified(const Formula& f) { return f.is_quantifier(); }

std::string strip_period(std::string s) {
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

bool starts_with_name(const std::string& clause, const SignatureKeys& keys) {
    for (const auto& [sym, phrase] : keys)
        if (formula::is_constant_letter(sym) && text::starts_with(clause, phrase + " ")) return true;
    return false;
}

struct ParaphraseRule {
    std::string from, to;
};

const std::vector<ParaphraseRule>& paraphrase_rules() {
    static const std::vector<ParaphraseRule> rules = [] {
        std::vector<ParaphraseRule> out;
        for (const auto& line : text::data_lines(embedded::lookup("paraphrases.txt"))) {
            const auto arrow = line.find("=>");
            if (arrow == std::string::npos) throw ParseError("paraphrase rule without '=>': " + line, 0);
            out.push_back({text::trim(line.substr(0, arrow)), text::trim(line.substr(arrow + 2))});
        }
        return out;
    }();
    return rules;
}

bool word_boundary(const std::string& s, std::size_t pos) {
    return pos == 0 || pos >= s.size() || !std::isalnum(static_cast<unsigned char>(s[pos]));
}

std::optional<std::string> apply_rule(const std::string& clause, const ParaphraseRule& r) {
    for (std::size_t pos = clause.find(r.from); pos != std::string::npos; pos = clause.find(r.from, pos + 1)) {
        const std::size_t end = pos + r.from.size();
        if ((pos == 0 || word_boundary(clause, pos - 1)) && word_boundary(clause, end))
            return clause.substr(0, pos) + r.to + clause.substr(end);
    }
    return std::nullopt;
}

// Token F1 of at least 0.9 keeps the default scorer at 0.8 or more.
bool close_enough(const std::string& a, const std::string& b) { return text::token_f1(a, b) >= 0.9; }

std::string paraphrase(const std::string& clause, const PresentationPlan& plan, std::mt19937_64& rng) {
    std::string out = clause;
    if (!plan.paraphrase || !chance(plan.paraphrase_rate, rng)) return out;
    std::vector<std::string> candidates;
    for (const auto& r : paraphrase_rules())
        if (auto p = apply_rule(out, r); p && close_enough(*p, clause)) candidates.push_back(*p);
    if (!candidates.empty()) out = pick(candidates, rng);
    if (plan.paraphraser) {
        std::string hooked = strip_period(text::normalize_ws(plan.paraphraser(out)));
        if (!hooked.empty() && close_enough(hooked, clause)) out = hooked;
    }
    return out;
}

const std::vector<std::string> kConclusionIndicators{"So, ", "Therefore, ", "Hence, ", "It follows that "};
const std::vector<std::string> kPremiseIndicators{"Moreover, ", "Plus, ", "Besides, ", "What is more, "};

std::string render_with_template(const Formula& f, const SignatureKeys& keys, bool loose, std::mt19937_64& rng) {
    const auto& book = schemes::TemplateBook::builtin();
    auto precise = book.templates_for(f, false);
    if (precise.empty()) throw GenerationError("no sentence template for " + formula::render_formula(f));
    if (loose) {
        std::vector<const schemes::SentenceTemplate*> imprecise;
        for (const auto* t : book.templates_for(f, true))
            if (t->imprecise) imprecise.push_back(t);
        if (!imprecise.empty()) return book.render(f, *pick(imprecise, rng), keys);
    }
    return book.render(f, *pick(precise, rng), keys);
}

std::uint64_t record_seed(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0xA2A2u};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::string lowercase(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lexicons

std::set<std::string> DomainLexicon::all_phrases() const {
    std::set<std::string> out;
    for (const auto& d : domains) out.insert(d.phrases.begin(), d.phrases.end());
    return out;
}

DomainLexicon DomainLexicon::load(std::string_view content) {
    DomainLexicon lex;
    for (const auto& line : text::data_lines(content)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("lexicon line without ':': " + line, 0);
        const std::string key = text::trim(line.substr(0, colon));
        const std::string value = text::trim(line.substr(colon + 1));
        if (key == "lexicon") {
            lex.id = value;
        } else if (key == "domain") {
            lex.domains.push_back({value, {}, {}});
        } else if (key == "names" || key == "phrase") {
            if (lex.domains.empty()) throw ParseError("'" + key + "' before any domain", 0);
            auto& d = lex.domains.back();
            if (key == "phrase") {
                if (!schemes::phrase_is_readable(value)) throw ParseError("unreadable phrase '" + value + "'", 0);
                d.phrases.push_back(value);
            } else {
                for (const auto& n : text::split(value, ',')) {
                    const std::string name = text::trim(n);
                    if (!schemes::name_is_readable(name)) throw ParseError("unreadable name '" + name + "'", 0);
                    d.names.push_back(name);
                }
            }
        } else {
            throw ParseError("unknown lexicon key '" + key + "'", 0);
        }
    }
    if (lex.id.empty()) throw ParseError("lexicon without id", 0);
    if (lex.domains.empty()) throw ParseError("lexicon " + lex.id + " has no domains", 0);
    for (const auto& d : lex.domains)
        if (d.names.size() < 4 || d.phrases.size() < kMaxArgumentPredicates + 2 * kMaxDistractors)
            throw ParseError("domain " + d.name + " of lexicon " + lex.id + " is too small", 0);
    return lex;
}

const DomainLexicon& DomainLexicon::builtin(std::string_view id) {
    static const DomainLexicon aaac01 = load(embedded::lookup("lexicon_aaac01.txt"));
    static const DomainLexicon aaac02 = load(embedded::lookup("lexicon_aaac02.txt"));
    const std::string wanted = text::trim(id);
    if (lowercase(wanted) == "aaac01") return aaac01;
    if (lowercase(wanted) == "aaac02") return aaac02;
    throw Error("unknown lexicon '" + wanted + "' (expected AAAC01 or AAAC02)");
}

// ---------------------------------------------------------------------------
// Trees

std::vector<int> ArgumentTree::leaves() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(formulas.size()); ++i)
        if (!step_concluding(i)) out.push_back(i);
    return out;
}

const TreeStep* ArgumentTree::step_concluding(int node) const {
    for (const auto& s : steps)
        if (s.conclusion == node) return &s;
    return nullptr;
}

bool ArgumentTree::uses_complex_schemes() const {
    if (intricate) return true;
    return std::any_of(formulas.begin(), formulas.end(), [](const Formula& f) {
        return formula::contains_negation(f) || formula::contains_composition(f);
    });
}

namespace {

// Builds the formulas and steps of a tree with `depth` steps, or nothing when
// growth runs into a dead end.
std::optional<ArgumentTree> grow_tree(int depth, std::mt19937_64& rng) {
    static const std::vector<VariantRef> variants = all_variants();
    ArgumentTree tree;
    SymbolPool pool;
    const char constant = pool.fresh_constant();

    // The final step.
    {
        const auto& v = pick(variants, rng);
        formula::Binding b;
        complete_binding(*v.variant, b, pool, constant);
        tree.formulas.push_back(formula::substitute(v.variant->conclusion, b));
        TreeStep step{v.scheme->name, variant_label(*v.variant), {}, 0};
        for (const auto& p : v.variant->premises) {
            step.premises.push_back(static_cast<int>(tree.formulas.size()));
            tree.formulas.push_back(formula::substitute(p, b));
        }
        tree.steps.push_back(step);
        tree.intricate = v.scheme->intricate;
    }

    // Grow backwards: derive one of the current leaves with another scheme.
    while (static_cast<int>(tree.steps.size()) < depth) {
        auto leaves = tree.leaves();
        std::shuffle(leaves.begin(), leaves.end(), rng);
        auto order = variants;
        std::shuffle(order.begin(), order.end(), rng);
        bool grown = false;
        for (int leaf : leaves) {
            for (const auto& v : order) {
                formula::Binding b;
                if (!formula::unify(v.variant->conclusion, tree.formulas[leaf], b)) continue;
                SymbolPool trial = pool;
                complete_binding(*v.variant, b, trial, constant);
                std::vector<Formula> premises;
                for (const auto& p : v.variant->premises) premises.push_back(formula::substitute(p, b));
                const bool repeats = std::any_of(premises.begin(), premises.end(), [&](const Formula& f) {
                    return std::find(tree.formulas.begin(), tree.formulas.end(), f) != tree.formulas.end();
                });
                if (repeats) continue;
                std::size_t predicates = 0;
                for (char c : trial.used) predicates += formula::is_predicate_letter(c) ? 1 : 0;
                if (predicates > kMaxArgumentPredicates) continue;
                TreeStep step{v.scheme->name, variant_label(*v.variant), {}, leaf};
                for (auto& p : premises) {
                    step.premises.push_back(static_cast<int>(tree.formulas.size()));
                    tree.formulas.push_back(std::move(p));
                }
                tree.steps.push_back(step);
                tree.intricate = tree.intricate || v.scheme->intricate;
                pool = trial;
                grown = true;
                break;
            }
            if (grown) break;
        }
        if (!grown) return std::nullopt;
    }
    return tree;
}

}  // namespace

ArgumentTree sample_argument(const GeneratorConfig& config, std::mt19937_64& rng) {
    constexpr int kRestarts = 20;
    const auto& lexicon = DomainLexicon::builtin(config.lexicon);
    std::discrete_distribution<int> depth_draw(config.step_weights.begin(), config.step_weights.end());
    const int depth = depth_draw(rng) + 1;
    std::optional<ArgumentTree> grown;
    for (int i = 0; i < kRestarts && !grown; ++i) grown = grow_tree(depth, rng);
    if (!grown) throw GenerationError("no tree with " + std::to_string(depth) + " steps after restarts");
    ArgumentTree tree = std::move(*grown);

    std::vector<Formula> premises;
    for (int leaf : tree.leaves()) premises.push_back(tree.formulas[leaf]);
    if (!formula::check_entailment(premises, tree.formulas[0]))
        throw InvariantError("sampled argument is not valid: " + formula::render_formula(tree.formulas[0]));

    // Signature.
    const auto& domain = pick(lexicon.domains, rng);
    tree.domain = domain.name;
    auto phrases = domain.phrases;
    auto names = domain.names;
    std::shuffle(phrases.begin(), phrases.end(), rng);
    std::shuffle(names.begin(), names.end(), rng);
    std::size_t next_phrase = 0, next_name = 0;
    std::set<char> symbols;
    for (const auto& f : tree.formulas) {
        for (char c : formula::predicates_of(f)) symbols.insert(c);
        for (char c : formula::constants_of(f)) symbols.insert(c);
    }
    for (char c : symbols)
        tree.keys[c] = formula::is_predicate_letter(c) ? phrases.at(next_phrase++) : names.at(next_name++);
    return tree;
}

// ---------------------------------------------------------------------------
// Verbalization

Verbalization verbalize_argument(const ArgumentTree& tree, const GeneratorConfig& config, std::mt19937_64& rng) {
    Verbalization out;
    const std::size_t n = tree.formulas.size();
    out.number_of.assign(n, 0);
    out.sentences.assign(n, "");

    // Post-order: the premises of a step (each preceded by its own
    // derivation), then its conclusion.
    std::vector<int> order;
    std::function<void(int)> visit = [&](int node) {
        if (const TreeStep* s = tree.step_concluding(node))
            for (int p : s->premises) visit(p);
        order.push_back(node);
    };
    visit(0);
    if (order.size() != n) throw InvariantError("argument tree is not connected");

    for (std::size_t i = 0; i < order.size(); ++i) {
        const int node = order[i];
        out.number_of[node] = static_cast<int>(i) + 1;
        const Formula& f = tree.formulas[node];
        const bool loose = config.imprecise && is_quantified(f) && chance(config.imprecise_rate, rng);
        out.sentences[node] = render_with_template(f, tree.keys, loose, rng);
        out.argdown.statements.push_back({out.number_of[node], out.sentences[node]});
    }
    for (const auto& s : tree.steps) {
        argdown::InferenceStep step;
        step.scheme = s.scheme;
        if (!s.variant.empty()) step.variant = s.variant;
        for (int p : s.premises) step.from.push_back(out.number_of[p]);
        step.derives = out.number_of[s.conclusion];
        out.argdown.inferences.push_back(step);
    }
    std::sort(out.argdown.inferences.begin(), out.argdown.inferences.end(),
              [](const auto& a, const auto& b) { return a.derives < b.derives; });
    argdown::validate(out.argdown);

    auto leaves = tree.leaves();
    std::sort(leaves.begin(), leaves.end(),
              [&](int a, int b) { return out.number_of[a] < out.number_of[b]; });
    for (int leaf : leaves) {
        out.premises.push_back({out.sentences[leaf], out.number_of[leaf]});
        out.premises_form.push_back({formula::render_formula(tree.formulas[leaf]), out.number_of[leaf]});
    }
    out.conclusion.push_back({out.sentences[0], out.number_of[0]});
    out.conclusion_form.push_back({formula::render_formula(tree.formulas[0]), out.number_of[0]});
    out.keys = tree.keys;
    return out;
}

// ---------------------------------------------------------------------------
// Presentation

PresentationPlan sample_plan(const ArgumentTree& tree, const GeneratorConfig& config, std::mt19937_64& rng) {
    PresentationPlan plan;
    plan.indicator_budget = config.indicator_budget;
    plan.paraphrase = config.paraphrase;
    plan.paraphrase_rate = config.paraphrase_rate;
    plan.paraphraser = config.paraphraser;

    const auto leaves = tree.leaves();
    std::vector<int> intermediates;
    for (const auto& s : tree.steps)
        if (s.conclusion != 0) intermediates.push_back(s.conclusion);

    int n_distractors = 0;
    const double r = std::uniform_real_distribution<double>(0, 1)(rng);
    const bool can_mutilate = leaves.size() >= 3 && !intermediates.empty();
    if (r < config.plain_share) {
        // nothing omitted, no distractors
    } else if (r < config.plain_share + config.mutilated_share && can_mutilate) {
        auto shuffled = leaves;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const int omit = std::uniform_int_distribution<int>(2, static_cast<int>(leaves.size()) - 1)(rng);
        for (int i = 0; i < omit; ++i) plan.omitted.insert(shuffled[i]);
        auto inter = intermediates;
        std::shuffle(inter.begin(), inter.end(), rng);
        const int omit_inter = std::uniform_int_distribution<int>(1, static_cast<int>(inter.size()))(rng);
        for (int i = 0; i < omit_inter; ++i) plan.omitted.insert(inter[i]);
        n_distractors = 2;
    } else {
        for (int leaf : leaves)
            if (chance(config.omit_premise_rate, rng)) plan.omitted.insert(leaf);
        if (std::all_of(leaves.begin(), leaves.end(), [&](int l) { return plan.omitted.count(l) > 0; }))
            plan.omitted.erase(pick(leaves, rng));
        for (int i : intermediates)
            if (chance(config.omit_intermediate_rate, rng)) plan.omitted.insert(i);
        if (chance(config.omit_final_rate, rng)) plan.omitted.insert(0);
        std::discrete_distribution<int> dd(config.distractor_weights.begin(), config.distractor_weights.end());
        n_distractors = std::min(dd(rng), kMaxDistractors);
    }

    for (int i = 0; i < static_cast<int>(tree.formulas.size()); ++i)
        if (!plan.omitted.count(i)) plan.order.push_back(i);
    std::shuffle(plan.order.begin(), plan.order.end(), rng);

    // Distractors use predicates the argument does not, so they cannot take
    // part in any derivation.
    SymbolPool pool;
    for (const auto& f : tree.formulas) pool.note(f);
    const auto& lexicon = DomainLexicon::builtin(config.lexicon);
    const Domain* domain = &lexicon.domains.front();
    for (const auto& d : lexicon.domains)
        if (d.name == tree.domain) domain = &d;
    std::set<std::string> taken;
    for (const auto& [k, v] : tree.keys) taken.insert(v);
    auto fresh_phrase = [&](const std::vector<std::string>& pool_of) {
        std::vector<std::string> free;
        for (const auto& p : pool_of)
            if (!taken.count(p)) free.push_back(p);
        if (free.empty()) throw GenerationError("domain " + domain->name + " ran out of phrases");
        const std::string& chosen = pick(free, rng);
        taken.insert(chosen);
        return chosen;
    };
    const std::vector<std::string> shapes{"F a", "not F a", "(x): F x -> G x", "(x): F x -> not G x"};
    for (int k = 0; k < n_distractors; ++k) {
        const Formula shape = formula::parse_formula(pick(shapes, rng));
        formula::Binding b;
        Distractor d{shape, {}};
        for (char c : formula::predicates_of(shape)) {
            b[c] = pool.fresh_predicate();
            d.keys[b[c]] = fresh_phrase(domain->phrases);
        }
        for (char c : formula::constants_of(shape)) {
            // Either one of the argument's individuals or somebody new.
            std::vector<char> known;
            for (const auto& [sym, name] : tree.keys)
                if (formula::is_constant_letter(sym)) known.push_back(sym);
            if (!known.empty() && chance(0.5, rng)) {
                b[c] = pick(known, rng);
                d.keys[b[c]] = tree.keys.at(b[c]);
            } else {
                b[c] = pool.fresh_constant();
                d.keys[b[c]] = fresh_phrase(domain->names);
            }
        }
        b['x'] = 'x';
        d.formula = formula::substitute(shape, b);
        plan.distractors.push_back(std::move(d));
        plan.distractor_slots.push_back(std::uniform_int_distribution<std::size_t>(0, plan.order.size())(rng));
    }
    return plan;
}

SourceComposition compose_source(const ArgumentTree& tree, const Verbalization& verbal, const PresentationPlan& plan,
                                 std::mt19937_64& rng) {
    SourceComposition out;
    struct Item {
        int node;  // -1 for a distractor
        std::string clause;
        SignatureKeys keys;
    };
    std::vector<Item> items;
    for (std::size_t pos = 0; pos <= plan.order.size(); ++pos) {
        for (std::size_t k = 0; k < plan.distractors.size(); ++k) {
            if (plan.distractor_slots[k] != pos) continue;
            const auto& d = plan.distractors[k];
            items.push_back({-1, strip_period(render_with_template(d.formula, d.keys, false, rng)), d.keys});
        }
        if (pos < plan.order.size()) {
            const int node = plan.order[pos];
            items.push_back({node, strip_period(verbal.sentences[node]), tree.keys});
        }
    }

    int budget = plan.indicator_budget;
    std::vector<std::string> sentences;
    for (auto& item : items) {
        std::string clause = paraphrase(item.clause, plan, rng);
        std::string prefix;
        const bool conclusion = item.node >= 0 && tree.step_concluding(item.node) != nullptr;
        // "So" and its kin need something earlier to point back to.
        if (budget > 0 && !(conclusion && sentences.empty()) && chance(0.5, rng)) {
            prefix = pick(conclusion ? kConclusionIndicators : kPremiseIndicators, rng);
            --budget;
            if (!starts_with_name(clause, item.keys)) clause = text::lowercase_first(clause);
        }
        sentences.push_back(prefix + clause + ".");
        if (item.node < 0) continue;
        const QuotedStatement quote{clause, verbal.number_of[item.node]};
        if (tree.step_concluding(item.node))
            out.conjectures.push_back(quote);
        else
            out.reasons.push_back(quote);
    }
    out.source = text::join(sentences, " ");

    RecordMeta& m = out.meta;
    m.n_inference_steps = static_cast<int>(tree.steps.size());
    for (int node : plan.omitted) {
        if (tree.step_concluding(node))
            ++m.n_implicit_conclusions;
        else
            ++m.n_implicit_premises;
    }
    m.final_conclusion_explicit = !plan.omitted.count(0);
    m.n_distractors = static_cast<int>(plan.distractors.size());
    m.uses_complex_schemes = tree.uses_complex_schemes();
    return out;
}

// ---------------------------------------------------------------------------
// Records and corpora

std::vector<std::string> validate_record(const DeepA2Record& r) {
    std::vector<std::string> problems;
    for (Dim d : kAllDims)
        if (!r.has(d)) problems.push_back(std::string(keyword(d)) + " missing");
    if (!problems.empty()) return problems;
    for (const auto& d : dangling_refs(r)) problems.push_back("dangling ref in " + d);
    std::string why;
    if (metrics::eval_sys_val(*r.premises_form, *r.conclusion_form, &why) != 1)
        problems.push_back("formalization not valid: " + why);
    const auto forms = schemes::formalization_of(r);
    const double sch =
        schemes::sys_sch_ratio(*r.argdown, schemes::SchemeCatalog::builtin(), schemes::TemplateBook::builtin(), &forms);
    if (sch != 1.0) problems.push_back("scheme ratio " + std::to_string(sch));
    const auto flaws = metrics::eval_basic_flaws(*r.argdown);
    if (!(flaws.sys_pp && flaws.sys_rp && flaws.sys_rc && flaws.sys_us)) problems.push_back("basic flaw");
    if (metrics::eval_exe_meq(*r.source, *r.reasons, *r.conjectures) != 1)
        problems.push_back("reasons and conjectures are not disjoint verbatim quotes");
    std::set<char> predicates;
    for (const auto* list : {&*r.premises_form, &*r.conclusion_form})
        for (const auto& item : *list)
            for (char c : formula::predicates_of(formula::parse_formula(item.text))) predicates.insert(c);
    for (char c : predicates)
        if (!r.keys->count(c)) problems.push_back(std::string("no key for ") + c);
    for (const auto& [c, phrase] : *r.keys)
        if (formula::is_predicate_letter(c) && !predicates.count(c)) problems.push_back(std::string("unused key ") + c);
    return problems;
}

DeepA2Record generate_record(const GeneratorConfig& config, std::uint64_t index) {
    config.validate();
    std::mt19937_64 rng(record_seed(config.seed, index));
    std::string last;
    for (int attempt = 0; attempt < kAttemptsPerRecord; ++attempt) {
        try {
            const ArgumentTree tree = sample_argument(config, rng);
            const Verbalization verbal = verbalize_argument(tree, config, rng);
            const PresentationPlan plan = sample_plan(tree, config, rng);
            SourceComposition comp = compose_source(tree, verbal, plan, rng);
            DeepA2Record r;
            r.source = comp.source;
            r.reasons = comp.reasons;
            r.conjectures = comp.conjectures;
            r.argdown = verbal.argdown;
            r.premises = verbal.premises;
            r.conclusion = verbal.conclusion;
            r.premises_form = verbal.premises_form;
            r.conclusion_form = verbal.conclusion_form;
            r.keys = verbal.keys;
            r.meta = comp.meta;
            r.meta.domain_tag = DomainLexicon::builtin(config.lexicon).id + ":" + tree.domain;
            r.meta.id = lowercase(DomainLexicon::builtin(config.lexicon).id) + "-" + std::to_string(config.seed) + "-" +
                        std::to_string(index);
            const auto problems = validate_record(r);
            if (problems.empty()) return r;
            last = problems.front();
        } catch (const GenerationError& e) {
            last = e.what();
        }
    }
    throw GenerationError("record " + std::to_string(index) + " failed " + std::to_string(kAttemptsPerRecord) +
                          " attempts; last problem: " + last);
}

std::vector<DeepA2Record> generate_corpus(const GeneratorConfig& config, std::size_t n, int jobs) {
    config.validate();
    std::vector<std::optional<DeepA2Record>> slots(n);
    std::vector<std::string> failures;
    std::mutex failure_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i] = generate_record(config, i);
            } catch (const GenerationError& e) {
                std::lock_guard lock(failure_mutex);
                failures.push_back(e.what());
            }
        }
    };
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (failures.size() * 100 > n)
        throw GenerationError(std::to_string(failures.size()) + " of " + std::to_string(n) +
                              " records failed; first: " + failures.front());
    // The few failed slots are refilled from indices past the end, in order.
    std::vector<DeepA2Record> out;
    out.reserve(n);
    std::uint64_t spare = n;
    for (auto& s : slots) {
        while (!s) {
            try {
                s = generate_record(config, spare++);
            } catch (const GenerationError&) {
            }
        }
        out.push_back(std::move(*s));
    }
    return out;
}

std::map<Subset, std::size_t> subset_census(const std::vector<DeepA2Record>& records) {
    std::map<Subset, std::size_t> out;
    for (Subset s : {Subset::Simple, Subset::Complex, Subset::Plain, Subset::Mutilated, Subset::ComplexAndMutilated})
        out[s] = 0;
    for (const auto& r : records)
        for (Subset s : classify_subsets(r.meta)) ++out[s];
    return out;
}

// ---------------------------------------------------------------------------
// Configuration

GeneratorConfig GeneratorConfig::preset(std::string_view lexicon_id) {
    GeneratorConfig c;
    c.lexicon = DomainLexicon::builtin(lexicon_id).id;
    c.imprecise = c.lexicon == "AAAC02";
    return c;
}

void GeneratorConfig::validate() const {
    auto proper = [](const std::vector<double>& w, std::size_t size, const char* what) {
        if (w.size() != size) throw Error(std::string(what) + " needs " + std::to_string(size) + " weights");
        if (std::any_of(w.begin(), w.end(), [](double x) { return !(x >= 0); }) ||
            std::accumulate(w.begin(), w.end(), 0.0) <= 0)
            throw Error(std::string(what) + " must be non-negative with a positive sum");
    };
    proper(step_weights, 4, "step_weights");
    proper(distractor_weights, 4, "distractor_weights");
    for (double p : {plain_share, mutilated_share, omit_premise_rate, omit_intermediate_rate, omit_final_rate,
                     paraphrase_rate, imprecise_rate})
        if (!(p >= 0 && p <= 1)) throw Error("rates and shares must lie in [0, 1]");
    if (plain_share + mutilated_share > 1 + 1e-12) throw Error("plain_share + mutilated_share exceeds 1");
    if (indicator_budget < 0) throw Error("indicator_budget must not be negative");
    DomainLexicon::builtin(lexicon);
}

GeneratorConfig GeneratorConfig::from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("generator config is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error("generator config must be a JSON object");
    GeneratorConfig c = preset(j.value("preset", j.value("lexicon", std::string("AAAC01"))));
    try {
        for (auto& [key, v] : j.items()) {
            if (key == "preset") continue;
            if (key == "lexicon") c.lexicon = DomainLexicon::builtin(v.get<std::string>()).id;
            else if (key == "step_weights") c.step_weights = v.get<std::vector<double>>();
            else if (key == "plain_share") c.plain_share = v.get<double>();
            else if (key == "mutilated_share") c.mutilated_share = v.get<double>();
            else if (key == "omit_premise_rate") c.omit_premise_rate = v.get<double>();
            else if (key == "omit_intermediate_rate") c.omit_intermediate_rate = v.get<double>();
            else if (key == "omit_final_rate") c.omit_final_rate = v.get<double>();
            else if (key == "distractor_weights") c.distractor_weights = v.get<std::vector<double>>();
            else if (key == "indicator_budget") c.indicator_budget = v.get<int>();
            else if (key == "paraphrase") c.paraphrase = v.get<bool>();
            else if (key == "paraphrase_rate") c.paraphrase_rate = v.get<double>();
            else if (key == "imprecise") c.imprecise = v.get<bool>();
            else if (key == "imprecise_rate") c.imprecise_rate = v.get<double>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else throw Error("unknown generator config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("bad value in generator config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace deepa2::generator
