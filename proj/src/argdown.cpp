#include "deepa2/argdown.hpp"

#include "deepa2/errors.hpp"
#include "deepa2/text.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace deepa2::argdown {

const Statement* Argument::statement(int number) const {
    if (number < 1 || number > static_cast<int>(statements.size())) return nullptr;
    return &statements[static_cast<std::size_t>(number - 1)];
}

const InferenceStep* Argument::inference_deriving(int number) const {
    for (const auto& inf : inferences) {
        if (inf.derives == number) return &inf;
    }
    return nullptr;
}

std::vector<int> implicit_from(const Argument& arg, int derives) {
    int start = 1;
    for (const auto& inf : arg.inferences) {
        if (inf.derives < derives) start = std::max(start, inf.derives);
    }
    std::vector<int> from;
    for (int n = start; n < derives; ++n) from.push_back(n);
    return from;
}

namespace {

struct Line {
    std::string text;
    std::size_t offset;
};

std::vector<Line> lines_of(std::string_view text) {
    std::vector<Line> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto raw = text.substr(start, end - start);
        auto t = text::trim(raw);
        if (!t.empty()) out.push_back({std::move(t), start});
        start = end + 1;
    }
    return out;
}

bool is_separator(const std::string& line) { return line.size() >= 2 && line.rfind("--", 0) == 0; }

// "with <scheme> [(<variant>)] [from (i) (j) ...]" or "from (i) ..." or "".
void parse_inference_body(std::string body, std::size_t offset, InferenceStep& step, bool& has_from) {
    body = text::normalize_ws(body);
    has_from = false;
    if (body.empty()) return;
    static const std::regex from_re(R"((?:^|\s)from((?:\s*\(\d+\))+)\s*$)");
    std::smatch m;
    std::string head = body;
    if (std::regex_search(body, m, from_re)) {
        has_from = true;
        head = text::trim(body.substr(0, static_cast<std::size_t>(m.position(0))));
        static const std::regex ref_re(R"(\((\d+)\))");
        const std::string refs = m[1].str();
        for (auto it = std::sregex_iterator(refs.begin(), refs.end(), ref_re); it != std::sregex_iterator(); ++it) {
            step.from.push_back(std::stoi((*it)[1].str()));
        }
    }
    if (head.empty()) return;
    if (head.rfind("with ", 0) != 0) throw ParseError("malformed inference line '" + body + "'", offset);
    head = text::trim(head.substr(5));
    if (!head.empty() && head.back() == ')') {
        const auto open = head.rfind('(');
        if (open != std::string::npos && open > 0) {
            step.variant = text::trim(head.substr(open + 1, head.size() - open - 2));
            head = text::trim(head.substr(0, open));
        }
    }
    if (head.empty()) throw ParseError("inference line names no scheme", offset);
    step.scheme = head;
}

}  // namespace

void validate(const Argument& arg) {
    if (arg.statements.empty()) throw ParseError("argument has no statements", 0);
    for (std::size_t i = 0; i < arg.statements.size(); ++i) {
        if (arg.statements[i].number != static_cast<int>(i) + 1) {
            throw ParseError("statement numbers are not consecutive at (" + std::to_string(arg.statements[i].number) + ")",
                             0);
        }
    }
    if (arg.inferences.empty()) throw ParseError("argument has no inference step", 0);
    for (const auto& inf : arg.inferences) {
        if (inf.from.empty()) throw ParseError("inference deriving (" + std::to_string(inf.derives) + ") uses no premises", 0);
        for (int f : inf.from) {
            if (f < 1 || f >= inf.derives) {
                throw ParseError("dangling reference (" + std::to_string(f) + ") in inference deriving (" +
                                     std::to_string(inf.derives) + ")",
                                 0);
            }
        }
    }
    if (!arg.is_derived(arg.statements.back().number)) throw ParseError("missing final conclusion", 0);
}

Argument parse_argdown(std::string_view text) {
    static const std::regex statement_re(R"(^\((\d+)\)\s*(.*)$)");
    Argument arg;
    std::vector<Line> lines = lines_of(text);

    // Explicit from-lists, kept separate so bare separators can be resolved
    // against the statements seen so far.
    struct Pending {
        InferenceStep step;
        bool has_from = false;
        std::size_t offset = 0;
    };
    std::optional<Pending> pending;
    std::vector<std::size_t> inference_offsets;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const Line& line = lines[i];
        std::smatch m;
        if (std::regex_match(line.text, m, statement_re)) {
            const int number = std::stoi(m[1].str());
            const int expected = static_cast<int>(arg.statements.size()) + 1;
            if (number != expected) {
                throw ParseError("expected statement (" + std::to_string(expected) + ") but found (" +
                                     std::to_string(number) + ")",
                                 line.offset);
            }
            const std::string body = text::normalize_ws(m[2].str());
            if (body.empty()) throw ParseError("empty statement (" + std::to_string(number) + ")", line.offset);
            arg.statements.push_back({number, body});
            if (pending) {
                InferenceStep step = std::move(pending->step);
                step.derives = number;
                if (!pending->has_from) step.from = implicit_from(arg, number);
                for (int f : step.from) {
                    if (f < 1 || f >= number) {
                        throw ParseError("dangling reference (" + std::to_string(f) + ")", pending->offset);
                    }
                }
                arg.inferences.push_back(std::move(step));
                inference_offsets.push_back(pending->offset);
                pending.reset();
            }
            continue;
        }
        if (is_separator(line.text)) {
            if (pending) throw ParseError("two inference blocks without a statement between them", line.offset);
            if (arg.statements.empty()) throw ParseError("inference before any premise", line.offset);
            Pending p;
            p.offset = line.offset;
            const std::string& t = line.text;
            const bool bare = std::all_of(t.begin(), t.end(), [](char c) { return c == '-'; });
            if (bare && t.size() >= 4) {
                // "----": a closed block with no annotation.
            } else if (bare) {
                // "--" opens a block; it may contain one annotation line before the closing "--".
                if (i + 1 < lines.size() && !is_separator(lines[i + 1].text) &&
                    !std::regex_match(lines[i + 1].text, statement_re)) {
                    ++i;
                    parse_inference_body(lines[i].text, lines[i].offset, p.step, p.has_from);
                }
                if (i + 1 >= lines.size() || !is_separator(lines[i + 1].text)) {
                    throw ParseError("unterminated inference block", p.offset);
                }
                const auto& closing = lines[i + 1].text;
                if (!std::all_of(closing.begin(), closing.end(), [](char c) { return c == '-'; })) {
                    throw ParseError("malformed closing separator", lines[i + 1].offset);
                }
                ++i;
            } else {
                // "-- with ... --" on one line.
                std::string inner = t.substr(2);
                inner = text::trim(inner);
                if (inner.size() >= 2 && inner.compare(inner.size() - 2, 2, "--") == 0) {
                    inner = text::trim(inner.substr(0, inner.size() - 2));
                } else {
                    throw ParseError("malformed inference line", line.offset);
                }
                parse_inference_body(inner, line.offset, p.step, p.has_from);
            }
            pending = std::move(p);
            continue;
        }
        // A wrapped continuation of the previous statement.
        if (arg.statements.empty() || pending) throw ParseError("unexpected line '" + line.text + "'", line.offset);
        arg.statements.back().text = text::normalize_ws(arg.statements.back().text + " " + line.text);
    }
    if (pending) throw ParseError("inference block is not followed by a conclusion", pending->offset);
    if (arg.statements.empty()) throw ParseError("argument has no statements", 0);
    if (arg.inferences.empty()) throw ParseError("argument has no inference step", 0);
    if (!arg.is_derived(arg.statements.back().number)) {
        throw ParseError("missing final conclusion", lines.back().offset);
    }
    return arg;
}

std::string render_argdown(const Argument& arg) {
    std::string out;
    for (const auto& s : arg.statements) {
        if (const InferenceStep* inf = arg.inference_deriving(s.number)) {
            if (!inf->scheme) {
                if (inf->from == implicit_from(arg, s.number)) {
                    out += "----\n";
                } else {
                    out += "--\nfrom";
                    for (int f : inf->from) out += " (" + std::to_string(f) + ")";
                    out += "\n--\n";
                }
            } else {
                out += "--\nwith " + *inf->scheme;
                if (inf->variant) out += " (" + *inf->variant + ")";
                out += " from";
                for (int f : inf->from) out += " (" + std::to_string(f) + ")";
                out += "\n--\n";
            }
        }
        out += "(" + std::to_string(s.number) + ") " + s.text + "\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

std::vector<Statement> premises_of(const Argument& arg) {
    std::vector<Statement> out;
    for (const auto& s : arg.statements) {
        if (!arg.is_derived(s.number)) out.push_back(s);
    }
    return out;
}

const Statement& final_conclusion_of(const Argument& arg) {
    if (arg.statements.empty()) throw ParseError("argument has no statements", 0);
    return arg.statements.back();
}

std::vector<Statement> intermediate_conclusions_of(const Argument& arg) {
    std::vector<Statement> out;
    for (const auto& s : arg.statements) {
        if (arg.is_derived(s.number) && s.number != arg.statements.back().number) out.push_back(s);
    }
    return out;
}

}  // namespace deepa2::argdown
