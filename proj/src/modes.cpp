#include "deepa2/modes.hpp"

#include "deepa2/errors.hpp"
#include "deepa2/text.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace deepa2 {

namespace {

struct ModeRow {
    std::string_view name;
    double w1;
    std::optional<double> w2;
};

// Reconstruction, reason/conjecture extraction, premise/conclusion extraction
// and the formal modes, which EntailmentBank-style data cannot train.
constexpr ModeRow kModeTable[] = {
    {"S ~> A", 1, 1},     {"S R ~> A", 1, 1},   {"S J ~> A", 1, 1},   {"S R J ~> A", 1, 1},
    {"R J ~> A", 1, 1},   {"P C ~> A", 1, 1},   {"S ~> R", 1, 1},     {"S J ~> R", 1, 1},
    {"S A ~> R", 1, 1},   {"S ~> J", 1, 1},     {"S R ~> J", 1, 1},   {"S A ~> J", 1, 1},
    {"A ~> P", .2, .2},   {"A ~> C", .2, .2},   {"F K ~> P", .7, {}}, {"O K ~> C", .7, {}},
    {"P ~> F", .7, {}},   {"P C O ~> F", .7, {}}, {"C ~> O", .7, {}}, {"C P F ~> O", .7, {}},
    {"P F ~> K", .7, {}}, {"C O ~> K", .7, {}}, {"P F C O ~> K", .7, {}},
};

// Mode sequences with their ids; names for the three chains that have one.
struct ChainRow {
    int id;
    std::string_view modes;
    std::string_view name;
};

constexpr ChainRow kChainTable[] = {
    {1, "S ~> A, S ~> R, S ~> J", "straight"},
    {2, "S ~> J, S ~> R, S J ~> A", ""},
    {3, "S ~> J, S ~> R, S R ~> A", ""},
    {4, "S ~> J, S ~> R, R J ~> A", ""},
    {5, "S ~> J, S J ~> R, R J ~> A", ""},
    {6, "S ~> J, S J ~> R, S R J ~> A", ""},
    {7, "S ~> R, S R ~> J, R J ~> A", ""},
    {8, "S ~> R, S R ~> J, S R J ~> A", ""},
    {9, "S ~> A, S A ~> R, S A ~> J, R J ~> A", "hermeneutic cycle"},
    {10, "S ~> A, S A ~> R, S A ~> J, S R J ~> A", ""},
    {11, "S ~> A, S A ~> R, S A ~> J, S R J ~> A, S A ~> R, S A ~> J, S R J ~> A", ""},
    {12, "S ~> A, A ~> P, A ~> C, P ~> F, P F ~> K, F K ~> P, P C ~> A, S A ~> R, S A ~> J", ""},
    {13, "S ~> A, A ~> P, A ~> C, C ~> O, C O ~> K, O K ~> C, P C ~> A, S A ~> R, S A ~> J",
     "logical streamlining"},
    {14,
     "S ~> A, A ~> P, A ~> C, C ~> O, C O ~> K, O K ~> C, P C ~> A, A ~> P, A ~> C, P ~> F, P F ~> K, "
     "F K ~> P, P C ~> A, S A ~> R, S A ~> J",
     ""},
    {15,
     "S ~> A, A ~> P, A ~> C, P ~> F, C P F ~> O, P F C O ~> K, F K ~> P, O K ~> C, P C ~> A, S A ~> R, "
     "S A ~> J",
     ""},
    {16,
     "S ~> A, A ~> P, A ~> C, P ~> F, C P F ~> O, P C O ~> F, P F C O ~> K, F K ~> P, O K ~> C, P C ~> A, "
     "S A ~> R, S A ~> J",
     ""},
};

constexpr std::string_view kFormalization = "A ~> P, A ~> C, P ~> F, C P F ~> O, P F C O ~> K";

struct ParsedMode {
    std::vector<Dim> inputs;
    Dim output;
};

ParsedMode parse_mode_name(std::string_view name) {
    std::string s(name);
    const std::string unicode_arrow = "\xE2\x87\x9D";
    if (auto p = s.find(unicode_arrow); p != std::string::npos) s.replace(p, unicode_arrow.size(), "~>");
    const auto arrow = s.find("~>");
    if (arrow == std::string::npos) throw Error("mode name without '~>': " + std::string(name));
    auto dims = [&](std::string_view part) {
        std::vector<Dim> out;
        for (char c : part) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            auto d = dim_from_letter(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
            if (!d) throw Error("unknown dimension letter '" + std::string(1, c) + "' in mode " + std::string(name));
            out.push_back(*d);
        }
        return out;
    };
    auto inputs = dims(std::string_view(s).substr(0, arrow));
    auto outputs = dims(std::string_view(s).substr(arrow + 2));
    if (inputs.empty() || outputs.size() != 1) throw Error("malformed mode name: " + std::string(name));
    return {std::move(inputs), outputs.front()};
}

std::vector<ModeSpec> build_registry() {
    std::vector<ModeSpec> out;
    for (const auto& row : kModeTable) {
        auto parsed = parse_mode_name(row.name);
        out.push_back({std::move(parsed.inputs), parsed.output, row.w1, row.w2});
    }
    return out;
}

std::vector<ModeSpec> modes_of(std::string_view list) {
    std::vector<ModeSpec> out;
    for (const auto& part : text::split(list, ',')) out.push_back(find_mode(part));
    return out;
}

std::string normalized_chain_name(std::string_view s) {
    std::string out;
    for (char c : s) out.push_back(c == '-' || c == '_' ? ' ' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return text::normalize_ws(out);
}

}  // namespace

std::string mode_name(const ModeSpec& m) {
    std::string out;
    for (Dim d : m.inputs) {
        out.push_back(letter(d));
        out.push_back(' ');
    }
    out += "~> ";
    out.push_back(letter(m.output));
    return out;
}

const std::vector<ModeSpec>& mode_registry() {
    static const std::vector<ModeSpec> registry = build_registry();
    return registry;
}

const ModeSpec& find_mode(std::string_view name) {
    const auto parsed = parse_mode_name(name);
    for (const auto& m : mode_registry())
        if (m.inputs == parsed.inputs && m.output == parsed.output) return m;
    throw Error("no such mode: " + text::trim(name));
}

std::optional<double> mode_weight(const ModeSpec& m, WeightColumn column) {
    if (column == WeightColumn::Aaac) return m.weight_aaac;
    return m.weight_eb;
}

const std::vector<ChainSpec>& chain_catalog() {
    static const std::vector<ChainSpec> catalog = [] {
        std::vector<ChainSpec> out;
        for (const auto& row : kChainTable) {
            ChainSpec c{row.id, modes_of(row.modes), std::nullopt};
            if (!row.name.empty()) c.name = std::string(row.name);
            validate_chain(c);
            out.push_back(std::move(c));
        }
        return out;
    }();
    return catalog;
}

const ChainSpec& formalization_subchain() {
    static const ChainSpec chain = [] {
        ChainSpec c{0, modes_of(kFormalization), std::string("formalization")};
        validate_chain(c, {Dim::S, Dim::A});
        return c;
    }();
    return chain;
}

const ChainSpec& find_chain(int id) {
    for (const auto& c : chain_catalog())
        if (c.id == id) return c;
    throw Error("no chain with id " + std::to_string(id) + " (ids run from 1 to 16)");
}

const ChainSpec& find_chain(std::string_view id_or_name) {
    const std::string s = text::trim(id_or_name);
    if (!s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
        if (s.size() > 3) throw Error("no chain with id " + s);
        return find_chain(std::stoi(s));
    }
    const std::string wanted = normalized_chain_name(s);
    for (const auto& c : chain_catalog())
        if (c.name && *c.name == wanted) return c;
    throw Error("no chain named '" + s + "'");
}

int sophistication(const ChainSpec& chain) {
    int total = 0;
    for (const auto& m : chain.modes)
        total += static_cast<int>(std::count_if(m.inputs.begin(), m.inputs.end(), [](Dim d) { return d != Dim::S; }));
    return total;
}

void validate_chain(const ChainSpec& chain, const std::vector<Dim>& available) {
    std::set<Dim> have(available.begin(), available.end());
    for (std::size_t i = 0; i < chain.modes.size(); ++i) {
        const auto& m = chain.modes[i];
        for (Dim d : m.inputs)
            if (!have.count(d))
                throw InvariantError("chain " + std::to_string(chain.id) + ", step " + std::to_string(i + 1) + " (" +
                                     mode_name(m) + "): input " + std::string(1, letter(d)) +
                                     " is not produced by an earlier step");
        have.insert(m.output);
    }
}

}  // namespace deepa2
