#include "deepa2/model.hpp"

#include "deepa2/argdown.hpp"
#include "deepa2/errors.hpp"
#include "deepa2/text.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <random>

namespace deepa2::model {

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t request_seed(std::uint64_t seed, const GenerationRequest& r) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, std::to_string(seed));
    h = fnv1a(h, "\x1f" + r.record_id);
    h = fnv1a(h, "\x1f" + mode_name(r.mode));
    h = fnv1a(h, "\x1f" + std::to_string(r.step));
    return h;
}

// Shuffles the words of `s`; rotates them when the shuffle happens to be the
// identity. Returns false when all words are equal.
bool shuffle_words(std::string& s, std::mt19937_64& rng) {
    auto words = text::split_ws(s);
    if (std::adjacent_find(words.begin(), words.end(), std::not_equal_to<>()) == words.end()) return false;
    auto shuffled = words;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    if (shuffled == words) std::rotate(shuffled.begin(), shuffled.begin() + 1, shuffled.end());
    s = text::join(shuffled, " ");
    return true;
}

template <class T>
std::size_t pick(const std::vector<T>& v, std::mt19937_64& rng) {
    return std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng);
}

enum class Corruption { Drop, Shuffle, Dangle };

constexpr int kDanglingRef = 99;

std::optional<std::string> corrupt_list(const std::string& clean, Corruption kind, std::mt19937_64& rng) {
    StatementList items = parse_statement_list(clean);
    switch (kind) {
        case Corruption::Drop:
            if (items.empty()) return std::nullopt;
            items.erase(items.begin() + static_cast<std::ptrdiff_t>(pick(items, rng)));
            break;
        case Corruption::Shuffle: {
            std::vector<std::size_t> order(items.size());
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            bool done = false;
            for (std::size_t i : order)
                if ((done = shuffle_words(items[i].text, rng))) break;
            if (!done) return std::nullopt;
            break;
        }
        case Corruption::Dangle: {
            std::vector<std::size_t> with_ref;
            for (std::size_t i = 0; i < items.size(); ++i)
                if (items[i].ref && *items[i].ref != kDanglingRef) with_ref.push_back(i);
            if (with_ref.empty()) return std::nullopt;
            items[with_ref[pick(with_ref, rng)]].ref = kDanglingRef;
            break;
        }
    }
    return serialize_statement_list(items);
}

std::optional<std::string> corrupt_argdown(const std::string& clean, Corruption kind, std::mt19937_64& rng) {
    argdown::Argument arg;
    try {
        arg = argdown::parse_argdown(clean);
    } catch (const ParseError&) {
        if (kind != Corruption::Shuffle) return std::nullopt;
        std::string s = clean;
        return shuffle_words(s, rng) ? std::optional(s) : std::nullopt;
    }
    switch (kind) {
        case Corruption::Drop: {
            // Leaves a gap in the numbering.
            auto premises = argdown::premises_of(arg);
            if (premises.empty()) return std::nullopt;
            const int gone = premises[pick(premises, rng)].number;
            std::erase_if(arg.statements, [&](const argdown::Statement& s) { return s.number == gone; });
            break;
        }
        case Corruption::Shuffle: {
            std::vector<std::size_t> order(arg.statements.size());
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            bool done = false;
            for (std::size_t i : order)
                if ((done = shuffle_words(arg.statements[i].text, rng))) break;
            if (!done) return std::nullopt;
            break;
        }
        case Corruption::Dangle: {
            if (arg.inferences.empty()) return std::nullopt;
            auto& step = arg.inferences[pick(arg.inferences, rng)];
            if (step.from.empty()) step.from = argdown::implicit_from(arg, step.derives);
            if (step.from.empty()) return std::nullopt;
            step.from[pick(step.from, rng)] = kDanglingRef;
            // A bare separator would hide the changed from-list.
            if (!step.scheme) step.scheme = "modus ponens";
            break;
        }
    }
    return argdown::render_argdown(arg);
}

std::optional<std::string> corrupt_keys(const std::string& clean, Corruption kind, std::mt19937_64& rng) {
    SignatureKeys keys = parse_keys(clean);
    if (keys.empty()) return std::nullopt;
    std::vector<char> letters;
    for (const auto& [k, v] : keys) letters.push_back(k);
    const char chosen = letters[pick(letters, rng)];
    switch (kind) {
        case Corruption::Drop:
            keys.erase(chosen);
            break;
        case Corruption::Shuffle:
            if (!shuffle_words(keys[chosen], rng)) return std::nullopt;
            break;
        case Corruption::Dangle:
            return std::nullopt;
    }
    return serialize_keys(keys);
}

std::optional<std::string> apply(Dim output, const std::string& clean, Corruption kind, std::mt19937_64& rng) {
    try {
        switch (output) {
            case Dim::A:
                return corrupt_argdown(clean, kind, rng);
            case Dim::K:
                return corrupt_keys(clean, kind, rng);
            case Dim::S: {
                if (kind != Corruption::Shuffle) return std::nullopt;
                std::string s = clean;
                return shuffle_words(s, rng) ? std::optional(s) : std::nullopt;
            }
            default:
                return corrupt_list(clean, kind, rng);
        }
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

std::string task_prefix(const ModeSpec& mode) {
    if (mode.output == Dim::F && mode.inputs == std::vector<Dim>{Dim::P}) return "formalize";
    return std::string(keyword(mode.output));
}

std::string format_prompt(const ModeSpec& mode, const std::map<Dim, std::string>& inputs) {
    std::string out = task_prefix(mode) + ": ";
    for (Dim d : mode.inputs) {
        auto it = inputs.find(d);
        if (it == inputs.end())
            throw Error("prompt for " + mode_name(mode) + " lacks input '" + std::string(keyword(d)) + "'");
        out += std::string(keyword(d)) + ": " + it->second + " ";
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

OracleBackend::OracleBackend(std::vector<DeepA2Record> targets) : targets_(std::move(targets)) {
    for (std::size_t i = 0; i < targets_.size(); ++i) index_.emplace(targets_[i].meta.id, i);
}

const DeepA2Record& OracleBackend::target(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error("oracle has no record with id '" + id + "'");
    return targets_[it->second];
}

std::string OracleBackend::generate(const GenerationRequest& request) {
    const DeepA2Record& t = target(request.record_id);
    if (!t.has(request.mode.output)) return "";
    return serialize_dimension(t, request.mode.output);
}

NoisyOracleBackend::NoisyOracleBackend(std::vector<DeepA2Record> targets, double rate, std::uint64_t seed)
    : oracle_(std::move(targets)), rate_(rate), seed_(seed) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw Error("corruption rate must lie in [0, 1]");
}

std::string NoisyOracleBackend::generate(const GenerationRequest& request) {
    std::string clean = oracle_.generate(request);
    std::mt19937_64 rng(request_seed(seed_, request));
    if (!std::bernoulli_distribution(rate_)(rng)) return clean;
    return corrupt_output(request.mode.output, clean, rng());
}

std::string corrupt_output(Dim output, const std::string& clean, std::uint64_t salt) {
    std::mt19937_64 rng(salt);
    std::vector<Corruption> kinds{Corruption::Drop, Corruption::Shuffle, Corruption::Dangle};
    std::shuffle(kinds.begin(), kinds.end(), rng);
    for (Corruption k : kinds) {
        auto out = apply(output, clean, k, rng);
        if (out && *out != clean) return *out;
    }
    // Nothing to take apart: add a bogus item instead.
    switch (output) {
        case Dim::A:
        case Dim::S:
            return clean + (clean.empty() ? "" : " ") + "nothing follows";
        case Dim::K: {
            SignatureKeys keys;
            try {
                keys = parse_keys(clean);
            } catch (const Error&) {
            }
            char free = 'Z';
            while (free > 'A' && keys.count(free)) --free;
            keys[free] = "nothing in particular";
            return serialize_keys(keys);
        }
        default: {
            StatementList items;
            try {
                items = parse_statement_list(clean);
            } catch (const Error&) {
            }
            items.push_back({"nothing follows", kDanglingRef});
            return serialize_statement_list(items);
        }
    }
}

HttpBackendConfig HttpBackendConfig::from_env() {
    HttpBackendConfig c;
    if (const char* e = std::getenv("DEEPA2_ENDPOINT")) c.endpoint = e;
    if (const char* t = std::getenv("DEEPA2_TIMEOUT_MS")) {
        try {
            c.timeout_ms = std::stoi(t);
        } catch (const std::exception&) {
            throw Error(std::string("DEEPA2_TIMEOUT_MS is not a number: ") + t);
        }
        if (c.timeout_ms <= 0) throw Error("DEEPA2_TIMEOUT_MS must be positive");
    }
    return c;
}

std::unique_ptr<ModelBackend> make_backend(std::string_view spec, const std::vector<DeepA2Record>& targets,
                                           std::uint64_t seed, const HttpBackendConfig& http) {
    const std::string s = text::trim(spec);
    if (s == "oracle") return std::make_unique<OracleBackend>(targets);
    if (text::starts_with(s, "noisy:")) {
        double rate = 0;
        try {
            std::size_t used = 0;
            rate = std::stod(s.substr(6), &used);
            if (used != s.size() - 6) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw Error("malformed corruption rate in backend spec '" + s + "'");
        }
        return std::make_unique<NoisyOracleBackend>(targets, rate, seed);
    }
    if (s == "http" || text::starts_with(s, "http:")) {
        HttpBackendConfig c = http;
        if (s.size() > 5) {
            const std::string rest = s.substr(5);
            if (text::starts_with(rest, "//"))
                c.endpoint = s;
            else if (text::starts_with(rest, "http://") || text::starts_with(rest, "https://"))
                c.endpoint = rest;
            else
                c.endpoint = "http://" + rest;
        }
        if (c.endpoint.empty()) throw Error("http backend needs an endpoint (http:<url> or DEEPA2_ENDPOINT)");
        return make_http_backend(c);
    }
    throw Error("unknown backend '" + s + "' (expected oracle, noisy:<rate> or http:<url>)");
}

}  // namespace deepa2::model
