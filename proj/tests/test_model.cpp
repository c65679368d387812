#include "doctest.h"

#include "deepa2/errors.hpp"
#include "deepa2/model.hpp"
#include "support/appendix_record.hpp"

#include <random>
#include <set>

#include "json.hpp"

using namespace deepa2;
using namespace deepa2::model;

namespace {

GenerationRequest request_for(const char* mode, const DeepA2Record& r, int step = 0) {
    GenerationRequest req;
    req.mode = find_mode(mode);
    for (Dim d : req.mode.inputs)
        if (r.has(d)) req.inputs[d] = serialize_dimension(r, d);
    req.record_id = r.meta.id;
    req.step = step;
    return req;
}

}  // namespace

TEST_CASE("prompt formatting") {
    const std::string src = "Socrates is mortal because every human is.";
    CHECK(format_prompt(find_mode("S ~> J"), {{Dim::S, src}}) ==
          "conjectures: source: Socrates is mortal because every human is.");
    CHECK(format_prompt(find_mode("S J ~> A"), {{Dim::S, src}, {Dim::J, "Socrates is mortal"}}) ==
          "argdown: source: Socrates is mortal because every human is. conjectures: Socrates is mortal");
    CHECK(format_prompt(find_mode("P ~> F"), {{Dim::P, "Socrates is human"}}) == "formalize: premises: Socrates is human");
    CHECK(format_prompt(find_mode("C ~> O"), {{Dim::C, "Socrates is mortal"}}) ==
          "conclusion_form: conclusion: Socrates is mortal");
    CHECK(format_prompt(find_mode("R J ~> A"), {{Dim::R, ""}, {Dim::J, "Socrates is mortal"}}) ==
          "argdown: reasons:  conjectures: Socrates is mortal");
    // inputs beyond the mode's are ignored
    CHECK(format_prompt(find_mode("S ~> R"), {{Dim::S, "x"}, {Dim::A, "y"}}) == "reasons: source: x");
}

TEST_CASE("prompt formatting names the missing input") {
    try {
        format_prompt(find_mode("R J ~> A"), {{Dim::R, "a"}});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("conjectures") != std::string::npos);
    }
}

TEST_CASE("distinct inputs give distinct prompts") {
    std::mt19937 rng(7);
    const std::vector<std::string> words{"a", "b", "Socrates", "mortal", "(ref: (1))", "|", "is"};
    std::map<std::string, std::pair<std::string, std::map<Dim, std::string>>> seen;
    for (int i = 0; i < 4000; ++i) {
        const auto& mode = mode_registry()[rng() % mode_registry().size()];
        std::map<Dim, std::string> inputs;
        for (Dim d : mode.inputs) {
            std::string v;
            const int n = static_cast<int>(rng() % 3);
            for (int k = 0; k < n; ++k) v += (k ? " " : "") + words[rng() % words.size()];
            inputs[d] = v;
        }
        const auto prompt = format_prompt(mode, inputs);
        auto [it, fresh] = seen.emplace(prompt, std::make_pair(mode_name(mode), inputs));
        if (!fresh) {
            CHECK(it->second.first == mode_name(mode));
            CHECK(it->second.second == inputs);
        }
    }
}

TEST_CASE("oracle passes target dimensions through") {
    const auto rec = testing::dilemma_record();
    OracleBackend oracle({rec});
    for (const auto& m : mode_registry()) {
        GenerationRequest req;
        req.mode = m;
        req.record_id = "dilemma";
        CHECK(oracle.generate(req) == serialize_dimension(rec, m.output));
    }
    GenerationRequest unknown;
    unknown.mode = find_mode("S ~> A");
    unknown.record_id = "nope";
    CHECK_THROWS_AS(oracle.generate(unknown), Error);

    DeepA2Record partial;
    partial.meta.id = "partial";
    partial.source = "s";
    OracleBackend sparse({partial});
    unknown.record_id = "partial";
    CHECK(sparse.generate(unknown) == "");
}

TEST_CASE("noisy oracle at rate 0 is the oracle") {
    const auto rec = testing::dilemma_record();
    OracleBackend oracle({rec});
    NoisyOracleBackend noisy({rec}, 0.0, 3);
    for (int step = 0; step < 20; ++step)
        for (const auto& m : mode_registry()) {
            auto req = request_for(mode_name(m).c_str(), rec, step);
            CHECK(noisy.generate(req) == oracle.generate(req));
        }
}

TEST_CASE("noisy oracle at rate 1 corrupts every output") {
    const auto rec = testing::dilemma_record();
    OracleBackend oracle({rec});
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        NoisyOracleBackend noisy({rec}, 1.0, seed);
        for (int step = 0; step < 10; ++step)
            for (const auto& m : mode_registry()) {
                auto req = request_for(mode_name(m).c_str(), rec, step);
                CHECK(noisy.generate(req) != oracle.generate(req));
            }
    }
}

TEST_CASE("noisy oracle is reproducible and seed dependent") {
    const auto rec = testing::dilemma_record();
    NoisyOracleBackend a({rec}, 0.5, 11), b({rec}, 0.5, 11), c({rec}, 0.5, 12);
    int differ = 0;
    for (int step = 0; step < 30; ++step) {
        auto req = request_for("S ~> A", rec, step);
        const auto out = a.generate(req);
        CHECK(out == b.generate(req));
        CHECK(out == a.generate(req));
        differ += out != c.generate(req);
    }
    CHECK(differ > 0);
}

TEST_CASE("corruption rate is honoured") {
    const auto rec = testing::dilemma_record();
    OracleBackend oracle({rec});
    NoisyOracleBackend noisy({rec}, 0.25, 1);
    int corrupted = 0;
    const int n = 4000;
    for (int step = 0; step < n; ++step) {
        auto req = request_for("A ~> P", rec, step);
        corrupted += noisy.generate(req) != oracle.generate(req);
    }
    // binomial(4000, .25): sd is about 27
    CHECK(corrupted > 1000 - 110);
    CHECK(corrupted < 1000 + 110);
    CHECK_THROWS_AS(NoisyOracleBackend({rec}, 1.5, 1), Error);
    CHECK_THROWS_AS(NoisyOracleBackend({rec}, -0.1, 1), Error);
}

TEST_CASE("corruptions always change the text") {
    const auto rec = testing::dilemma_record();
    std::vector<std::pair<Dim, std::string>> cases;
    for (Dim d : kAllDims) cases.emplace_back(d, serialize_dimension(rec, d));
    for (Dim d : kAllDims) cases.emplace_back(d, "");
    cases.emplace_back(Dim::R, "same same");
    cases.emplace_back(Dim::A, "not argdown at all");
    cases.emplace_back(Dim::K, "garbage without colon");
    for (const auto& [d, clean] : cases)
        for (std::uint64_t salt = 0; salt < 50; ++salt) CHECK(corrupt_output(d, clean, salt) != clean);
}

TEST_CASE("request body schema") {
    const auto rec = testing::dilemma_record();
    auto req = request_for("S R ~> J", rec);
    auto body = nlohmann::json::parse(http_request_body(req));
    CHECK(body["mode"] == "conjectures");
    CHECK(body["beam_width"] == 2);
    CHECK(body["inputs"].size() == 2);
    CHECK(body["inputs"]["source"] == *rec.source);
    CHECK(body["inputs"]["reasons"] == serialize_dimension(rec, Dim::R));
    req.inputs.erase(Dim::R);
    CHECK_THROWS_AS(http_request_body(req), Error);
}

TEST_CASE("backend specs") {
    const auto rec = testing::dilemma_record();
    HttpBackendConfig none;
    CHECK(make_backend("oracle", {rec}, 0, none) != nullptr);
    CHECK(make_backend("noisy:0.25", {rec}, 0, none) != nullptr);
    CHECK(make_backend("http://127.0.0.1:9", {rec}, 0, none) != nullptr);
    CHECK(make_backend("http:127.0.0.1:9", {rec}, 0, none) != nullptr);
    CHECK(make_backend("http:http://127.0.0.1:9", {rec}, 0, none) != nullptr);
    CHECK_THROWS_AS(make_backend("http", {rec}, 0, none), Error);
    CHECK_THROWS_AS(make_backend("noisy:lots", {rec}, 0, none), Error);
    CHECK_THROWS_AS(make_backend("noisy:2", {rec}, 0, none), Error);
    CHECK_THROWS_AS(make_backend("t5", {rec}, 0, none), Error);
}
