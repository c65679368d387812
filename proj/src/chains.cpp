#include "deepa2/chains.hpp"

#include "deepa2/errors.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "json.hpp"

namespace deepa2::chains {

namespace {

using json = nlohmann::json;

bool run_modes(const ChainSpec& chain, const std::vector<ModeSpec>& modes, model::ModelBackend& backend,
               ChainResult& result) {
    for (const auto& mode : modes) {
        model::GenerationRequest req;
        req.mode = mode;
        req.record_id = result.record_id;
        req.step = static_cast<int>(result.trace.size());
        for (Dim d : mode.inputs) {
            auto it = result.dict.find(d);
            if (it == result.dict.end())
                throw InvariantError("chain " + std::to_string(chain.id) + ": " + mode_name(mode) + " needs " +
                                     std::string(keyword(d)) + ", which no earlier step produced");
            req.inputs.emplace(d, it->second);
        }
        std::string output;
        try {
            output = backend.generate(req);
        } catch (const BackendUnavailableError& e) {
            result.error = e.what();
            return false;
        }
        result.trace.push_back({mode, req.inputs, output});
        result.dict[mode.output] = std::move(output);
    }
    return true;
}

json dims_to_json(const std::map<Dim, std::string>& dims) {
    json j = json::object();
    for (const auto& [d, v] : dims) j[std::string(keyword(d))] = v;
    return j;
}

std::map<Dim, std::string> dims_from_json(const json& j) {
    std::map<Dim, std::string> out;
    for (auto& [k, v] : j.items()) {
        auto d = dim_from_keyword(k);
        if (!d) throw ParseError("unknown dimension '" + k + "' in trace", 0);
        out[*d] = v.get<std::string>();
    }
    return out;
}

bool supports(const DeepA2Record& r, const ModeSpec& m) {
    if (!r.has(m.output)) return false;
    return std::all_of(m.inputs.begin(), m.inputs.end(), [&](Dim d) { return r.has(d); });
}

}  // namespace

ChainResult run_chain(const ChainSpec& chain, const std::string& source, model::ModelBackend& backend,
                      bool with_formalization, const std::string& record_id) {
    ChainResult result;
    result.chain_id = chain.id;
    result.record_id = record_id;
    result.with_formalization = with_formalization;
    result.dict[Dim::S] = source;
    if (run_modes(chain, chain.modes, backend, result) && with_formalization)
        run_modes(chain, formalization_subchain().modes, backend, result);
    return result;
}

std::vector<ChainResult> run_corpus(const std::vector<DeepA2Record>& records, model::ModelBackend& backend,
                                    const RunOptions& options) {
    std::vector<const ChainSpec*> chains;
    for (int id : options.chain_ids) chains.push_back(&find_chain(id));
    std::vector<ChainResult> out(records.size() * chains.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
            try {
                const auto& rec = records[i];
                if (!rec.source) throw MissingDimensionError("record '" + rec.meta.id + "' has no source text");
                for (std::size_t c = 0; c < chains.size(); ++c)
                    out[i * chains.size() + c] =
                        run_chain(*chains[c], *rec.source, backend, options.with_formalization, rec.meta.id);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = records.size();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(records.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

metrics::MetricReport evaluate_result(const ChainResult& result, const DeepA2Record& target,
                                      const metrics::EvalContext& ctx) {
    auto report = metrics::evaluate(result.dict, target, ctx);
    if (result.error) report.diagnostics.push_back("chain aborted: " + *result.error);
    return report;
}

std::vector<double> default_ranking_key(const metrics::MetricReport& r) {
    return {static_cast<double>(r.sys_val), static_cast<double>(r.sys_pp + r.sys_rp + r.sys_rc + r.sys_us), r.sys_sch,
            static_cast<double>(r.exe_meq), (r.exe_rss + r.exe_jss) / 2.0};
}

std::size_t pool_index(std::span<const Scored> candidates, const RankingKey& key) {
    if (candidates.empty()) throw Error("pooling needs at least one result");
    std::size_t best = 0;
    auto best_key = key(*candidates[0].report);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        auto k = key(*candidates[i].report);
        if (k > best_key) {
            best = i;
            best_key = std::move(k);
        }
    }
    return best;
}

const ChainResult& pool(std::span<const Scored> candidates, const RankingKey& key) {
    return *candidates[pool_index(candidates, key)].result;
}

std::vector<TrainingPair> export_training(const std::vector<DeepA2Record>& records, WeightColumn weights,
                                          int n_per_record, std::uint64_t seed) {
    if (n_per_record < 0) throw Error("n_per_record must not be negative");
    std::vector<TrainingPair> out;
    if (n_per_record == 0) return out;
    out.reserve(records.size() * static_cast<std::size_t>(n_per_record));
    std::mt19937_64 rng(seed);
    const auto& registry = mode_registry();
    for (const auto& rec : records) {
        std::vector<double> w(registry.size(), 0.0);
        bool any = false;
        for (std::size_t i = 0; i < registry.size(); ++i) {
            auto wi = mode_weight(registry[i], weights);
            if (wi && supports(rec, registry[i])) {
                w[i] = *wi;
                any = true;
            }
        }
        if (!any) throw Error("record '" + rec.meta.id + "' supports none of the weighted modes");
        std::map<Dim, std::string> dims;
        for (Dim d : kAllDims)
            if (rec.has(d)) dims[d] = serialize_dimension(rec, d);
        std::discrete_distribution<std::size_t> draw(w.begin(), w.end());
        for (int k = 0; k < n_per_record; ++k) {
            const auto& m = registry[draw(rng)];
            out.push_back({model::format_prompt(m, dims), dims.at(m.output), mode_name(m)});
        }
    }
    return out;
}

std::string result_to_json(const ChainResult& r) {
    json trace = json::array();
    for (const auto& s : r.trace)
        trace.push_back({{"mode", mode_name(s.mode)}, {"inputs", dims_to_json(s.inputs)}, {"output", s.output}});
    json j{{"chain", r.chain_id},
           {"record", r.record_id},
           {"with_formalization", r.with_formalization},
           {"dict", dims_to_json(r.dict)},
           {"trace", trace}};
    if (r.error) j["error"] = *r.error;
    return j.dump();
}

ChainResult result_from_json(std::string_view line) {
    try {
        auto j = json::parse(line);
        ChainResult r;
        r.chain_id = j.at("chain").get<int>();
        r.record_id = j.at("record").get<std::string>();
        r.with_formalization = j.value("with_formalization", false);
        r.dict = dims_from_json(j.at("dict"));
        for (const auto& s : j.at("trace"))
            r.trace.push_back({find_mode(s.at("mode").get<std::string>()), dims_from_json(s.at("inputs")),
                               s.at("output").get<std::string>()});
        if (j.contains("error")) r.error = j["error"].get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed trace line: ") + e.what(), 0);
    }
}

std::string pair_to_json(const TrainingPair& p) {
    return json{{"input", p.input}, {"target", p.target}}.dump();
}

}  // namespace deepa2::chains
