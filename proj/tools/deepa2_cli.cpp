// deepa2: generate corpora, run generative chains, evaluate traces, export
// training pairs and import entailment-tree and RuleTaker data.
//
// Exit codes: 0 success, 1 unexpected failure, 2 configuration or usage error,
// 3 model backend unavailable, 4 invalid input data.

#include "deepa2/chains.hpp"
#include "deepa2/errors.hpp"
#include "deepa2/generator.hpp"
#include "deepa2/importers.hpp"
#include "deepa2/metrics.hpp"
#include "deepa2/model.hpp"
#include "deepa2/modes.hpp"
#include "deepa2/text.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

using namespace deepa2;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUnexpected = 1, kConfig = 2, kBackend = 3, kValidation = 4 };

struct ConfigError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes to a temporary file next to `path`, then renames it into place.
void write_atomically(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw ConfigError("write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, target);
}

std::vector<DeepA2Record> load_corpus(const std::string& path) {
    std::istringstream in(read_file(path));
    try {
        return read_corpus(in);
    } catch (const ParseError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

std::vector<int> parse_chain_ids(const std::string& spec) {
    std::vector<int> ids;
    if (text::trim(spec) == "all") {
        for (const auto& c : chain_catalog()) ids.push_back(c.id);
        return ids;
    }
    for (const auto& part : text::split(spec, ',')) {
        const std::string t = text::trim(part);
        if (t.empty()) continue;
        try {
            ids.push_back(find_chain(t).id);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
    if (ids.empty()) throw ConfigError("no chains selected");
    return ids;
}

std::string format_census(const std::map<Subset, std::size_t>& census, std::size_t total) {
    std::ostringstream out;
    out << "subset\tcount\tshare\n";
    for (const auto& [s, n] : census)
        out << subset_name(s) << '\t' << n << '\t' << std::fixed << std::setprecision(3)
            << (total ? static_cast<double>(n) / static_cast<double>(total) : 0.0) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string config, preset = "AAAC01", out;
    std::size_t n = 100;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
};

int cmd_generate(const GenerateArgs& a) {
    generator::GeneratorConfig config;
    try {
        config = a.config.empty() ? generator::GeneratorConfig::preset(a.preset)
                                  : generator::GeneratorConfig::from_json(read_file(a.config));
        if (a.seed) config.seed = *a.seed;
        config.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (a.n == 0) std::cerr << "warning: n is 0; writing an empty corpus\n";
    const auto corpus = generator::generate_corpus(config, a.n, a.jobs);
    std::ostringstream lines;
    write_corpus(lines, corpus);
    write_atomically(a.out, lines.str());
    const std::string census = format_census(generator::subset_census(corpus), corpus.size());
    write_atomically(a.out + ".census.tsv", census);
    std::cout << "wrote " << corpus.size() << " records to " << a.out << "\n" << census;
    return kOk;
}

// ---------------------------------------------------------------------------

struct RunArgs {
    std::string manifest, corpus, chains = "1", backend = "oracle", out;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool no_formalization = false;
};

void apply_manifest(RunArgs& a) {
    if (a.manifest.empty()) return;
    try {
        const auto j = json::parse(read_file(a.manifest));
        if (j.contains("corpus")) a.corpus = j["corpus"].get<std::string>();
        if (j.contains("chains")) {
            std::vector<std::string> ids;
            for (const auto& c : j["chains"]) ids.push_back(c.is_number() ? std::to_string(c.get<int>()) : c.get<std::string>());
            a.chains = text::join(ids, ",");
        }
        if (j.contains("backend")) a.backend = j["backend"].get<std::string>();
        if (j.contains("seed")) a.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("out")) a.out = j["out"].get<std::string>();
        if (j.contains("with_formalization")) a.no_formalization = !j["with_formalization"].get<bool>();
        if (j.contains("jobs")) a.jobs = j["jobs"].get<int>();
    } catch (const json::exception& e) {
        throw ConfigError("bad manifest " + a.manifest + ": " + e.what());
    }
    if (a.corpus.empty() || a.out.empty()) throw ConfigError("the manifest needs \"corpus\" and \"out\"");
}

int cmd_run(RunArgs a) {
    apply_manifest(a);
    if (a.corpus.empty() || a.out.empty()) throw ConfigError("run needs --corpus and --out (or a manifest)");
    chains::RunOptions options;
    options.chain_ids = parse_chain_ids(a.chains);
    options.with_formalization = !a.no_formalization;
    options.jobs = a.jobs;
    const auto corpus = load_corpus(a.corpus);
    std::unique_ptr<model::ModelBackend> backend;
    try {
        backend = model::make_backend(a.backend, corpus, a.seed);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    std::vector<chains::ChainResult> results;
    try {
        results = chains::run_corpus(corpus, *backend, options);
    } catch (const MissingDimensionError& e) {
        throw ValidationError(e.what());
    }
    std::string lines;
    std::size_t failed = 0;
    for (const auto& r : results) {
        lines += chains::result_to_json(r) + "\n";
        failed += !r.complete();
    }
    write_atomically(a.out, lines);
    std::cout << "wrote " << results.size() << " traces to " << a.out << "\n";
    if (failed) {
        for (const auto& r : results)
            if (r.error) {
                std::cerr << "error: " << failed << " of " << results.size()
                          << " traces stopped early; first failure: " << *r.error << "\n";
                break;
            }
        return kBackend;
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string traces, corpus, out, table;
};

std::string format_table(const std::vector<std::pair<std::string, std::map<std::string, double>>>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "row";
    for (auto m : metrics::kMetricNames) out << std::right << std::setw(9) << m;
    out << '\n';
    for (const auto& [name, values] : rows) {
        out << std::left << std::setw(10) << name;
        for (auto m : metrics::kMetricNames)
            out << std::right << std::setw(9) << std::fixed << std::setprecision(3) << values.at(std::string(m));
        out << '\n';
    }
    return out.str();
}

int cmd_eval(const EvalArgs& a) {
    const auto corpus = load_corpus(a.corpus);
    std::map<std::string, const DeepA2Record*> targets;
    for (const auto& r : corpus) targets[r.meta.id] = &r;

    std::vector<chains::ChainResult> results;
    {
        std::istringstream in(read_file(a.traces));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (text::trim(line).empty()) continue;
            try {
                results.push_back(chains::result_from_json(line));
            } catch (const Error& e) {
                throw ValidationError(a.traces + " line " + std::to_string(lineno) + ": " + e.what());
            }
        }
    }
    if (results.empty()) throw ValidationError(a.traces + " contains no traces");

    std::vector<metrics::MetricReport> reports;
    reports.reserve(results.size());
    std::string lines;
    for (const auto& r : results) {
        auto it = targets.find(r.record_id);
        if (it == targets.end())
            throw ValidationError("trace for record '" + r.record_id + "' has no counterpart in " + a.corpus);
        reports.push_back(chains::evaluate_result(r, *it->second));
        auto j = json::parse(metrics::report_to_json(reports.back()));
        j["record"] = r.record_id;
        j["chain"] = r.chain_id;
        lines += j.dump() + "\n";
    }

    std::map<int, std::vector<metrics::MetricReport>> by_chain;
    std::map<std::string, std::vector<chains::Scored>> by_record;
    std::vector<std::string> record_order;
    for (std::size_t i = 0; i < results.size(); ++i) {
        by_chain[results[i].chain_id].push_back(reports[i]);
        auto& slot = by_record[results[i].record_id];
        if (slot.empty()) record_order.push_back(results[i].record_id);
        slot.push_back({&results[i], &reports[i]});
    }
    std::vector<std::pair<std::string, std::map<std::string, double>>> rows;
    for (const auto& [id, rs] : by_chain) rows.emplace_back("#" + std::to_string(id), metrics::aggregate(rs));
    std::vector<metrics::MetricReport> pooled, oracle;
    for (const auto& id : record_order) {
        const auto& candidates = by_record.at(id);
        pooled.push_back(*candidates[chains::pool_index(candidates)].report);
        oracle.push_back(metrics::evaluate_record(*targets.at(id), *targets.at(id)));
    }
    rows.emplace_back("pooling", metrics::aggregate(pooled));
    rows.emplace_back("oracle", metrics::aggregate(oracle));
    const std::string table = format_table(rows);

    if (!a.out.empty()) write_atomically(a.out, lines);
    if (!a.table.empty()) {
        std::string tsv = "row";
        for (auto m : metrics::kMetricNames) tsv += "\t" + std::string(m);
        tsv += "\n";
        for (const auto& [name, values] : rows) {
            tsv += name;
            for (auto m : metrics::kMetricNames) {
                std::ostringstream v;
                v << std::setprecision(6) << values.at(std::string(m));
                tsv += "\t" + v.str();
            }
            tsv += "\n";
        }
        write_atomically(a.table, tsv);
    }
    std::cout << table;
    return kOk;
}

// ---------------------------------------------------------------------------

struct ExportArgs {
    std::string corpus, weights = "aaac", out;
    int n = 14;
    std::uint64_t seed = 0;
};

int cmd_export(const ExportArgs& a) {
    WeightColumn column;
    const std::string w = text::trim(a.weights);
    if (w == "aaac" || w == "w1")
        column = WeightColumn::Aaac;
    else if (w == "eb" || w == "entailmentbank" || w == "w2")
        column = WeightColumn::EntailmentBank;
    else
        throw ConfigError("unknown weight column '" + a.weights + "' (aaac or eb)");
    const auto corpus = load_corpus(a.corpus);
    std::vector<chains::TrainingPair> pairs;
    try {
        pairs = chains::export_training(corpus, column, a.n, a.seed);
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
    std::string lines;
    for (const auto& p : pairs) lines += chains::pair_to_json(p) + "\n";
    write_atomically(a.out, lines);
    std::cout << "wrote " << pairs.size() << " training pairs to " << a.out << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct ImportArgs {
    std::string format, in, out;
};

int cmd_import(const ImportArgs& a) {
    std::istringstream in(read_file(a.in));
    std::vector<DeepA2Record> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            if (a.format == "entailmentbank")
                records.push_back(importers::import_entailmentbank(importers::parse_entailment_record(line)));
            else
                records.push_back(importers::import_ruletaker(importers::parse_ruletaker_record(line)));
        } catch (const ImportError& e) {
            throw ValidationError(a.in + " line " + std::to_string(lineno) + ": " + e.what());
        }
        if (records.back().meta.id.empty()) records.back().meta.id = a.format + "-" + std::to_string(lineno);
    }
    std::ostringstream outs;
    write_corpus(outs, records);
    write_atomically(a.out, outs.str());
    std::cout << "imported " << records.size() << " records to " << a.out << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep argument analysis toolkit"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate a synthetic corpus");
    generate->add_option("--config", gen.config, "Generator config (JSON)");
    generate->add_option("--preset", gen.preset, "AAAC01 or AAAC02 when no config is given");
    generate->add_option("-n,--records", gen.n, "Number of records");
    generate->add_option("--seed", gen.seed, "Overrides the config seed");
    generate->add_option("--jobs", gen.jobs, "Worker threads")->check(CLI::PositiveNumber);
    generate->add_option("--out", gen.out, "Corpus file (JSON lines)")->required();

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run generative chains over a corpus");
    run_cmd->add_option("--manifest", run.manifest, "Run manifest (JSON)");
    run_cmd->add_option("--corpus", run.corpus, "Corpus file");
    run_cmd->add_option("--chains", run.chains, "Chain ids or names, comma separated, or 'all'");
    run_cmd->add_option("--backend", run.backend, "oracle | noisy:<rate> | http[:<url>]");
    run_cmd->add_option("--seed", run.seed, "Seed for the noisy oracle");
    run_cmd->add_option("--jobs", run.jobs, "Worker threads")->check(CLI::PositiveNumber);
    run_cmd->add_option("--out", run.out, "Trace file (JSON lines)");
    run_cmd->add_flag("--no-formalization", run.no_formalization, "Skip the formalization sub-chain");

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Score traces against the corpus");
    eval->add_option("--traces", ev.traces, "Trace file")->required();
    eval->add_option("--corpus", ev.corpus, "Corpus file with the targets")->required();
    eval->add_option("--out", ev.out, "Per-trace metric reports (JSON lines)");
    eval->add_option("--table", ev.table, "Aggregate table (TSV)");

    ExportArgs ex;
    auto* exp = app.add_subcommand("export-training", "Export seq2seq training pairs");
    exp->add_option("--corpus", ex.corpus, "Corpus file")->required();
    exp->add_option("--weights", ex.weights, "aaac or eb");
    exp->add_option("-n,--per-record", ex.n, "Pairs per record");
    exp->add_option("--seed", ex.seed, "Sampling seed");
    exp->add_option("--out", ex.out, "Pair file (JSON lines)")->required();

    ImportArgs im;
    auto* imp = app.add_subcommand("import", "Import entailment-tree or RuleTaker records");
    imp->add_option("format", im.format, "entailmentbank or ruletaker")
        ->required()
        ->check(CLI::IsMember({"entailmentbank", "ruletaker"}));
    imp->add_option("--in", im.in, "Input file (JSON lines)")->required();
    imp->add_option("--out", im.out, "Corpus file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*generate) return cmd_generate(gen);
        if (*run_cmd) return cmd_run(run);
        if (*eval) return cmd_eval(ev);
        if (*exp) return cmd_export(ex);
        if (*imp) return cmd_import(im);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const BackendUnavailableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBackend;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUnexpected;
    }
    return kUnexpected;
}
