#pragma once

#include "deepa2/core.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deepa2 {

// A generative mode: a text-to-text task from some dimensions to another.
struct ModeSpec {
    std::vector<Dim> inputs;
    Dim output = Dim::A;
    // Sampling weight for AAAC-style training data.
    double weight_aaac = 1.0;
    // Sampling weight for EntailmentBank-style data; absent for modes that need
    // formalizations.
    std::optional<double> weight_eb;

    friend bool operator==(const ModeSpec&, const ModeSpec&) = default;
};

// "S R ~> A".
std::string mode_name(const ModeSpec& m);

// Every mode of the registry, in table order.
const std::vector<ModeSpec>& mode_registry();

// Looks a mode up by its name ("S R ~> A", "SR~>A" and the Unicode arrow are
// all accepted). Throws Error when no registered mode matches.
const ModeSpec& find_mode(std::string_view name);

enum class WeightColumn { Aaac, EntailmentBank };
std::optional<double> mode_weight(const ModeSpec& m, WeightColumn column);

struct ChainSpec {
    int id = 0;
    std::vector<ModeSpec> modes;
    std::optional<std::string> name;
};

// Chains 1 to 16, ordered by id.
const std::vector<ChainSpec>& chain_catalog();

// A P C F O K formalization steps appended for evaluation runs.
const ChainSpec& formalization_subchain();

// By id ("9") or by name ("hermeneutic cycle", "hermeneutic-cycle"). Throws Error.
const ChainSpec& find_chain(std::string_view id_or_name);
const ChainSpec& find_chain(int id);

// Number of non-source input dimensions summed over the chain's modes.
int sophistication(const ChainSpec& chain);

// Throws InvariantError unless every mode's inputs are the source or produced
// by an earlier mode. `available` lists the dimensions present before the first
// mode.
void validate_chain(const ChainSpec& chain, const std::vector<Dim>& available = {Dim::S});

}  // namespace deepa2
