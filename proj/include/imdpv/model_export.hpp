#pragma once

#include "imdpv/imdp.hpp"
#include "imdpv/verifier.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace imdpv {

struct ExportReport {
    Index states = 0;
    Index commands = 0;
    /// Probabilistic branches summed over all commands.
    Index branches = 0;
};

/**
 * Writes an interval-MDP model in PRISM syntax plus a property file. Each
 * abstract step is split in two: the estimate bin is drawn under the interval
 * distribution (e = -1 to e = k), then the adversary picks a successor tile.
 * The horizon in the property file is therefore doubled.
 */
ExportReport export_prism(const Imdp& imdp, const BoundedProperty& property,
                          const std::vector<Index>& initial_tiles,
                          const std::filesystem::path& model_path,
                          const std::filesystem::path& property_path);

/// Content of an exported model, recovered by parse_prism.
struct PrismModel {
    Index num_tiles = 0;
    Index num_estimate_bins = 0;
    Index initial_tile = 0;
    std::map<Index, IntervalRow> intervals;
    std::map<Index, SuccessorRow> successors;
    std::map<std::string, std::vector<Index>> labels;
};

/// Parses files written by export_prism (not general PRISM).
PrismModel parse_prism(const std::filesystem::path& model_path);

} // namespace imdpv
