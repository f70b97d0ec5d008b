#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hjm/scenario.hpp"

namespace hjm {

/// Hex SHA-1 of "blob <size>\0<content>", as git hash-object computes it.
std::string git_blob_sha1(const std::string& content);

std::string curves_csv(const SolutionEnsemble& ensemble, const WeightGrid& grid, std::size_t max_paths);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string checks_csv(const std::vector<CheckReport>& checks);
std::string manifest_json(const Scenario& scenario, const std::string& command,
                          const std::vector<std::pair<std::string, std::string>>& files);

/// Writes curves.csv, summary.csv, checks.csv and manifest.json into out_dir.
/// Byte-identical for identical inputs.
void emit_report(const Scenario& scenario, const RunResult& result, const std::filesystem::path& out_dir,
                 const std::string& command);

}  // namespace hjm
