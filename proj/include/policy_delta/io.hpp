#ifndef POLICY_DELTA_IO_HPP
#define POLICY_DELTA_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "policy_delta/core_data.hpp"
#include "policy_delta/synthgen.hpp"

namespace policy_delta {

// Logged data files hold one record per line, either as a JSON object
//   {"context_id": 3, "covariates": [0.1, 2.0], "action": 1,
//    "reward": 0.5, "propensity": 0.25, "arm": "T"}
// or as CSV with the same column names, covariates joined by ';'.
// "arm" is optional in both.
enum class DataFormat { kJsonLines, kCsv };

// .csv selects CSV; anything else is JSON lines.
DataFormat FormatForPath(const std::filesystem::path& path);

// Throw kParseError with the offending line number.
std::vector<LoggedRecord> ParseRecordsJsonLines(std::istream& in);
std::vector<LoggedRecord> ParseRecordsCsv(std::istream& in);

// Throws kIoError when the file cannot be opened.
std::vector<LoggedRecord> ReadRecords(const std::filesystem::path& path);

void WriteRecordsJsonLines(std::ostream& out, const Dataset& data);
void WriteRecordsCsv(std::ostream& out, const Dataset& data);
void WriteDataset(const std::filesystem::path& path, const Dataset& data);

// Generator configs are JSON objects or `key = value` lines ('#' starts a
// comment; values are JSON literals, bare words are strings). Parse errors
// (kParseError) name the offending key where one can be identified.
SyntheticConfig ParseConfig(std::string_view text);
SyntheticConfig ReadConfig(const std::filesystem::path& path);
nlohmann::json ConfigToJson(const SyntheticConfig& config);

// {"probabilities": [[...], ...]} with an optional "broadcast": true, or a
// bare matrix.
PolicyTable ParsePolicy(const nlohmann::json& doc);
PolicyTable ReadPolicy(const std::filesystem::path& path);

// {"kind": "constant", "value": c}
// {"kind": "linear", "intercept": b, "coefficients": [...]}
// {"kind": "per_record", "values": [...]}          (by record position)
// {"kind": "context_table", "values": [...]}       (by context id)
// {"kind": "action_table", "values": [[...], ...]} (action-aware)
RewardModel ParseRewardModel(const nlohmann::json& doc);
RewardModel ReadRewardModel(const std::filesystem::path& path);

// Reads a whole file into a string. Throws kIoError.
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace policy_delta

#endif  // POLICY_DELTA_IO_HPP
