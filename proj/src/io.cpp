#include "policy_delta/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>
#include <string>

namespace policy_delta {

using nlohmann::json;

namespace {

[[noreturn]] void ParseFailure(const std::string& message) {
  throw Error(ErrorCode::kParseError, message);
}

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string FormatDouble(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

double ParseDouble(const std::string& text, const std::string& what) {
  const std::string trimmed = Trim(text);
  char* end = nullptr;
  const double value = std::strtod(trimmed.c_str(), &end);
  if (trimmed.empty() || end != trimmed.c_str() + trimmed.size()) {
    ParseFailure(what + ": '" + trimmed + "' is not a number");
  }
  return value;
}

long long ParseInteger(const std::string& text, const std::string& what) {
  const std::string trimmed = Trim(text);
  char* end = nullptr;
  const long long value = std::strtoll(trimmed.c_str(), &end, 10);
  if (trimmed.empty() || end != trimmed.c_str() + trimmed.size()) {
    ParseFailure(what + ": '" + trimmed + "' is not an integer");
  }
  return value;
}

std::vector<std::string> SplitOn(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

// --- typed lookups on JSON objects, with the key in every diagnostic ---

const json& Require(const json& obj, const std::string& key,
                    const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) ParseFailure(where + ": missing key '" + key + "'");
  return *it;
}

double AsDouble(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "Infinity") {
      return std::numeric_limits<double>::infinity();
    }
  }
  ParseFailure("key '" + key + "': expected a number, got " +
               std::string(v.type_name()));
}

long long AsInteger(const json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) {
      return static_cast<long long>(d);
    }
  }
  ParseFailure("key '" + key + "': expected an integer, got " + v.dump());
}

std::size_t AsCount(const json& v, const std::string& key) {
  const long long n = AsInteger(v, key);
  if (n < 0) ParseFailure("key '" + key + "': must be non-negative");
  return static_cast<std::size_t>(n);
}

std::vector<double> AsVector(const json& v, const std::string& key) {
  if (!v.is_array()) {
    ParseFailure("key '" + key + "': expected an array, got " +
                 std::string(v.type_name()));
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(AsDouble(e, key));
  return out;
}

std::vector<std::vector<double>> AsMatrix(const json& v,
                                          const std::string& key) {
  if (!v.is_array()) {
    ParseFailure("key '" + key + "': expected an array of arrays");
  }
  std::vector<std::vector<double>> out;
  for (const auto& row : v) out.push_back(AsVector(row, key));
  return out;
}

Framing AsFraming(const json& v, const std::string& key) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (s == "AB") return Framing::kAB;
    if (s == "OPE") return Framing::kOPE;
  }
  ParseFailure("key '" + key + "': expected \"AB\" or \"OPE\", got " + v.dump());
}

LoggedRecord RecordFromJson(const json& obj, std::size_t line) {
  const std::string where = "line " + std::to_string(line);
  if (!obj.is_object()) ParseFailure(where + ": expected a JSON object");
  LoggedRecord r;
  try {
    r.context_id = AsInteger(Require(obj, "context_id", "record"), "context_id");
    r.covariates = AsVector(Require(obj, "covariates", "record"), "covariates");
    r.action = static_cast<int>(
        AsInteger(Require(obj, "action", "record"), "action"));
    r.reward = AsDouble(Require(obj, "reward", "record"), "reward");
    r.logging_propensity =
        AsDouble(Require(obj, "propensity", "record"), "propensity");
    if (const auto it = obj.find("arm"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) ParseFailure("key 'arm': expected a string");
      r.arm = it->get<std::string>();
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParseError) throw;
    const std::string what = e.what();
    ParseFailure(where + ": " + what.substr(what.find(": ") + 2));
  }
  return r;
}

// Last `"key":` before `offset`; used to point at the offending key when the
// JSON text itself is malformed.
std::string KeyBefore(std::string_view text, std::size_t offset) {
  static const std::regex key_pattern(R"re("([^"\\]+)"\s*:)re");
  const std::string prefix(text.substr(0, std::min(offset, text.size())));
  std::string last;
  for (std::sregex_iterator it(prefix.begin(), prefix.end(), key_pattern), end;
       it != end; ++it) {
    last = (*it)[1].str();
  }
  return last;
}

json KeyValueToJson(std::string_view text) {
  json obj = json::object();
  std::istringstream stream{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      ParseFailure("line " + std::to_string(line_no) +
                   ": expected 'key = value'");
    }
    const std::string key = Trim(trimmed.substr(0, eq));
    const std::string value = Trim(trimmed.substr(eq + 1));
    if (key.empty()) {
      ParseFailure("line " + std::to_string(line_no) + ": empty key");
    }
    json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
    obj[key] = parsed.is_discarded() ? json(value) : parsed;
  }
  return obj;
}

SyntheticConfig ConfigFromJson(const json& obj) {
  if (!obj.is_object()) ParseFailure("config must be a JSON object");
  SyntheticConfig c;
  for (const auto& [key, v] : obj.items()) {
    if (key == "n") {
      c.n = AsCount(v, key);
    } else if (key == "seed") {
      c.seed = AsCount(v, key);
    } else if (key == "framing") {
      c.framing = AsFraming(v, key);
    } else if (key == "p") {
      c.p = AsDouble(v, key);
    } else if (key == "ate") {
      c.ate = AsDouble(v, key);
    } else if (key == "rho") {
      c.rho = AsDouble(v, key);
    } else if (key == "context_count") {
      c.context_count = static_cast<int>(AsInteger(v, key));
    } else if (key == "action_count") {
      c.action_count = static_cast<int>(AsInteger(v, key));
    } else if (key == "logging_temperature") {
      c.logging_temperature = AsDouble(v, key);
    } else if (key == "reward_table") {
      c.reward_table = AsMatrix(v, key);
    } else if (key == "logging_table") {
      c.logging_table = AsMatrix(v, key);
    } else if (key == "resolution") {
      c.resolution = static_cast<int>(AsInteger(v, key));
    } else if (key == "noise_sd") {
      c.noise_sd = AsDouble(v, key);
    } else {
      ParseFailure("unknown config key '" + key + "'");
    }
  }
  return c;
}

}  // namespace

DataFormat FormatForPath(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".csv" ? DataFormat::kCsv : DataFormat::kJsonLines;
}

std::vector<LoggedRecord> ParseRecordsJsonLines(std::istream& in) {
  std::vector<LoggedRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) {
      ParseFailure("line " + std::to_string(line_no) + ": malformed JSON");
    }
    records.push_back(RecordFromJson(obj, line_no));
  }
  return records;
}

std::vector<LoggedRecord> ParseRecordsCsv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) return {};
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const auto columns = SplitOn(header, ',');
  const auto column = [&](const std::string& name, bool required) -> int {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (Trim(columns[i]) == name) return static_cast<int>(i);
    }
    if (required) ParseFailure("csv header: missing column '" + name + "'");
    return -1;
  };
  const int c_context = column("context_id", true);
  const int c_covariates = column("covariates", true);
  const int c_action = column("action", true);
  const int c_reward = column("reward", true);
  const int c_propensity = column("propensity", true);
  const int c_arm = column("arm", false);

  std::vector<LoggedRecord> records;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    const auto fields = SplitOn(line, ',');
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != columns.size()) {
      ParseFailure(where + ": expected " + std::to_string(columns.size()) +
                   " fields, got " + std::to_string(fields.size()));
    }
    const auto at = [&](int c) { return fields[static_cast<std::size_t>(c)]; };
    LoggedRecord r;
    r.context_id = ParseInteger(at(c_context), where + " context_id");
    for (const auto& item : SplitOn(at(c_covariates), ';')) {
      if (!Trim(item).empty()) {
        r.covariates.push_back(ParseDouble(item, where + " covariates"));
      }
    }
    r.action = static_cast<int>(ParseInteger(at(c_action), where + " action"));
    r.reward = ParseDouble(at(c_reward), where + " reward");
    r.logging_propensity = ParseDouble(at(c_propensity), where + " propensity");
    if (c_arm >= 0 && !Trim(at(c_arm)).empty()) r.arm = Trim(at(c_arm));
    records.push_back(std::move(r));
  }
  return records;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<LoggedRecord> ReadRecords(const std::filesystem::path& path) {
  std::istringstream in(ReadTextFile(path));
  return FormatForPath(path) == DataFormat::kCsv ? ParseRecordsCsv(in)
                                                 : ParseRecordsJsonLines(in);
}

void WriteRecordsJsonLines(std::ostream& out, const Dataset& data) {
  for (const auto& r : data.records()) {
    json obj = {{"context_id", r.context_id},
                {"covariates", r.covariates},
                {"action", r.action},
                {"reward", r.reward},
                {"propensity", r.logging_propensity}};
    if (r.arm) obj["arm"] = *r.arm;
    out << obj.dump() << '\n';
  }
}

void WriteRecordsCsv(std::ostream& out, const Dataset& data) {
  const bool with_arm = data.framing() == Framing::kAB;
  out << "context_id,covariates,action,reward,propensity"
      << (with_arm ? ",arm" : "") << '\n';
  for (const auto& r : data.records()) {
    out << r.context_id << ',';
    for (std::size_t k = 0; k < r.covariates.size(); ++k) {
      if (k > 0) out << ';';
      out << FormatDouble(r.covariates[k]);
    }
    out << ',' << r.action << ',' << FormatDouble(r.reward) << ','
        << FormatDouble(r.logging_propensity);
    if (with_arm) {
      const std::string arm = r.arm.value_or("");
      if (arm.find(',') != std::string::npos) {
        throw Error(ErrorCode::kIoError, "arm labels cannot contain ','");
      }
      out << ',' << arm;
    }
    out << '\n';
  }
}

void WriteDataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  }
  if (FormatForPath(path) == DataFormat::kCsv) {
    WriteRecordsCsv(out, data);
  } else {
    WriteRecordsJsonLines(out, data);
  }
  if (!out) {
    throw Error(ErrorCode::kIoError, "write to '" + path.string() + "' failed");
  }
}

SyntheticConfig ParseConfig(std::string_view text) {
  const std::string trimmed = Trim(text);
  json doc;
  if (!trimmed.empty() && trimmed.front() == '{') {
    try {
      doc = json::parse(trimmed);
    } catch (const json::parse_error& e) {
      const std::string key = KeyBefore(trimmed, e.byte);
      ParseFailure(key.empty()
                       ? std::string("malformed config: ") + e.what()
                       : "malformed config near key '" + key + "': " + e.what());
    }
  } else {
    doc = KeyValueToJson(text);
  }
  return ConfigFromJson(doc);
}

SyntheticConfig ReadConfig(const std::filesystem::path& path) {
  return ParseConfig(ReadTextFile(path));
}

json ConfigToJson(const SyntheticConfig& c) {
  json obj = {{"n", c.n},
              {"seed", c.seed},
              {"framing", std::string(FramingName(c.framing))},
              {"noise_sd", c.noise_sd}};
  if (c.framing == Framing::kAB) {
    obj["p"] = c.p;
    obj["ate"] = c.ate;
    obj["rho"] = c.rho;
    return obj;
  }
  obj["context_count"] = c.context_count;
  obj["action_count"] = c.action_count;
  obj["logging_temperature"] = std::isinf(c.logging_temperature)
                                   ? json("inf")
                                   : json(c.logging_temperature);
  obj["reward_table"] = c.reward_table;
  if (c.logging_table) obj["logging_table"] = *c.logging_table;
  if (c.resolution) obj["resolution"] = *c.resolution;
  return obj;
}

PolicyTable ParsePolicy(const json& doc) {
  if (doc.is_array()) return PolicyTable(AsMatrix(doc, "probabilities"));
  if (!doc.is_object()) ParseFailure("policy must be a JSON object or matrix");
  auto rows = AsMatrix(Require(doc, "probabilities", "policy"), "probabilities");
  const bool broadcast = doc.value("broadcast", false);
  if (broadcast) {
    if (rows.size() != 1) {
      ParseFailure("key 'broadcast': needs exactly one probability row");
    }
    return PolicyTable::Broadcast(std::move(rows.front()));
  }
  return PolicyTable(std::move(rows));
}

PolicyTable ReadPolicy(const std::filesystem::path& path) {
  const json doc = json::parse(ReadTextFile(path), nullptr, false);
  if (doc.is_discarded()) ParseFailure("'" + path.string() + "': malformed JSON");
  return ParsePolicy(doc);
}

RewardModel ParseRewardModel(const json& doc) {
  if (!doc.is_object()) ParseFailure("reward model must be a JSON object");
  const json& kind_node = Require(doc, "kind", "reward model");
  if (!kind_node.is_string()) ParseFailure("key 'kind': expected a string");
  const std::string kind = kind_node.get<std::string>();
  if (kind == "constant") {
    return RewardModel::Constant(AsDouble(Require(doc, "value", kind), "value"));
  }
  if (kind == "linear") {
    const double intercept =
        doc.contains("intercept") ? AsDouble(doc["intercept"], "intercept") : 0.0;
    return RewardModel::Linear(
        intercept, AsVector(Require(doc, "coefficients", kind), "coefficients"));
  }
  if (kind == "per_record") {
    return RewardModel::PerRecord(AsVector(Require(doc, "values", kind), "values"));
  }
  if (kind == "context_table") {
    return RewardModel::ContextTable(
        AsVector(Require(doc, "values", kind), "values"));
  }
  if (kind == "action_table") {
    return RewardModel::ActionTable(
        AsMatrix(Require(doc, "values", kind), "values"));
  }
  ParseFailure("key 'kind': unknown reward model kind '" + kind + "'");
}

RewardModel ReadRewardModel(const std::filesystem::path& path) {
  const json doc = json::parse(ReadTextFile(path), nullptr, false);
  if (doc.is_discarded()) ParseFailure("'" + path.string() + "': malformed JSON");
  return ParseRewardModel(doc);
}

}  // namespace policy_delta
