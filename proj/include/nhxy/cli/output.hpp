#pragma once

// Tabular results and their CSV / JSON serializations. Numbers are written in
// shortest round-trip form, independent of locale.

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace nhxy::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::json summary = nlohmann::json::object();
};

std::string format_double(double v);
std::string to_csv(const Table& t);
nlohmann::json to_json(const Table& t);

// Writes to `path` via a temporary file in the same directory and rename.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace nhxy::cli
