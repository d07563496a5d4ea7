#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace floqmem {

std::string version();

// Scientific notation with 12 significant digits, independent of the locale.
std::string format_number(double v);

// CSV table with the resolved configuration and version as leading comments.
class CsvTable {
 public:
  CsvTable(std::vector<std::string> columns, const nlohmann::json& config);

  CsvTable& row();
  CsvTable& add(double v);
  CsvTable& add(long long v);
  CsvTable& add(const std::string& v);

  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::string config_;
  std::vector<std::vector<std::string>> rows_;
};

struct CsvData {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

CsvData read_csv(const std::filesystem::path& path);

// JSON document stamped with the version and resolved configuration.
void write_json(const std::filesystem::path& path, nlohmann::json body, const nlohmann::json& config);

}  // namespace floqmem
