// CSV, JSON and sidecar metadata writers. Data files carry no timestamps so
// identical runs give byte-identical output.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace mechsim::cli {

using nlohmann::json;

/// Column-major CSV table; every value printed with 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<double>& row);
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }

  std::string str() const;
  void write(const std::filesystem::path& file) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

std::string format_number(double v);

void write_json(const std::filesystem::path& file, const json& doc);

/// Writes `<file>.meta.json` next to a data file.
void write_sidecar(const std::filesystem::path& data_file, const json& meta);

}  // namespace mechsim::cli
