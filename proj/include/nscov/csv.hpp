#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nscov {

/// Numeric CSV table: mandatory header row, comma separator, '.' decimal point.
struct CsvTable {
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // rows x columns

  [[nodiscard]] Eigen::Index rows() const noexcept { return values.rows(); }
  /// Column index by name; throws DataError naming the column when absent.
  [[nodiscard]] Eigen::Index column(std::string_view name) const;
  [[nodiscard]] bool has(std::string_view name) const;
};

/// Throws DataError naming the row and column of any malformed cell.
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);
[[nodiscard]] CsvTable parse_csv(std::string_view text, std::string_view source = "<memory>");

/// Writes with 17 significant digits so doubles round-trip exactly.
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Shortest formatting that round-trips (17 significant digits).
[[nodiscard]] std::string format_double(double value);

}  // namespace nscov
