#pragma once
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ancientflow/grid.hpp"

namespace af {

// Shortest exact decimal for CSV cells (17 significant digits round-trips).
std::string fmt_double(double x);

// Write via a temp file in the same directory followed by an atomic rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);

// CSV table with one header row; data rows in matrix order.
std::string csv_table(const std::vector<std::string>& header, const MatrixXd& data);

// Overlaid closed curves as an SVG document; each entry is an n x 2 matrix of
// boundary points. Deterministic output (fixed precision, no timestamps).
std::string svg_curves(const std::vector<MatrixXd>& curves,
                       const std::vector<std::string>& colors, double size = 480.0);

}  // namespace af
