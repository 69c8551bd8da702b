#include "ancientflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace af {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.good()) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

std::string csv_table(const std::vector<std::string>& header, const MatrixXd& data) {
  if (static_cast<Eigen::Index>(header.size()) != data.cols())
    throw std::invalid_argument("csv_table: header width does not match data");
  std::string out;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      if (c) out += ',';
      out += fmt_double(data(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string svg_curves(const std::vector<MatrixXd>& curves, const std::vector<std::string>& colors,
                       double size) {
  double lo = -1.0, hi = 1.0;
  for (const auto& c : curves) {
    if (c.size() == 0) continue;
    lo = std::min(lo, c.minCoeff());
    hi = std::max(hi, c.maxCoeff());
  }
  double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  double scale = size / (hi - lo);
  auto px = [&](double x) { return (x - lo) * scale; };
  auto py = [&](double y) { return (hi - y) * scale; };

  char buf[96];
  std::string svg;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n", size,
                size);
  svg += buf;
  for (size_t k = 0; k < curves.size(); ++k) {
    const MatrixXd& c = curves[k];
    if (c.rows() == 0) continue;
    const std::string& color = colors.empty() ? "black" : colors[k % colors.size()];
    svg += "<polygon fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1\" points=\"";
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.6f,%.6f", i ? " " : "", px(c(i, 0)), py(c(i, 1)));
      svg += buf;
    }
    svg += "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace af
