#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "isingg/rng.hpp"

namespace isingg::cli {

/// 17 significant digits, independent of locale.
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row_strings(header); }

  template <typename... Cells>
  void row(const Cells&... cells) {
    std::vector<std::string> r{cell(cells)...};
    if (r.size() != columns_) throw std::logic_error("CsvWriter: wrong number of cells");
    row_strings(r);
  }

  const std::string& str() const { return text_; }

 private:
  static std::string cell(double v) { return fmt17(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <typename I>
    requires std::is_integral_v<I>
  static std::string cell(I v) { return std::to_string(v); }

  void row_strings(const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) text_ += ',';
      text_ += r[i];
    }
    text_ += '\n';
  }

  std::size_t columns_;
  std::string text_;
};

/// Collects files for one run; everything is written at the end by a single writer.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }
  void add_json(const std::string& name, const nlohmann::json& j) { add(name, j.dump(2) + "\n"); }

  const std::filesystem::path& dir() const { return dir_; }

  // Writes all files and returns [{name, bytes, fnv1a}] in insertion order.
  nlohmann::json write() const {
    std::filesystem::create_directories(dir_);
    nlohmann::json listing = nlohmann::json::array();
    for (const auto& [name, content] : files_) {
      std::ofstream out(dir_ / name, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
      out << content;
      char hash[20];
      std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(content)));
      listing.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a", hash}});
    }
    return listing;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

/// Minimal SVG polyline chart; y values that are not finite are skipped.
inline std::string svg_polyline(const std::string& title, const std::string& x_label, const std::string& y_label,
                                const std::vector<double>& xs, const std::vector<double>& ys) {
  constexpr double w = 480, h = 320, pad = 48;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool any = false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    if (!any) {
      x0 = x1 = xs[i];
      y0 = y1 = ys[i];
      any = true;
    }
    x0 = std::min(x0, xs[i]);
    x1 = std::max(x1, xs[i]);
    y0 = std::min(y0, ys[i]);
    y1 = std::max(y1, ys[i]);
  }
  y0 = std::min(y0, 0.0);
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (w - 2 * pad); };
  auto py = [&](double y) { return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  os << "<text x=\"12\" y=\"" << h / 2 << "\" transform=\"rotate(-90 12 " << h / 2 << ")\" text-anchor=\"middle\">"
     << y_label << "</text>\n";
  os << "<text x=\"" << pad - 4 << "\" y=\"" << py(y1) << "\" text-anchor=\"end\">" << fmt17(y1) << "</text>\n";
  os << "<text x=\"" << pad - 4 << "\" y=\"" << py(y0) << "\" text-anchor=\"end\">" << fmt17(y0) << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
  bool first = true;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    if (!first) os << ' ';
    os << fmt17(px(xs[i])) << ',' << fmt17(py(ys[i]));
    first = false;
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

}  // namespace isingg::cli
