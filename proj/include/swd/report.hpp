#pragma once

// Output plumbing: run manifests, CSV documents, and minimal hand-rolled SVG
// plots. All emitters produce byte-deterministic text for a given input.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "swd/common.hpp"

namespace swd {

// Identifies a run; rerunning with the same manifest regenerates identical
// outputs for any worker thread count.
struct Manifest {
  std::string subcommand;
  std::uint64_t seed = 0;
  std::string config_hash;

  std::string to_json() const {
    return std::string("{\"config_hash\":\"") + config_hash +
           "\",\"seed\":" + std::to_string(seed) + ",\"subcommand\":\"" + subcommand +
           "\",\"tool\":\"swdist\",\"version\":\"" + kVersion + "\"}";
  }

  std::string comment_line() const { return "# manifest " + to_json(); }
};

inline std::string config_hash_hex(const std::string& canonical_config) {
  const std::uint64_t h = fnv1a64(canonical_config);
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 0; i < 16; ++i) out[15 - i] = digits[(h >> (4 * i)) & 0xF];
  return out;
}

// CSV with a manifest comment line, a header row, '.' decimals, no locale.
class CsvDocument {
 public:
  CsvDocument(const Manifest& manifest, const std::string& header) {
    body_ = manifest.comment_line() + "\n" + header + "\n";
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) body_ += ',';
      body_ += cells[i];
    }
    body_ += '\n';
  }

  void numeric_row(const std::vector<double>& cells) {
    std::vector<std::string> text;
    text.reserve(cells.size());
    for (double v : cells) text.push_back(format_double(v));
    row(text);
  }

  const std::string& text() const { return body_; }

 private:
  std::string body_;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// -----------------------------------------------------------------------------
// Minimal static SVG plots: enough for log-log rate lines with error bars,
// scatter clouds, and density curves.

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
  std::vector<double> yerr;  // optional, same length as y
  bool points_only = false;
};

class SvgPlot {
 public:
  SvgPlot(std::string title, bool log_x, bool log_y)
      : title_(std::move(title)), log_x_(log_x), log_y_(log_y) {}

  void add(SvgSeries series) { series_.push_back(std::move(series)); }

  std::string render(const Manifest& manifest) const {
    constexpr double W = 640, H = 480, L = 70, R = 20, T = 40, B = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series_)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double x = tx(s.x[i]);
        double lo = s.y[i], hi = s.y[i];
        if (!s.yerr.empty()) {
          lo -= s.yerr[i];
          hi += s.yerr[i];
        }
        if (log_y_) lo = std::max(lo, 1e-300);
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, ty(lo));
        ymax = std::max(ymax, ty(hi));
      }
    if (xmin > xmax) {
      xmin = 0;
      xmax = 1;
    }
    if (ymin > ymax) {
      ymin = 0;
      ymax = 1;
    }
    if (xmax - xmin < 1e-12) {
      xmin -= 0.5;
      xmax += 0.5;
    }
    if (ymax - ymin < 1e-12) {
      ymin -= 0.5;
      ymax += 0.5;
    }
    auto px = [&](double x) {
      return L + (W - L - R) * (tx(x) - xmin) / (xmax - xmin);
    };
    auto py = [&](double yv) {
      double y = ty(log_y_ ? std::max(yv, 1e-300) : yv);
      return H - B - (H - T - B) * (y - ymin) / (ymax - ymin);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
           "viewBox=\"0 0 640 480\">\n";
    svg += "<!-- manifest " + manifest.to_json() + " -->\n";
    svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + title_ +
           "</text>\n";
    svg += axis_line(L, H - B, W - R, H - B) + axis_line(L, T, L, H - B);

    // Ticks on both axes in data units.
    for (int k = 0; k <= 4; ++k) {
      const double fx = xmin + (xmax - xmin) * k / 4.0;
      const double fy = ymin + (ymax - ymin) * k / 4.0;
      const double gx = L + (W - L - R) * k / 4.0;
      const double gy = H - B - (H - T - B) * k / 4.0;
      svg += "<text x=\"" + fixed(gx) + "\" y=\"" + fixed(H - B + 18) +
             "\" text-anchor=\"middle\" font-size=\"11\">" + tick_label(fx, log_x_) +
             "</text>\n";
      svg += "<text x=\"" + fixed(L - 8) + "\" y=\"" + fixed(gy + 4) +
             "\" text-anchor=\"end\" font-size=\"11\">" + tick_label(fy, log_y_) +
             "</text>\n";
    }

    static const char* palette[] = {"#1b6ca8", "#d1495b", "#3a7d44",
                                    "#8d5a97", "#c77d2e", "#37484f"};
    for (std::size_t si = 0; si < series_.size(); ++si) {
      const auto& s = series_[si];
      const char* color = palette[si % 6];
      if (!s.points_only && s.x.size() > 1) {
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          if (i) svg += ' ';
          svg += fixed(px(s.x[i])) + "," + fixed(py(s.y[i]));
        }
        svg += "\"/>\n";
      }
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!s.yerr.empty()) {
          svg += "<line x1=\"" + fixed(px(s.x[i])) + "\" y1=\"" +
                 fixed(py(s.y[i] - s.yerr[i])) + "\" x2=\"" + fixed(px(s.x[i])) +
                 "\" y2=\"" + fixed(py(s.y[i] + s.yerr[i])) + "\" stroke=\"" + color +
                 "\" stroke-width=\"1\"/>\n";
        }
        svg += "<circle cx=\"" + fixed(px(s.x[i])) + "\" cy=\"" + fixed(py(s.y[i])) +
               "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
      }
      svg += "<text x=\"" + fixed(W - R - 8) + "\" y=\"" +
             fixed(T + 16.0 * static_cast<double>(si + 1)) +
             "\" text-anchor=\"end\" font-size=\"12\" fill=\"" + color + "\">" + s.label +
             "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
  }

 private:
  double tx(double v) const { return log_x_ ? std::log10(std::max(v, 1e-300)) : v; }
  double ty(double v) const { return log_y_ ? std::log10(std::max(v, 1e-300)) : v; }

  static std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
  }

  static std::string tick_label(double v, bool log_axis) {
    char buf[32];
    if (log_axis)
      std::snprintf(buf, sizeof(buf), "%.3g", std::pow(10.0, v));
    else
      std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
  }

  static std::string axis_line(double x1, double y1, double x2, double y2) {
    return "<line x1=\"" + fixed(x1) + "\" y1=\"" + fixed(y1) + "\" x2=\"" + fixed(x2) +
           "\" y2=\"" + fixed(y2) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  }

  std::string title_;
  bool log_x_, log_y_;
  std::vector<SvgSeries> series_;
};

}  // namespace swd
