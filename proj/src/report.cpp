#include "gendervec/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "gendervec/errors.hpp"
#include "json.hpp"

namespace gendervec {

namespace fs = std::filesystem;

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("CSV column '" + name + "' not found");
  return static_cast<std::size_t>(it - header.begin());
}

namespace {

std::vector<std::string> split_csv_line(std::istream& in, bool& ok) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  ok = any;
  if (any) fields.push_back(std::move(field));
  return fields;
}

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream o;
  o << std::setprecision(4) << v;
  return o.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    const double pad = 0.04 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

// Plot frame with linear axes.
class Canvas {
 public:
  Canvas(const PlotSpec& spec, Range x, Range y) : spec_(spec), x_(x), y_(y) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
         << spec.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         << "<text x=\"" << spec.width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
         << esc(spec.title) << "</text>\n";
  }

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * plot_w(); }
  double py(double y) const { return kTop + (1.0 - (y - y_.lo) / (y_.hi - y_.lo)) * plot_h(); }
  double plot_w() const { return spec_.width - kLeft - kRight; }
  double plot_h() const { return spec_.height - kTop - kBottom; }
  std::ostream& raw() { return out_; }

  void axes(bool x_ticks = true) {
    out_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w()
         << "\" height=\"" << plot_h() << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double yv = y_.lo + (y_.hi - y_.lo) * i / 4.0;
      out_ << "<text x=\"" << kLeft - 4 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
           << num(yv) << "</text>\n";
      if (x_ticks) {
        const double xv = x_.lo + (x_.hi - x_.lo) * i / 4.0;
        out_ << "<text x=\"" << px(xv) << "\" y=\"" << kTop + plot_h() + 14
             << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
      }
    }
    out_ << "<text x=\"" << kLeft + plot_w() / 2 << "\" y=\"" << spec_.height - 8
         << "\" text-anchor=\"middle\">" << esc(spec_.x_label) << "</text>\n"
         << "<text transform=\"translate(14," << kTop + plot_h() / 2
         << ") rotate(-90)\" text-anchor=\"middle\">" << esc(spec_.y_label) << "</text>\n";
  }

  void legend(const std::vector<Series>& series) {
    double y = kTop + 12;
    for (const auto& s : series) {
      out_ << "<rect x=\"" << kLeft + plot_w() + 8 << "\" y=\"" << y - 8
           << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n"
           << "<text x=\"" << kLeft + plot_w() + 22 << "\" y=\"" << y << "\">" << esc(s.label)
           << "</text>\n";
      y += 16;
    }
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

  static constexpr double kLeft = 60, kRight = 110, kTop = 30, kBottom = 42;

 private:
  PlotSpec spec_;
  Range x_, y_;
  std::ostringstream out_;
};

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

double to_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw DataError("not a number in CSV: '" + s + "'");
  }
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  CsvTable t;
  bool ok = false;
  t.header = split_csv_line(in, ok);
  if (!ok) throw DataError(path.string() + " is empty");
  while (true) {
    auto row = split_csv_line(in, ok);
    if (!ok) break;
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != t.header.size()) {
      throw DataError(path.string() + ": row " + std::to_string(t.rows.size() + 2) + " has " +
                      std::to_string(row.size()) + " fields, expected " +
                      std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string svg_scatter(const PlotSpec& spec, const std::vector<Series>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.finish();
  yr.finish();
  Canvas c(spec, xr, yr);
  c.axes();
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      c.raw() << "<circle cx=\"" << c.px(s.x[i]) << "\" cy=\"" << c.py(s.y[i])
              << "\" r=\"2\" fill=\"" << s.color << "\" fill-opacity=\"0.6\"/>\n";
    }
  }
  c.legend(series);
  return c.finish();
}

std::string svg_lines(const PlotSpec& spec, const std::vector<Series>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.finish();
  yr.finish();
  Canvas c(spec, xr, yr);
  c.axes();
  for (const auto& s : series) {
    c.raw() << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      c.raw() << c.px(s.x[i]) << ',' << c.py(s.y[i]) << ' ';
    }
    c.raw() << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      c.raw() << "<circle cx=\"" << c.px(s.x[i]) << "\" cy=\"" << c.py(s.y[i])
              << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
    }
  }
  c.legend(series);
  return c.finish();
}

std::string svg_histogram(const PlotSpec& spec, const std::vector<Series>& series, int bins,
                          double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw ConfigError("histogram needs bins >= 1 and hi > lo");
  std::vector<std::vector<double>> counts;
  Range yr;
  yr.add(0.0);
  for (const auto& s : series) {
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      auto b = static_cast<int>((v - lo) / (hi - lo) * bins);
      b = std::clamp(b, 0, bins - 1);
      h[static_cast<std::size_t>(b)] += 1.0;
    }
    for (double v : h) yr.add(v);
    counts.push_back(std::move(h));
  }
  yr.finish();
  yr.lo = 0.0;
  Range xr{lo, hi};
  Canvas c(spec, xr, yr);
  c.axes();
  const double bw = (hi - lo) / bins;
  for (std::size_t si = 0; si < series.size(); ++si) {
    for (int b = 0; b < bins; ++b) {
      const double v = counts[si][static_cast<std::size_t>(b)];
      if (v <= 0) continue;
      const double x0 = c.px(lo + b * bw), x1 = c.px(lo + (b + 1) * bw);
      c.raw() << "<rect x=\"" << x0 << "\" y=\"" << c.py(v) << "\" width=\"" << x1 - x0
              << "\" height=\"" << c.py(0) - c.py(v) << "\" fill=\"" << series[si].color
              << "\" fill-opacity=\"0.5\"/>\n";
    }
  }
  c.legend(series);
  return c.finish();
}

std::string svg_boxplot(const PlotSpec& spec, const std::vector<Series>& series) {
  Range yr;
  for (const auto& s : series) {
    for (double v : s.y) yr.add(v);
  }
  yr.finish();
  Range xr{0.0, static_cast<double>(std::max<std::size_t>(series.size(), 1))};
  Canvas c(spec, xr, yr);
  c.axes(false);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const double cx = c.px(static_cast<double>(i) + 0.5);
    c.raw() << "<text x=\"" << cx << "\" y=\"" << Canvas::kTop + c.plot_h() + 14
            << "\" text-anchor=\"middle\">" << esc(s.label) << " (n=" << s.y.size() << ")</text>\n";
    if (s.y.empty()) continue;
    const double q1 = quantile(s.y, 0.25), med = quantile(s.y, 0.5), q3 = quantile(s.y, 0.75);
    const double iqr = q3 - q1;
    double wlo = q3, whi = q1;
    for (double v : s.y) {
      if (v >= q1 - 1.5 * iqr) wlo = std::min(wlo, v);
      if (v <= q3 + 1.5 * iqr) whi = std::max(whi, v);
    }
    const double half = 0.2 * c.plot_w() / static_cast<double>(series.size());
    c.raw() << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << c.py(wlo) << "\" y2=\""
            << c.py(whi) << "\" stroke=\"#333\"/>\n"
            << "<rect x=\"" << cx - half << "\" y=\"" << c.py(q3) << "\" width=\"" << 2 * half
            << "\" height=\"" << c.py(q1) - c.py(q3) << "\" fill=\"" << s.color
            << "\" fill-opacity=\"0.6\" stroke=\"#333\"/>\n"
            << "<line x1=\"" << cx - half << "\" x2=\"" << cx + half << "\" y1=\"" << c.py(med)
            << "\" y2=\"" << c.py(med) << "\" stroke=\"#000\" stroke-width=\"2\"/>\n";
    for (double v : s.y) {
      if (v < wlo || v > whi) {
        c.raw() << "<circle cx=\"" << cx << "\" cy=\"" << c.py(v)
                << "\" r=\"2\" fill=\"none\" stroke=\"#333\"/>\n";
      }
    }
  }
  return c.finish();
}

std::string svg_bars(const PlotSpec& spec, const std::vector<std::string>& groups,
                     const std::vector<Series>& series) {
  Range yr;
  yr.add(0.0);
  for (const auto& s : series) {
    for (double v : s.y) yr.add(v);
  }
  yr.finish();
  yr.lo = 0.0;
  Range xr{0.0, static_cast<double>(std::max<std::size_t>(groups.size(), 1))};
  Canvas c(spec, xr, yr);
  c.axes(false);
  const double slot = 0.8 / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    c.raw() << "<text x=\"" << c.px(static_cast<double>(g) + 0.5) << "\" y=\""
            << Canvas::kTop + c.plot_h() + 14 << "\" text-anchor=\"middle\">" << esc(groups[g])
            << "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
      if (g >= series[si].y.size()) continue;
      const double v = series[si].y[g];
      const double x0 = c.px(static_cast<double>(g) + 0.1 + slot * static_cast<double>(si));
      const double x1 = c.px(static_cast<double>(g) + 0.1 + slot * static_cast<double>(si + 1));
      c.raw() << "<rect x=\"" << x0 << "\" y=\"" << c.py(v) << "\" width=\"" << x1 - x0
              << "\" height=\"" << c.py(0) - c.py(v) << "\" fill=\"" << series[si].color
              << "\"/>\n";
    }
  }
  c.legend(series);
  return c.finish();
}

std::vector<std::string> render_report(const fs::path& dir) {
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& svg) {
    write_file(dir / name, svg);
    written.push_back(name);
  };
  const std::string green = "#2a9d8f", red = "#e76f51", blue = "#264653", gold = "#e9c46a";

  if (fs::exists(dir / "predictions.csv")) {
    const auto t = read_csv(dir / "predictions.csv");
    const auto gold_c = t.column("gold"), pred_c = t.column("predicted"),
               ent_c = t.column("entropy");
    Series ok{"correct", green, {}, {}}, bad{"error", red, {}, {}};
    for (const auto& r : t.rows) {
      (r[gold_c] == r[pred_c] ? ok : bad).y.push_back(to_double(r[ent_c]));
    }
    emit("entropy_histogram.svg",
         svg_histogram({"Output entropy of test predictions", "entropy (nats)", "words"},
                       {ok, bad}, 20, 0.0, std::log(2.0)));
    emit("entropy_boxplot.svg",
         svg_boxplot({"Output entropy by correctness", "", "entropy (nats)"}, {ok, bad}));
  }

  if (fs::exists(dir / "entropy_frequency.csv")) {
    const auto t = read_csv(dir / "entropy_frequency.csv");
    const auto e = t.column("entropy"), f = t.column("log_frequency"), k = t.column("correct");
    Series ok{"correct", green, {}, {}}, bad{"error", red, {}, {}};
    for (const auto& r : t.rows) {
      auto& s = r[k] == "1" ? ok : bad;
      s.x.push_back(to_double(r[f]));
      s.y.push_back(to_double(r[e]));
    }
    emit("entropy_frequency.svg",
         svg_scatter({"Entropy against log frequency", "ln(frequency)", "entropy (nats)"},
                     {ok, bad}));
  }

  if (fs::exists(dir / "projection.csv")) {
    const auto t = read_csv(dir / "projection.csv");
    const auto g = t.column("gold"), p = t.column("predicted"), x = t.column("x"),
               y = t.column("y");
    Series u{"uter", blue, {}, {}}, n{"neuter", gold, {}, {}}, bad{"misclassified", red, {}, {}};
    for (const auto& r : t.rows) {
      auto& s = r[g] != r[p] ? bad : (r[g] == "uter" ? u : n);
      s.x.push_back(to_double(r[x]));
      s.y.push_back(to_double(r[y]));
    }
    emit("projection.svg",
         svg_scatter({"Test vectors, first two singular directions", "component 1", "component 2"},
                     {u, n, bad}));
  }

  if (fs::exists(dir / "grid.json")) {
    std::ifstream in(dir / "grid.json");
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("grid.json is not valid JSON");
    std::vector<Series> lines;
    const std::vector<std::pair<std::string, std::string>> kinds = {
        {"asymmetric_backward", blue}, {"asymmetric_forward", red}, {"symmetric", green}};
    for (const auto& [kind, color] : kinds) {
      Series s{kind, color, {}, {}};
      for (const auto& cell : j.at("cells")) {
        if (cell.at("context_type") != kind || !cell.value("ok", false)) continue;
        s.x.push_back(cell.at("window_size").get<double>());
        s.y.push_back(100.0 * cell.at("dev_accuracy").get<double>());
      }
      if (!s.x.empty()) lines.push_back(std::move(s));
    }
    emit("grid_accuracy.svg",
         svg_lines({"Dev accuracy by context", "window size", "accuracy (%)"}, lines));
  }

  if (fs::exists(dir / "deciles.json")) {
    std::ifstream in(dir / "deciles.json");
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("deciles.json is not valid JSON");
    Series u{"uter", blue, {}, {}}, n{"neuter", gold, {}, {}};
    std::vector<std::string> groups;
    for (int i = 0; i < 10; ++i) {
      groups.push_back(std::to_string(i + 1));
      u.y.push_back(100.0 * j.at("uter_share").at(i).get<double>());
      n.y.push_back(100.0 * j.at("neuter_share").at(i).get<double>());
    }
    emit("deciles.svg",
         svg_bars({"Class shares by frequency decile", "decile", "share (%)"}, groups, {u, n}));
  }
  return written;
}

}  // namespace gendervec
