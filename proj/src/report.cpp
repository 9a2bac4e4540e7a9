#include "ccprobe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ccprobe/artifacts.hpp"
#include "ccprobe/errors.hpp"

namespace ccprobe {

using nlohmann::json;

std::string format_value(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3"};

std::optional<double> opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::string render_svg(const BarChart& chart) {
  const double left = 64, right = 24, top = 48, bottom = 120;
  const double plot_h = 280;
  const std::size_t groups = std::max<std::size_t>(chart.categories.size(), 1);
  const std::size_t per_group = std::max<std::size_t>(chart.series.size(), 1);
  const double bar_w = 14;
  const double group_w = bar_w * static_cast<double>(per_group) + 16;
  const double plot_w = std::max(240.0, group_w * static_cast<double>(groups));
  const double width = left + plot_w + right;
  const double height = top + plot_h + bottom;
  const double y_max = chart.y_max > 0 ? chart.y_max : 1.0;
  auto y_at = [&](double v) { return top + plot_h * (1.0 - std::clamp(v / y_max, 0.0, 1.0)); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
    << num(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
    << escape_xml(chart.title) << "</text>\n";

  for (int tick = 0; tick <= 4; ++tick) {
    const double v = y_max * tick / 4.0;
    const double y = y_at(v);
    s << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + plot_w)
      << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n";
    s << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
      << num(v) << "</text>\n";
  }
  s << "<text transform=\"translate(16," << num(top + plot_h / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(chart.y_label) << "</text>\n";

  for (std::size_t g = 0; g < chart.categories.size(); ++g) {
    const double gx = left + group_w * static_cast<double>(g) + 8;
    for (std::size_t k = 0; k < chart.series.size(); ++k) {
      const auto& series = chart.series[k];
      if (g >= series.values.size() || !series.values[g]) continue;
      const double v = *series.values[g];
      const double x = gx + bar_w * static_cast<double>(k);
      const double y = y_at(v);
      s << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(bar_w - 2)
        << "\" height=\"" << num(top + plot_h - y) << "\" fill=\"" << kPalette[k % 5] << "\"/>\n";
      if (g < series.errors.size() && series.errors[g] > 0) {
        const double cx = x + (bar_w - 2) / 2;
        const double lo = y_at(v - series.errors[g]);
        const double hi = y_at(v + series.errors[g]);
        s << "<line x1=\"" << num(cx) << "\" y1=\"" << num(lo) << "\" x2=\"" << num(cx)
          << "\" y2=\"" << num(hi) << "\" stroke=\"black\"/>\n";
      }
    }
    const double lx = gx + bar_w * static_cast<double>(per_group) / 2;
    const double ly = top + plot_h + 12;
    s << "<text transform=\"translate(" << num(lx) << "," << num(ly)
      << ") rotate(45)\" text-anchor=\"start\">" << escape_xml(chart.categories[g]) << "</text>\n";
  }
  if (chart.reference_line) {
    const double y = y_at(*chart.reference_line);
    s << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + plot_w)
      << "\" y2=\"" << num(y) << "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  }
  s << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h) << "\" x2=\""
    << num(left + plot_w) << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"black\"/>\n";

  double legend_x = left;
  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    s << "<rect x=\"" << num(legend_x) << "\" y=\"32\" width=\"10\" height=\"10\" fill=\""
      << kPalette[k % 5] << "\"/>\n";
    s << "<text x=\"" << num(legend_x + 14) << "\" y=\"41\">" << escape_xml(chart.series[k].name)
      << "</text>\n";
    legend_x += 24 + 7.0 * static_cast<double>(chart.series[k].name.size());
  }
  s << "</svg>\n";
  return s.str();
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string text() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back('\t');
        out += cells[i];
      }
      out.push_back('\n');
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

struct Kind {
  std::string name;
  Table table;
  BarChart chart;
};

Kind consistency_kind(const json& m) {
  Kind k{"consistency", {}, {}};
  const auto& c = m.at("consistency");
  k.table.header = {"backend", "rule", "normalization", "cc", "degeneracy", "task_accuracy",
                    "mean_s_b", "anchors", "excluded"};
  k.table.rows.push_back({m.at("backend").get<std::string>(), m.at("rule").get<std::string>(),
                          m.at("normalization").get<std::string>(), format_value(opt(c, "cc")),
                          c.at("degeneracy").get<std::string>(),
                          format_value(opt(m.at("task"), "accuracy")),
                          format_value(opt(m.at("background"), "mean_s_b")),
                          std::to_string(c.at("n_anchors").get<std::size_t>()),
                          std::to_string(c.at("n_excluded").get<std::size_t>())});
  k.chart.title = "Conceptual consistency";
  k.chart.y_label = "score";
  k.chart.categories = {m.at("backend").get<std::string>()};
  k.chart.series = {{"cc", {opt(c, "cc")}, {}},
                    {"background", {opt(m.at("background"), "mean_s_b")}, {}},
                    {"task", {opt(m.at("task"), "accuracy")}, {}}};
  return k;
}

Kind background_kind(const json& m) {
  Kind k{"background", {}, {}};
  const auto& b = m.at("background");
  k.table.header = {"relation", "facts", "positive_acc", "negative_acc", "balanced"};
  BarSeries bars{"balanced accuracy", {}, {}};
  for (const auto& row : b.at("per_relation")) {
    const auto rel = row.at("relation").get<std::string>();
    k.table.rows.push_back({rel, std::to_string(row.at("facts").get<std::size_t>()),
                            format_value(opt(row, "positive_acc")),
                            format_value(opt(row, "negative_acc")),
                            format_value(opt(row, "balanced"))});
    k.chart.categories.push_back(rel);
    bars.values.push_back(opt(row, "balanced"));
  }
  const auto mean = opt(b, "relation_mean");
  k.table.rows.push_back({"mean", "", "", "", format_value(mean)});
  k.table.rows.push_back({"ci95", "", "", "", format_value(opt(b, "ci95"))});
  k.chart.title = "Background accuracy by relation";
  k.chart.y_label = "balanced accuracy";
  k.chart.categories.push_back("mean");
  bars.values.push_back(mean);
  bars.errors.assign(bars.values.size(), 0.0);
  bars.errors.back() = opt(b, "ci95").value_or(0.0);
  k.chart.series = {std::move(bars)};
  k.chart.reference_line = 0.5;
  return k;
}

Kind bias_kind(const json& m) {
  Kind k{"bias", {}, {}};
  const auto& b = m.at("bias");
  const auto pos = opt(b, "positive_acc");
  const auto neg = opt(b, "negative_acc");
  k.table.header = {"scope", "positive_acc", "negative_acc"};
  k.table.rows.push_back({b.at("scope").get<std::string>(), format_value(pos), format_value(neg)});
  k.chart.title = "Accuracy on positive and negative facts";
  k.chart.y_label = "accuracy";
  k.chart.categories = {m.at("backend").get<std::string>()};
  k.chart.series = {{"positive facts", {pos}, {}}, {"negative facts", {neg}, {}}};
  return k;
}

Kind breakdown_kind(const json& m, const std::string& mode) {
  Kind k{"breakdown_" + mode, {}, {}};
  k.table.header = {mode, "subset_size", "cc", "mean_s_b", "degeneracy"};
  BarSeries cc{"cc", {}, {}};
  BarSeries sb{"mean s_b", {}, {}};
  for (const auto& row : m.at("breakdowns").at(mode)) {
    const auto key = row.at("key").get<std::string>();
    k.table.rows.push_back({key, std::to_string(row.at("subset_size").get<std::size_t>()),
                            format_value(opt(row, "cc")), format_value(opt(row, "mean_s_b")),
                            row.at("degeneracy").get<std::string>()});
    k.chart.categories.push_back(key);
    cc.values.push_back(opt(row, "cc"));
    sb.values.push_back(opt(row, "mean_s_b"));
  }
  k.chart.title = "Consistency by " + mode;
  k.chart.y_label = "score";
  k.chart.series = {std::move(cc), std::move(sb)};
  return k;
}

}  // namespace

std::vector<std::filesystem::path> write_report(const json& metrics,
                                                const std::filesystem::path& run_dir) {
  std::vector<Kind> kinds;
  try {
    kinds.push_back(consistency_kind(metrics));
    kinds.push_back(background_kind(metrics));
    kinds.push_back(bias_kind(metrics));
    kinds.push_back(breakdown_kind(metrics, "relation"));
    kinds.push_back(breakdown_kind(metrics, "concept"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed metrics document: ") + e.what());
  }
  const auto out_dir = run_dir / kReportDir;
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& k : kinds) {
    write_file_atomic(out_dir / (k.name + ".tsv"), k.table.text());
    write_file_atomic(out_dir / (k.name + ".svg"), render_svg(k.chart));
    written.push_back(std::filesystem::path(kReportDir) / (k.name + ".tsv"));
    written.push_back(std::filesystem::path(kReportDir) / (k.name + ".svg"));
  }
  std::sort(written.begin(), written.end());
  return written;
}

std::vector<std::filesystem::path> write_report(const std::filesystem::path& run_dir) {
  const auto path = run_dir / kMetricsFile;
  if (!std::filesystem::exists(path)) {
    throw DataError("report needs " + path.string() + "; run the 'metrics' stage first");
  }
  json metrics;
  try {
    metrics = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return write_report(metrics, run_dir);
}

}  // namespace ccprobe
