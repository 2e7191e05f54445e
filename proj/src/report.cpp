#include "diffc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "diffc/container.hpp"
#include "diffc/error.hpp"

namespace diffc {
namespace {

constexpr std::size_t kCsvColumns = 13;

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  return out;
}

template <class T>
T parse_number(const std::string& s, std::size_t line, const char* column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size() && !s.empty(), Errc::UnsupportedFormat,
          "CSV line " + std::to_string(line) + ": bad " + column + " '" + s + "'");
  return v;
}

std::string series_name(const SuiteRow& r) {
  return r.dataset + " / " + r.corruption + " / " + r.sampler + " (" + r.model + ", " + r.mode + ")";
}

std::string xml_escape(const std::string& s) {
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

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  if (name == "markdown" || name == "md") return ReportFormat::markdown;
  return std::nullopt;
}

std::string render_csv(const SuiteResult& r) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& row : r.rows) {
    out += row.dataset + "," + row.corruption + "," + std::to_string(row.severity) + "," + row.mode + "," +
           row.model + "," + row.sampler + "," + std::to_string(row.steps) + ",";
    if (row.failed()) {
      out += ",,,,,";
    } else {
      out += format_double(row.fid_corrupted_ref) + "," + format_double(row.fid_clean_ref) + "," +
             format_double(row.max_score) + "," + format_double(row.train_loss_final) + "," +
             format_double(row.seconds) + ",";
    }
    out += std::to_string(row.seed) + "\n";
  }
  return out;
}

SuiteResult parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == kCsvHeader, Errc::UnsupportedFormat,
          "CSV header does not match the report schema");
  SuiteResult result;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    require(f.size() == kCsvColumns, Errc::UnsupportedFormat,
            "CSV line " + std::to_string(n) + " has " + std::to_string(f.size()) + " fields");
    SuiteRow row;
    row.dataset = f[0];
    row.corruption = f[1];
    row.severity = parse_number<int>(f[2], n, "severity");
    row.mode = f[3];
    row.model = f[4];
    row.sampler = f[5];
    row.steps = parse_number<int>(f[6], n, "steps");
    if (f[7].empty()) {
      row.error = "failed";
    } else {
      row.fid_corrupted_ref = parse_number<double>(f[7], n, "fid_corrupted_ref");
      row.fid_clean_ref = parse_number<double>(f[8], n, "fid_clean_ref");
      row.max_score = parse_number<double>(f[9], n, "max_score");
      row.train_loss_final = parse_number<double>(f[10], n, "train_loss_final");
      row.seconds = parse_number<double>(f[11], n, "seconds");
    }
    row.seed = parse_number<std::uint64_t>(f[12], n, "seed");
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string render_json(const SuiteResult& r) {
  nlohmann::ordered_json doc;
  doc["name"] = r.name;
  doc["version"] = r.version;
  doc["timestamp"] = r.timestamp;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json j;
    j["dataset"] = row.dataset;
    j["corruption"] = row.corruption;
    j["severity"] = row.severity;
    j["mode"] = row.mode;
    j["model"] = row.model;
    j["sampler"] = row.sampler;
    j["steps"] = row.steps;
    if (row.failed()) {
      j["error"] = row.error;
    } else {
      j["fid_corrupted_ref"] = row.fid_corrupted_ref;
      j["fid_clean_ref"] = row.fid_clean_ref;
      j["max_score"] = row.max_score;
      j["train_loss_final"] = row.train_loss_final;
      j["seconds"] = row.seconds;
      j["regularized"] = row.regularized;
    }
    j["seed"] = row.seed;
    j["digest"] = row.digest;
    j["feature_map"] = row.feature_map;
    doc["rows"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::string render_markdown(const SuiteResult& r) {
  std::vector<CorruptionKind> present;
  for (auto kind : kAllCorruptions)
    if (std::any_of(r.rows.begin(), r.rows.end(),
                    [&](const SuiteRow& row) { return row.corruption == corruption_name(kind); }))
      present.push_back(kind);

  using Key = std::tuple<std::string, std::string, std::string, std::string, int>;
  std::map<Key, std::map<std::string, const SuiteRow*>> table;
  std::vector<Key> order;
  for (const auto& row : r.rows) {
    const Key key{row.dataset, row.mode, row.model, row.sampler, row.severity};
    if (!table.contains(key)) order.push_back(key);
    table[key][row.corruption] = &row;
  }

  std::string header = "| dataset | mode | model | sampler | severity |";
  std::string rule = "|---|---|---|---|---:|";
  // Markdown has a single header row, so group labels go in the first body row.
  std::string groups = "| *group* |  |  |  |  |";
  std::string_view last_group;
  for (auto kind : present) {
    header += " " + std::string(corruption_name(kind)) + " |";
    rule += "---:|";
    const auto group = corruption_group(kind);
    groups += group == last_group ? "  |" : " *" + std::string(group) + "* |";
    last_group = group;
  }
  std::string md = header + "\n" + rule + "\n" + groups + "\n";
  for (const auto& key : order) {
    const auto& [dataset, mode, model, sampler, severity] = key;
    md += "| " + dataset + " | " + mode + " | " + model + " | " + sampler + " | " + std::to_string(severity) + " |";
    const auto& cells = table[key];
    for (auto kind : present) {
      const auto it = cells.find(std::string(corruption_name(kind)));
      if (it == cells.end()) md += "  |";
      else if (it->second->failed()) md += " failed |";
      else md += " " + fixed2(it->second->max_score) + " |";
    }
    md += "\n";
  }
  return md;
}

std::string render_report(const SuiteResult& r, ReportFormat format) {
  require(!r.rows.empty(), Errc::Precondition, "cannot report an empty suite");
  switch (format) {
    case ReportFormat::csv: return render_csv(r);
    case ReportFormat::json: return render_json(r);
    case ReportFormat::markdown: return render_markdown(r);
  }
  return {};
}

void emit_report(const SuiteResult& r, ReportFormat format, const std::string& path) {
  write_text(path, render_report(r, format));
}

std::string render_severity_chart(const SuiteResult& r, const std::string& corruption) {
  std::map<std::string, std::map<int, double>> series;
  for (const auto& row : r.rows) {
    if (row.failed() || (!corruption.empty() && row.corruption != corruption)) continue;
    series[series_name(row)][row.severity] = row.max_score;
  }
  std::erase_if(series, [](const auto& s) { return s.second.size() < 2; });
  require(!series.empty(), Errc::InsufficientSeries, "no series with at least two severities");

  double y_max = 0.0;
  for (const auto& [name, points] : series)
    for (const auto& [sev, v] : points) y_max = std::max(y_max, v);
  y_max = y_max > 0.0 ? y_max * 1.1 : 1.0;

  constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 200, kTop = 30, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  auto x_of = [&](int sev) { return kLeft + plot_w * (sev - 1) / 4.0; };
  auto y_of = [&](double v) { return kTop + plot_h * (1.0 - v / y_max); };
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
                                   "#7f7f7f"};

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += "<line class=\"axis\" x1=\"" + fixed2(kLeft) + "\" y1=\"" + fixed2(kTop + plot_h) + "\" x2=\"" +
         fixed2(kLeft + plot_w) + "\" y2=\"" + fixed2(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<line class=\"axis\" x1=\"" + fixed2(kLeft) + "\" y1=\"" + fixed2(kTop) + "\" x2=\"" + fixed2(kLeft) +
         "\" y2=\"" + fixed2(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  for (int sev = 1; sev <= 5; ++sev) {
    const std::string x = fixed2(x_of(sev));
    svg += "<g class=\"xtick\"><line x1=\"" + x + "\" y1=\"" + fixed2(kTop + plot_h) + "\" x2=\"" + x + "\" y2=\"" +
           fixed2(kTop + plot_h + 5) + "\" stroke=\"black\"/><text x=\"" + x + "\" y=\"" +
           fixed2(kTop + plot_h + 20) + "\" text-anchor=\"middle\" font-size=\"12\">" + std::to_string(sev) +
           "</text></g>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = y_max * i / 4.0;
    svg += "<text class=\"ytick\" x=\"" + fixed2(kLeft - 8) + "\" y=\"" + fixed2(y_of(v) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + fixed2(v) + "</text>\n";
  }
  svg += "<text x=\"" + fixed2(kLeft + plot_w / 2) + "\" y=\"" + fixed2(kHeight - 15) +
         "\" text-anchor=\"middle\" font-size=\"13\">severity</text>\n";
  svg += "<text x=\"15\" y=\"" + fixed2(kTop + plot_h / 2) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 15 " +
         fixed2(kTop + plot_h / 2) + ")\">max FID</text>\n";

  std::size_t i = 0;
  for (const auto& [name, points] : series) {
    const std::string colour = kPalette[i % std::size(kPalette)];
    std::string d;
    for (const auto& [sev, v] : points) d += (d.empty() ? "M" : " L") + fixed2(x_of(sev)) + "," + fixed2(y_of(v));
    svg += "<path class=\"series\" d=\"" + d + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(i);
    svg += "<text x=\"" + fixed2(kLeft + plot_w + 10) + "\" y=\"" + fixed2(ly + 4) + "\" font-size=\"10\" fill=\"" +
           colour + "\">" + xml_escape(name) + "</text>\n";
    ++i;
  }
  svg += "</svg>\n";
  return svg;
}

void emit_severity_chart(const SuiteResult& r, const std::string& path, const std::string& corruption) {
  write_text(path, render_severity_chart(r, corruption));
}

}  // namespace diffc
