#include "bioscape/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bioscape {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s) {
  T value{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("malformed trace field '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

TraceFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json") return TraceFormat::Jsonl;
  return TraceFormat::Csv;
}

std::string format_trace(const Trace& trace, TraceFormat format) {
  std::ostringstream out;
  if (format == TraceFormat::Csv) {
    out << "step,time";
    for (const auto& e : trace.entities) out << ',' << e;
    out << ",moves,reactions,wall_ms\n";
    for (const auto& row : trace.rows) {
      out << row.step << ',' << shortest(row.time);
      for (const auto& e : trace.entities) {
        auto it = row.populations.find(e);
        out << ',' << (it == row.populations.end() ? 0 : it->second);
      }
      out << ',' << row.moves << ',' << row.reactions << ',' << shortest(row.wall_ms) << '\n';
    }
    return out.str();
  }
  for (const auto& row : trace.rows) {
    nlohmann::ordered_json j;
    j["step"] = row.step;
    j["time"] = row.time;
    nlohmann::ordered_json pops = nlohmann::ordered_json::object();
    for (const auto& e : trace.entities) {
      auto it = row.populations.find(e);
      pops[e] = it == row.populations.end() ? 0 : it->second;
    }
    j["populations"] = pops;
    j["moves"] = row.moves;
    j["reactions"] = row.reactions;
    j["wall_ms"] = row.wall_ms;
    out << j.dump() << '\n';
  }
  return out.str();
}

void write_trace(const Trace& trace, TraceFormat format, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  file << format_trace(trace, format);
  if (!file) throw std::runtime_error("failed writing '" + path.string() + "'");
}

Trace parse_trace_csv(std::string_view text) {
  Trace trace;
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw std::runtime_error("empty trace");
  const auto header = split(lines[0], ',');
  if (header.size() < 5 || header[0] != "step" || header[1] != "time" ||
      header[header.size() - 3] != "moves" || header[header.size() - 2] != "reactions" ||
      header.back() != "wall_ms") {
    throw std::runtime_error("unexpected trace header");
  }
  for (std::size_t c = 2; c + 3 < header.size(); ++c) trace.entities.emplace_back(header[c]);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto fields = split(lines[l], ',');
    if (fields.size() != header.size()) {
      throw std::runtime_error("trace line " + std::to_string(l + 1) + " has " +
                               std::to_string(fields.size()) + " fields");
    }
    TraceRow row;
    row.step = parse_number<std::uint64_t>(fields[0]);
    row.time = parse_number<double>(fields[1]);
    for (std::size_t c = 0; c < trace.entities.size(); ++c) {
      row.populations[trace.entities[c]] = parse_number<std::int64_t>(fields[c + 2]);
    }
    row.moves = parse_number<std::uint64_t>(fields[fields.size() - 3]);
    row.reactions = parse_number<std::uint64_t>(fields[fields.size() - 2]);
    row.wall_ms = parse_number<double>(fields.back());
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

std::int64_t population_at(const Trace& trace, const Name& entity, double t) {
  auto it = std::upper_bound(trace.rows.begin(), trace.rows.end(), t,
                             [](double v, const TraceRow& row) { return v < row.time; });
  if (it == trace.rows.begin()) return 0;
  --it;
  auto p = it->populations.find(entity);
  return p == it->populations.end() ? 0 : p->second;
}

std::string population_svg(const Trace& trace) {
  constexpr double kWidth = 640, kHeight = 400, kMargin = 50;
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                        "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  double t_end = 0.0;
  std::int64_t p_max = 1;
  for (const auto& row : trace.rows) {
    t_end = std::max(t_end, row.time);
    for (const auto& [e, n] : row.populations) p_max = std::max(p_max, n);
  }
  if (t_end <= 0.0) t_end = 1.0;
  auto x = [&](double t) { return kMargin + (kWidth - 2 * kMargin) * t / t_end; };
  auto y = [&](double n) { return kHeight - kMargin - (kHeight - 2 * kMargin) * n / double(p_max); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kMargin << "\" y1=\"" << y(0) << "\" x2=\"" << x(t_end) << "\" y2=\""
      << y(0) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kMargin << "\" y1=\"" << y(0) << "\" x2=\"" << kMargin << "\" y2=\""
      << y(double(p_max)) << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << x(t_end) << "\" y=\"" << y(0) + 20 << "\" text-anchor=\"end\">t = "
      << shortest(t_end) << "</text>\n";
  svg << "<text x=\"" << kMargin - 5 << "\" y=\"" << y(double(p_max)) << "\" text-anchor=\"end\">"
      << p_max << "</text>\n";
  for (std::size_t k = 0; k < trace.entities.size(); ++k) {
    const auto& e = trace.entities[k];
    const char* color = kColors[k % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    double prev_y = 0.0;
    for (std::size_t r = 0; r < trace.rows.size(); ++r) {
      const auto& row = trace.rows[r];
      auto it = row.populations.find(e);
      const double yy = y(it == row.populations.end() ? 0.0 : double(it->second));
      // Step plot: hold the previous level until the next row.
      if (r > 0) svg << x(row.time) << ',' << prev_y << ' ';
      svg << x(row.time) << ',' << yy << ' ';
      prev_y = yy;
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << kWidth - kMargin + 5 << "\" y=\"" << kMargin + 15.0 * k << "\" fill=\""
        << color << "\">" << e << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace bioscape
