#include "circa/case_io.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "circa/errors.hpp"
#include "circa/io_util.hpp"

namespace circa {

using nlohmann::json;

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string case_csv(const Case& c) {
  std::string out = "timestamp";
  for (const auto& [id, ts] : c.series()) {
    out += ',';
    out += id.str();
  }
  out += '\n';
  for (std::size_t i = 0; i < c.length(); ++i) {
    out += std::to_string(c.start_time() + static_cast<Minutes>(i));
    for (const auto& [id, ts] : c.series()) {
      out += ',';
      out += format_double(ts.values[i]);
    }
    out += '\n';
  }
  return out;
}

std::string case_json(const Case& c) {
  json doc;
  doc["detect_time"] = c.detect_time();
  doc["t_ref"] = c.windows().t_ref;
  doc["t_delay"] = c.windows().t_delay;
  doc["t_test"] = c.windows().t_test;
  doc["sli"] = c.sli().str();
  if (c.truth()) {
    doc["root_causes"] = json::array();
    for (const auto& rc : c.truth()->root_causes) doc["root_causes"].push_back(rc.str());
  }
  if (c.fault_type()) doc["fault_type"] = *c.fault_type();
  return doc.dump(2) + "\n";
}

Case case_from_text(const std::string& csv, const std::string& json_text) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "data.csv: empty file");
  const auto header = split_fields(trim_cr(line));
  if (header.empty() || header[0] != "timestamp") {
    throw Error(ErrorCode::ParseError, "data.csv:1: first column must be 'timestamp'");
  }
  std::vector<std::string> names;
  for (std::size_t i = 1; i < header.size(); ++i) names.emplace_back(header[i]);
  std::vector<std::vector<double>> columns(names.size());

  Minutes start = 0;
  std::size_t row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim_cr(line);
    if (view.empty()) continue;
    const auto fields = split_fields(view);
    const std::string where = "data.csv:" + std::to_string(line_no) + ": ";
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::ParseError, where + "expected " + std::to_string(header.size()) + " fields");
    }
    Minutes ts = 0;
    try {
      ts = parse_integer(fields[0]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + e.what());
    }
    if (row == 0) {
      start = ts;
    } else if (ts != start + static_cast<Minutes>(row)) {
      throw Error(ErrorCode::MisalignedSeries, where + "timestamps must advance by exactly one minute");
    }
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i].empty()) throw Error(ErrorCode::MissingValue, where + names[i - 1] + " is empty");
      double v = 0.0;
      try {
        v = parse_double(fields[i]);
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, where + e.what());
      }
      if (!std::isfinite(v)) throw Error(ErrorCode::MissingValue, where + names[i - 1] + " is not finite");
      columns[i - 1].push_back(v);
    }
    ++row;
  }

  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("case.json: ") + e.what());
  }
  try {
    WindowConfig windows;
    windows.t_ref = doc.value("t_ref", windows.t_ref);
    windows.t_delay = doc.value("t_delay", windows.t_delay);
    windows.t_test = doc.value("t_test", windows.t_test);

    std::map<MetricId, TimeSeries> series;
    for (std::size_t i = 0; i < names.size(); ++i) {
      MetricId id(names[i]);
      if (series.contains(id)) throw Error(ErrorCode::ParseError, "data.csv: duplicate column " + names[i]);
      series.emplace(id, TimeSeries{id, start, 1, std::move(columns[i])});
    }
    std::optional<GroundTruth> truth;
    if (doc.contains("root_causes") && !doc["root_causes"].is_null()) {
      GroundTruth gt;
      for (const auto& rc : doc["root_causes"]) gt.root_causes.insert(MetricId(rc.get<std::string>()));
      truth = std::move(gt);
    }
    std::optional<std::string> fault_type;
    if (doc.contains("fault_type") && doc["fault_type"].is_string()) fault_type = doc["fault_type"].get<std::string>();
    return Case(std::move(series), doc.at("detect_time").get<Minutes>(), windows,
                MetricId(doc.at("sli").get<std::string>()), std::move(truth), std::move(fault_type));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("case.json: ") + e.what());
  }
}

void write_case(const Case& c, const std::string& dir) {
  const std::filesystem::path base(dir);
  write_file((base / "data.csv").string(), case_csv(c));
  write_file((base / "case.json").string(), case_json(c));
}

Case read_case(const std::string& dir) {
  const std::filesystem::path base(dir);
  return case_from_text(read_file((base / "data.csv").string()), read_file((base / "case.json").string()));
}

}  // namespace circa
