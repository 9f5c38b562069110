#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "siamaug/common.hpp"
#include "siamaug/event_log.hpp"
#include "siamaug/ingest.hpp"
#include "siamaug/iso8601.hpp"

namespace siamaug {

struct CsvMapping {
  std::string case_column = "case:concept:name";
  std::string activity_column = "concept:name";
  std::string timestamp_column = "time:timestamp";
};

struct CsvReadOptions {
  CsvMapping mapping;
  // Stop after this many event rows, in raw file order. 0 disables the cap.
  std::size_t max_events = 0;
};

namespace detail {

// RFC 4180 style records: quoted fields may contain commas, escaped quotes
// ("") and newlines. `line` reports the line each record starts on.
struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

inline std::vector<CsvRecord> parse_csv_records(std::string_view text) {
  std::vector<CsvRecord> records;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool record_done = false;
    bool saw_any = false;
    while (i < n && !record_done) {
      const char c = text[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field += c;
          ++i;
        }
      } else {
        switch (c) {
          case '"':
            in_quotes = true;
            saw_any = true;
            ++i;
            break;
          case ',':
            rec.fields.push_back(std::move(field));
            field.clear();
            saw_any = true;
            ++i;
            break;
          case '\r':
            ++i;
            break;
          case '\n':
            ++line;
            ++i;
            record_done = true;
            break;
          default:
            field += c;
            saw_any = true;
            ++i;
        }
      }
    }
    if (in_quotes) throw ParseError("unterminated quoted field", rec.line);
    if (saw_any || !field.empty() || !rec.fields.empty()) {
      rec.fields.push_back(std::move(field));
      records.push_back(std::move(rec));
    }
  }
  return records;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace detail

inline EventLog read_csv_string(std::string_view text, const CsvReadOptions& options = {}) {
  const auto records = detail::parse_csv_records(text);
  if (records.empty()) throw ParseError("empty CSV: missing header row", 1);

  const auto& header = records.front().fields;
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ConfigError("CSV is missing required column: " + name);
  };
  const std::size_t case_col = column(options.mapping.case_column);
  const std::size_t act_col = column(options.mapping.activity_column);
  const std::size_t ts_col = column(options.mapping.timestamp_column);

  std::vector<detail::RawTrace> raw;
  std::unordered_map<std::string, std::size_t> trace_index;
  std::size_t events_read = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (options.max_events > 0 && events_read >= options.max_events) break;
    const auto& rec = records[r];
    const std::size_t needed = std::max({case_col, act_col, ts_col}) + 1;
    if (rec.fields.size() < needed) {
      throw ParseError("row has too few fields", rec.line);
    }
    detail::RawEvent ev;
    ev.activity = rec.fields[act_col];
    if (ev.activity.empty()) throw ParseError("empty activity name", rec.line);
    const std::string& ts_text = rec.fields[ts_col];
    if (!ts_text.empty()) {
      auto ts = parse_iso8601_ms(ts_text);
      if (!ts) throw ParseError("unparsable timestamp '" + ts_text + "'", rec.line);
      ev.timestamp_ms = ts;
    }
    const std::string& case_id = rec.fields[case_col];
    auto it = trace_index.find(case_id);
    if (it == trace_index.end()) {
      it = trace_index.emplace(case_id, raw.size()).first;
      raw.push_back(detail::RawTrace{case_id, {}, {}});
    }
    raw[it->second].events.push_back(std::move(ev));
    ++events_read;
  }
  return detail::build_log(std::move(raw));
}

inline EventLog read_csv(const std::filesystem::path& path, const CsvReadOptions& options = {}) {
  return read_csv_string(detail::read_file(path), options);
}

inline std::string write_csv_string(const EventLog& log, const CsvMapping& mapping = {}) {
  std::string out;
  out += detail::csv_escape(mapping.case_column);
  out += ',';
  out += detail::csv_escape(mapping.activity_column);
  out += ',';
  out += detail::csv_escape(mapping.timestamp_column);
  out += '\n';
  for (const auto& t : log.traces) {
    for (const auto& e : t.events) {
      out += detail::csv_escape(t.case_id);
      out += ',';
      out += detail::csv_escape(log.vocab.name_of(e.activity));
      out += ',';
      if (e.timestamp_ms) out += format_iso8601_ms(*e.timestamp_ms);
      out += '\n';
    }
  }
  return out;
}

inline void write_csv(const EventLog& log, const std::filesystem::path& path,
                      const CsvMapping& mapping = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << write_csv_string(log, mapping);
}

}  // namespace siamaug
