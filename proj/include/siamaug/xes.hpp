#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "siamaug/common.hpp"
#include "siamaug/csv.hpp"
#include "siamaug/event_log.hpp"
#include "siamaug/ingest.hpp"
#include "siamaug/iso8601.hpp"

namespace siamaug {

namespace detail {

struct XmlNode {
  std::string tag;
  std::map<std::string, std::string> attrs;
  std::vector<XmlNode> children;
};

// Recursive-descent parser for the XML subset XES files use: declaration,
// comments, elements with single/double quoted attributes, self-closing
// tags and the five predefined entities. Text content is skipped.
class XmlParser {
 public:
  explicit XmlParser(std::string_view text) : text_(text) {}

  XmlNode parse_document() {
    skip_misc();
    XmlNode root = parse_element();
    skip_misc();
    if (pos_ != text_.size()) fail("trailing content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col()); }

  std::size_t col() const { return pos_ - line_start_ + 1; }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  char advance() {
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      line_start_ = pos_;
    }
    return c;
  }

  bool consume(std::string_view s) {
    if (text_.substr(pos_).starts_with(s)) {
      for (std::size_t i = 0; i < s.size(); ++i) advance();
      return true;
    }
    return false;
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') advance();
      else break;
    }
  }

  void skip_misc() {
    for (;;) {
      skip_ws();
      if (consume("<?")) {
        while (!consume("?>")) advance();
      } else if (consume("<!--")) {
        while (!consume("-->")) advance();
      } else if (text_.substr(pos_).starts_with("<!")) {
        // DOCTYPE and friends: skip to the closing '>'
        while (peek() != '>') advance();
        advance();
      } else {
        break;
      }
    }
  }

  std::string parse_name() {
    std::string name;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == ':' || c == '_' || c == '-' || c == '.';
      if (!ok) break;
      name += advance();
    }
    if (name.empty()) fail("expected a name");
    return name;
  }

  std::string decode_entities(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out += raw[i];
        continue;
      }
      const auto end = raw.find(';', i);
      if (end == std::string_view::npos) fail("unterminated entity");
      const auto name = raw.substr(i + 1, end - i - 1);
      if (name == "amp") out += '&';
      else if (name == "lt") out += '<';
      else if (name == "gt") out += '>';
      else if (name == "quot") out += '"';
      else if (name == "apos") out += '\'';
      else fail("unknown entity: &" + std::string(name) + ";");
      i = end;
    }
    return out;
  }

  XmlNode parse_element() {
    if (!consume("<")) fail("expected '<'");
    XmlNode node;
    node.tag = parse_name();
    for (;;) {
      skip_ws();
      const char c = peek();
      if (c == '/') {
        advance();
        if (!consume(">")) fail("malformed self-closing tag");
        return node;
      }
      if (c == '>') {
        advance();
        break;
      }
      const std::string key = parse_name();
      skip_ws();
      if (!consume("=")) fail("expected '=' in attribute");
      skip_ws();
      const char quote = peek();
      if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
      advance();
      std::string raw;
      while (peek() != quote) raw += advance();
      advance();
      node.attrs[key] = decode_entities(raw);
    }
    // children and text until the matching close tag
    for (;;) {
      if (pos_ >= text_.size()) fail("missing close tag for <" + node.tag + ">");
      if (text_.substr(pos_).starts_with("</")) {
        consume("</");
        const std::string closing = parse_name();
        if (closing != node.tag) {
          fail("mismatched close tag: expected </" + node.tag + ">, got </" + closing + ">");
        }
        skip_ws();
        if (!consume(">")) fail("malformed close tag");
        return node;
      }
      if (text_.substr(pos_).starts_with("<!--")) {
        consume("<!--");
        while (!consume("-->")) advance();
        continue;
      }
      if (peek() == '<') {
        node.children.push_back(parse_element());
      } else {
        advance();  // text content is not part of the XES subset
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
};

inline bool is_xes_attribute_tag(const std::string& tag) {
  return tag == "string" || tag == "date" || tag == "int" || tag == "float" ||
         tag == "boolean" || tag == "id";
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

// IEEE XES subset: log/trace/event elements with concept:name and
// time:timestamp; every other trace- or event-level attribute is kept
// opaquely as a string. max_events truncates in document order (0 = no cap).
inline EventLog read_xes_string(std::string_view text, std::size_t max_events = 0) {
  detail::XmlParser parser(text);
  const detail::XmlNode root = parser.parse_document();
  if (root.tag != "log") throw ParseError("root element is <" + root.tag + ">, expected <log>");

  std::vector<detail::RawTrace> raw;
  std::size_t anonymous = 0;
  std::size_t events_read = 0;
  for (const auto& child : root.children) {
    if (child.tag != "trace") continue;  // extensions, classifiers, globals
    if (max_events > 0 && events_read >= max_events) break;
    detail::RawTrace trace;
    for (const auto& item : child.children) {
      if (item.tag == "event") {
        if (max_events > 0 && events_read >= max_events) break;
        ++events_read;
        detail::RawEvent ev;
        bool has_name = false;
        for (const auto& attr : item.children) {
          if (!detail::is_xes_attribute_tag(attr.tag)) continue;
          const auto key_it = attr.attrs.find("key");
          const auto value_it = attr.attrs.find("value");
          if (key_it == attr.attrs.end() || value_it == attr.attrs.end()) continue;
          if (key_it->second == "concept:name") {
            ev.activity = value_it->second;
            has_name = true;
          } else if (key_it->second == "time:timestamp") {
            auto ts = parse_iso8601_ms(value_it->second);
            if (!ts) throw ParseError("unparsable time:timestamp '" + value_it->second + "'");
            ev.timestamp_ms = ts;
          } else {
            ev.attrs[key_it->second] = value_it->second;
          }
        }
        if (!has_name) throw ParseError("event is missing concept:name");
        trace.events.push_back(std::move(ev));
      } else if (detail::is_xes_attribute_tag(item.tag)) {
        const auto key_it = item.attrs.find("key");
        const auto value_it = item.attrs.find("value");
        if (key_it == item.attrs.end() || value_it == item.attrs.end()) continue;
        if (key_it->second == "concept:name") {
          trace.case_id = value_it->second;
        } else {
          trace.attrs[key_it->second] = value_it->second;
        }
      }
    }
    if (trace.case_id.empty()) trace.case_id = "trace#" + std::to_string(++anonymous);
    raw.push_back(std::move(trace));
  }
  return detail::build_log(std::move(raw));
}

inline EventLog read_xes(const std::filesystem::path& path, std::size_t max_events = 0) {
  return read_xes_string(detail::read_file(path), max_events);
}

inline std::string write_xes_string(const EventLog& log) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<log xes.version=\"1.0\">\n";
  for (const auto& t : log.traces) {
    out += "  <trace>\n";
    out += "    <string key=\"concept:name\" value=\"" + detail::xml_escape(t.case_id) + "\"/>\n";
    for (const auto& [k, v] : t.attrs) {
      out += "    <string key=\"" + detail::xml_escape(k) + "\" value=\"" + detail::xml_escape(v) +
             "\"/>\n";
    }
    for (const auto& e : t.events) {
      out += "    <event>\n";
      out += "      <string key=\"concept:name\" value=\"" +
             detail::xml_escape(log.vocab.name_of(e.activity)) + "\"/>\n";
      if (e.timestamp_ms) {
        out += "      <date key=\"time:timestamp\" value=\"" + format_iso8601_ms(*e.timestamp_ms) +
               "\"/>\n";
      }
      for (const auto& [k, v] : e.attrs) {
        out += "      <string key=\"" + detail::xml_escape(k) + "\" value=\"" +
               detail::xml_escape(v) + "\"/>\n";
      }
      out += "    </event>\n";
    }
    out += "  </trace>\n";
  }
  out += "</log>\n";
  return out;
}

inline void write_xes(const EventLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << write_xes_string(log);
}

// Dispatch by file extension: ".xes" goes to the XES reader, everything else
// to CSV.
inline EventLog read_log_auto(const std::filesystem::path& path, const CsvReadOptions& options = {}) {
  if (path.extension() == ".xes") return read_xes(path, options.max_events);
  return read_csv(path, options);
}

}  // namespace siamaug
