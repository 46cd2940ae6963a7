// Dense ARFF reader for Mulan-style multi-label files.

#include <fstream>
#include <istream>
#include <regex>
#include <set>
#include <sstream>
#include <string>

#include "fmlfs/dataset.h"
#include "fmlfs/error.h"
#include "fmlfs/text.h"

namespace fmlfs {
namespace {

struct Attribute {
  std::string name;
  bool nominal = false;
  std::vector<std::string> values;  // nominal categories
};

std::string Unquote(std::string_view s) {
  s = Trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') &&
      s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

// Splits a line on commas that are outside quotes.
std::vector<std::string> SplitQuoted(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  char quote = 0;
  for (char ch : line) {
    if (quote) {
      if (ch == quote) quote = 0;
      cur.push_back(ch);
    } else if (ch == '\'' || ch == '"') {
      quote = ch;
      cur.push_back(ch);
    } else if (ch == ',') {
      out.push_back(Unquote(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(Unquote(cur));
  return out;
}

Attribute ParseAttribute(std::string_view rest, std::size_t line_no) {
  rest = Trim(rest);
  Attribute attr;
  std::size_t name_end = 0;
  if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
    name_end = rest.find(rest.front(), 1);
    if (name_end == std::string_view::npos) {
      throw DataError("ARFF line " + std::to_string(line_no) +
                      ": unterminated attribute name");
    }
    attr.name = std::string(rest.substr(1, name_end - 1));
    ++name_end;
  } else {
    while (name_end < rest.size() &&
           !std::isspace(static_cast<unsigned char>(rest[name_end])) &&
           rest[name_end] != '{') {
      ++name_end;
    }
    attr.name = std::string(rest.substr(0, name_end));
  }
  const std::string_view type = Trim(rest.substr(name_end));
  if (attr.name.empty() || type.empty()) {
    throw DataError("ARFF line " + std::to_string(line_no) +
                    ": malformed @attribute declaration");
  }
  if (type.front() == '{') {
    const std::size_t close = type.find('}');
    if (close == std::string_view::npos) {
      throw DataError("ARFF line " + std::to_string(line_no) +
                      ": unterminated nominal value list");
    }
    attr.nominal = true;
    attr.values = SplitQuoted(type.substr(1, close - 1));
    return attr;
  }
  const std::string lowered = ToLower(type);
  if (lowered != "numeric" && lowered != "real" && lowered != "integer") {
    throw DataError("ARFF line " + std::to_string(line_no) +
                    ": unsupported attribute type '" + std::string(type) + "'");
  }
  return attr;
}

bool IsKeyword(std::string_view line, std::string_view keyword) {
  if (line.size() < keyword.size()) return false;
  if (ToLower(line.substr(0, keyword.size())) != keyword) return false;
  return line.size() == keyword.size() ||
         std::isspace(static_cast<unsigned char>(line[keyword.size()]));
}

}  // namespace

std::vector<std::string> ParseLabelXml(std::istream& in) {
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  static const std::regex kLabel(R"re(<label\s+name\s*=\s*("([^"]*)"|'([^']*)'))re");
  std::vector<std::string> names;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kLabel);
       it != std::sregex_iterator(); ++it) {
    std::string name = (*it)[2].matched ? (*it)[2].str() : (*it)[3].str();
    for (const auto& [from, to] :
         {std::pair{"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""},
          {"&apos;", "'"}, {"&amp;", "&"}}) {
      for (std::size_t p = name.find(from); p != std::string::npos;
           p = name.find(from, p + 1)) {
        name.replace(p, std::string_view(from).size(), to);
      }
    }
    names.push_back(std::move(name));
  }
  if (names.empty()) throw DataError("label XML declares no labels");
  return names;
}

MultiLabelDataset ParseArff(std::istream& in, const LabelSpec& labels) {
  std::vector<Attribute> attrs;
  std::string line;
  std::size_t line_no = 0;
  bool in_data = false;
  while (!in_data && std::getline(in, line)) {
    ++line_no;
    const std::string_view t = Trim(line);
    if (t.empty() || t.front() == '%') continue;
    if (IsKeyword(t, "@relation")) continue;
    if (IsKeyword(t, "@attribute")) {
      attrs.push_back(ParseAttribute(t.substr(10), line_no));
    } else if (IsKeyword(t, "@data")) {
      in_data = true;
    } else {
      throw DataError("ARFF line " + std::to_string(line_no) +
                      ": unexpected header content");
    }
  }
  if (!in_data) throw DataError("ARFF file has no @data section");

  std::vector<bool> is_label(attrs.size(), false);
  std::vector<std::size_t> label_cols;
  if (const auto* count = std::get_if<std::size_t>(&labels)) {
    if (*count < 1 || attrs.size() < *count + 1) {
      throw DataError("ARFF needs at least labels + 1 attributes");
    }
    for (std::size_t i = attrs.size() - *count; i < attrs.size(); ++i) {
      label_cols.push_back(i);
    }
  } else {
    const auto& xml_path = std::get<std::filesystem::path>(labels);
    std::ifstream xml(xml_path);
    if (!xml) throw Error(ErrorCode::kIoError, "cannot open " + xml_path.string());
    for (const auto& name : ParseLabelXml(xml)) {
      std::size_t found = attrs.size();
      for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (attrs[i].name == name) found = i;
      }
      if (found == attrs.size()) {
        throw DataError("label '" + name + "' from XML is not an ARFF attribute");
      }
      label_cols.push_back(found);
    }
    if (attrs.size() < label_cols.size() + 1) {
      throw DataError("ARFF needs at least labels + 1 attributes");
    }
  }
  for (std::size_t c : label_cols) {
    if (is_label[c]) throw DataError("label '" + attrs[c].name + "' listed twice");
    is_label[c] = true;
    if (attrs[c].nominal) {
      for (const auto& v : attrs[c].values) {
        if (v != "0" && v != "1") {
          throw DataError("label attribute '" + attrs[c].name +
                          "' has a non-binary category '" + v + "'");
        }
      }
    }
  }
  std::vector<std::size_t> feature_cols;
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (is_label[i]) continue;
    if (attrs[i].nominal) {
      for (const auto& v : attrs[i].values) {
        if (!ParseDouble(v)) {
          throw DataError("feature attribute '" + attrs[i].name +
                          "' is nominal with non-numeric categories");
        }
      }
    }
    feature_cols.push_back(i);
  }

  std::vector<double> values;
  std::vector<std::uint8_t> label_values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = Trim(line);
    if (t.empty() || t.front() == '%') continue;
    if (t.front() == '{') {
      throw DataError("ARFF line " + std::to_string(line_no) +
                      ": sparse rows are not supported");
    }
    const std::vector<std::string> cells = SplitQuoted(t);
    if (cells.size() != attrs.size()) {
      throw DataError("ARFF line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " values, expected " +
                      std::to_string(attrs.size()));
    }
    for (std::size_t c : feature_cols) {
      if (cells[c] == "?") {
        throw DataError("ARFF line " + std::to_string(line_no) +
                        ": missing value for '" + attrs[c].name + "'");
      }
      auto v = ParseDouble(cells[c]);
      if (!v) {
        throw DataError("ARFF line " + std::to_string(line_no) +
                        ": non-numeric value '" + cells[c] + "' for '" +
                        attrs[c].name + "'");
      }
      values.push_back(*v);
    }
    for (std::size_t c : label_cols) {
      const std::string& cell = cells[c];
      if (cell != "0" && cell != "1") {
        throw DataError("ARFF line " + std::to_string(line_no) +
                        ": label '" + attrs[c].name + "' has non-binary value '" +
                        cell + "'");
      }
      label_values.push_back(cell == "1" ? 1 : 0);
    }
    ++rows;
  }
  if (rows == 0) throw DataError("ARFF file has no data rows");

  MultiLabelDataset ds;
  const std::size_t d = feature_cols.size();
  const std::size_t l = label_cols.size();
  ds.features = Matrix<double>(rows, d);
  ds.labels = Matrix<std::uint8_t>(rows, l);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) ds.features(r, c) = values[r * d + c];
    for (std::size_t c = 0; c < l; ++c) ds.labels(r, c) = label_values[r * l + c];
  }
  for (std::size_t c : feature_cols) ds.feature_names.push_back(attrs[c].name);
  for (std::size_t c : label_cols) ds.label_names.push_back(attrs[c].name);
  ds.Validate();
  return ds;
}

MultiLabelDataset LoadArff(const std::filesystem::path& path,
                           const LabelSpec& labels) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return ParseArff(in, labels);
}

}  // namespace fmlfs
