#include "rjbma/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rjbma/errors.hpp"

namespace rjbma {

namespace {

std::vector<std::string> split_fields(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw ValidationError("line " + std::to_string(line_no) + ": unterminated quote");
  out.push_back(std::move(field));
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double parse_number(const std::string& raw, std::size_t line_no, const std::string& column) {
  const std::string s = trim(raw);
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError("line " + std::to_string(line_no) + ": column '" + column +
                          "': cannot parse '" + s + "' as a number");
  return v;
}

}  // namespace

Table parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  Table table;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_fields(line, line_no);
    if (!have_header) {
      for (auto& f : fields) {
        f = trim(f);
        if (f.empty()) throw ValidationError("line " + std::to_string(line_no) + ": empty column name");
        if (table.has(f)) throw ValidationError("duplicate column '" + f + "'");
        table.add(f, {});
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.names.size())
      throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.names.size()) + " fields, found " +
                            std::to_string(fields.size()));
    for (std::size_t j = 0; j < fields.size(); ++j)
      table.columns[j].push_back(parse_number(fields[j], line_no, table.names[j]));
  }
  if (!have_header) throw ValidationError("no header row");
  if (table.rows() == 0) throw ValidationError("no data rows");
  return table;
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

Dataset load_csv(const std::filesystem::path& path, const std::string& outcome_name,
                 const std::string& exposure_name, const CandidateSpec& spec) {
  return validate_dataset(read_csv(path), outcome_name, exposure_name, spec);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw InvariantError("cannot format number");
  return std::string(buf, ptr);
}

std::string format_csv(const Table& table) {
  std::string out;
  for (std::size_t j = 0; j < table.names.size(); ++j) {
    if (j) out += ',';
    out += table.names[j];
  }
  out += '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      if (j) out += ',';
      out += format_double(table.columns[j][i]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << format_csv(table);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace rjbma
