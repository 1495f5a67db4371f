#include "dtadag/data.hpp"

#include <sstream>

namespace dta {

int Frame::column(std::string_view name) const {
  for (size_t i = 0; i < variables.size(); ++i)
    if (variables[i] == name) return static_cast<int>(i);
  throw UnknownNodeError("unknown column '" + std::string(name) + "'");
}

Frame to_frame(const Dataset& data) {
  Frame f;
  f.variables = data.variables;
  f.rows.reserve(data.rows.size());
  for (const auto& row : data.rows) {
    std::vector<int8_t> out(row.begin(), row.end());
    f.rows.push_back(std::move(out));
  }
  return f;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

Frame read_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("empty CSV input");
  Frame f;
  f.variables = split_fields(line);
  if (f.variables.size() == 1 && f.variables[0].empty())
    throw ValidationError("CSV header row is empty");

  size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != f.variables.size())
      throw ValidationError("CSV line " + std::to_string(lineno) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(f.variables.size()));
    std::vector<int8_t> row;
    row.reserve(fields.size());
    for (const auto& field : fields) {
      if (field.empty())
        row.push_back(-1);
      else if (field == "0")
        row.push_back(0);
      else if (field == "1")
        row.push_back(1);
      else
        throw ValidationError("CSV line " + std::to_string(lineno) + ": cell '" + field +
                              "' is not 0, 1 or blank");
    }
    f.rows.push_back(std::move(row));
  }
  return f;
}

std::string write_csv(const Frame& frame) {
  std::ostringstream os;
  for (size_t i = 0; i < frame.variables.size(); ++i)
    os << (i ? "," : "") << frame.variables[i];
  os << "\n";
  for (const auto& row : frame.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) os << ",";
      if (row[i] >= 0) os << static_cast<int>(row[i]);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace dta
