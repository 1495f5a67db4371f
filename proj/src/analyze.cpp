#include "dtadag/analyze.hpp"

#include <algorithm>
#include <sstream>

namespace dta {

namespace {

bool column_complete(const Frame& data, const std::string& name) {
  const int col = data.column(name);
  return std::all_of(data.rows.begin(), data.rows.end(),
                     [&](const auto& row) { return row[col] >= 0; });
}

std::vector<std::string> split_csv_line(const std::string& line) {
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

// Aggregated lca input: test columns of 0/1 plus a `count` column.
std::map<std::vector<int>, double> load_pattern_counts(const std::string& csv_text,
                                                       std::vector<std::string>& tests) {
  std::istringstream is(csv_text);
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("empty CSV input");
  const auto header = split_csv_line(line);
  int count_col = -1;
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == "count") count_col = static_cast<int>(i);
  if (count_col < 0) throw ValidationError("pattern-count table needs a 'count' column");

  if (tests.empty()) {
    for (size_t i = 0; i < header.size(); ++i)
      if (static_cast<int>(i) != count_col) tests.push_back(header[i]);
  }
  std::vector<int> cols;
  for (const auto& t : tests) {
    auto it = std::find(header.begin(), header.end(), t);
    if (it == header.end()) throw UnknownNodeError("unknown column '" + t + "'");
    cols.push_back(static_cast<int>(it - header.begin()));
  }

  std::map<std::vector<int>, double> counts;
  size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ValidationError("CSV line " + std::to_string(lineno) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
    std::vector<int> pattern;
    for (int c : cols) {
      if (fields[c] != "0" && fields[c] != "1")
        throw ValidationError("CSV line " + std::to_string(lineno) + ": pattern cell '" +
                              fields[c] + "' is not 0 or 1");
      pattern.push_back(fields[c] == "1");
    }
    double count = 0;
    try {
      count = std::stod(fields[count_col]);
    } catch (const std::exception&) {
      throw ValidationError("CSV line " + std::to_string(lineno) + ": count '" +
                            fields[count_col] + "' is not a number");
    }
    if (count < 0)
      throw ValidationError("CSV line " + std::to_string(lineno) + ": negative count");
    counts[pattern] += count;
  }
  return counts;
}

}  // namespace

AnalyzeResult analyze_frame(const Frame& data, const AnalyzeOptions& options) {
  const auto& correction = options.correction;
  if (correction != "none" && correction != "begg-greenes" && correction != "known-reference" &&
      correction != "lca")
    throw ValidationError("unknown correction '" + correction + "'");
  if (data.rows.empty()) throw ValidationError("dataset has no rows");

  AnalyzeResult result;

  if (correction == "lca") {
    if (options.tests.size() < 3)
      throw ValidationError(
          "the lca correction needs at least 3 test columns; a 2-test "
          "conditional-independence model is not identified (use the known-reference "
          "correction when the reference operating characteristics are known)");
    std::map<std::vector<int>, double> counts;
    std::vector<int> cols;
    for (const auto& t : options.tests) cols.push_back(data.column(t));
    for (const auto& row : data.rows) {
      std::vector<int> pattern;
      pattern.reserve(cols.size());
      for (int c : cols) {
        if (row[c] < 0)
          throw ValidationError("test column '" +
                                data.variables[c] + "' has missing values");
        pattern.push_back(row[c]);
      }
      counts[pattern] += 1.0;
    }
    result.lca = lca_em(counts, options.lca);
    if (!options.reference.empty()) {
      if (!column_complete(data, options.reference))
        throw ValidationError(
            "reference column has missing values; only the begg-greenes correction accepts "
            "unverified rows");
      result.estimates.push_back(accuracy_from_data(data, options.index, options.reference));
    }
    return result;
  }

  if (options.index.empty() || options.reference.empty())
    throw ValidationError("analyze needs --index and --reference columns");
  data.column(options.index);
  data.column(options.reference);
  if (!column_complete(data, options.index))
    throw ValidationError("index column '" + options.index + "' has missing values");

  const bool complete_reference = column_complete(data, options.reference);
  if (!complete_reference && correction != "begg-greenes")
    throw ValidationError(
        "reference column has missing values; only the begg-greenes correction accepts "
        "unverified rows");

  // Naive plug-in estimate; with unverified rows this is the verified-only
  // analysis that begg-greenes corrects.
  result.estimates.push_back(accuracy_from_data(data, options.index, options.reference));

  if (correction == "begg-greenes") {
    result.estimates.push_back(
        begg_greenes(verification_from_frame(data, options.index, options.reference)));
  } else if (correction == "known-reference") {
    if (!options.ref_se || !options.ref_sp)
      throw ValidationError("the known-reference correction needs --ref-se and --ref-sp");
    const int ti = data.column(options.index);
    const int ri = data.column(options.reference);
    CrossTab2x2 obs;
    for (const auto& row : data.rows) {
      if (row[ri] == 1)
        (row[ti] == 1 ? obs.a : obs.b) += 1;
      else
        (row[ti] == 1 ? obs.c : obs.d) += 1;
    }
    const double total = obs.a + obs.b + obs.c + obs.d;
    obs.a /= total;
    obs.b /= total;
    obs.c /= total;
    obs.d /= total;
    auto est = known_reference_accuracy(obs, *options.ref_se, *options.ref_sp);
    est.n_effective = static_cast<uint64_t>(total);
    result.estimates.push_back(std::move(est));
  }
  return result;
}

AnalyzeResult analyze_csv(const std::string& csv_text, const AnalyzeOptions& options) {
  if (options.correction == "lca") {
    const auto newline = csv_text.find('\n');
    const std::string header = csv_text.substr(0, newline);
    if ((("," + header + ",").find(",count,") != std::string::npos)) {
      AnalyzeOptions opts = options;
      auto counts = load_pattern_counts(csv_text, opts.tests);
      if (opts.tests.size() < 3)
        throw ValidationError(
            "the lca correction needs at least 3 test columns; a 2-test "
            "conditional-independence model is not identified (use the known-reference "
            "correction when the reference operating characteristics are known)");
      AnalyzeResult result;
      result.lca = lca_em(counts, opts.lca);
      return result;
    }
  }
  return analyze_frame(read_csv(csv_text), options);
}

}  // namespace dta
