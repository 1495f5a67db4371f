#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dtadag/errors.hpp"
#include "dtadag/prob.hpp"

namespace dta {

/// Column-oriented view of study data: binary cells with -1 marking a
/// missing (unverified) value. The CSV convention is a header row of
/// variable names, cells 0/1, an empty field for missing, LF line endings.
struct Frame {
  std::vector<std::string> variables;
  std::vector<std::vector<int8_t>> rows;

  /// Throws UnknownNodeError.
  int column(std::string_view name) const;
  size_t row_count() const { return rows.size(); }
};

Frame to_frame(const Dataset& data);

Frame read_csv(const std::string& text);

std::string write_csv(const Frame& frame);

}  // namespace dta
