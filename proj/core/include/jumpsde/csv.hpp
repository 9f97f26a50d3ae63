#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "jumpsde/calculus.hpp"
#include "jumpsde/jacobian.hpp"

namespace jumpsde {

/// Shortest round-trip text for a double ("%.17g"); non-finite values print as nan/inf/-inf.
std::string format_double(double v);

/// RFC-4180 field: quoted when it holds a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  /// CRLF-terminated records.
  void write(std::ostream& out) const;
  void write_file(const std::string& path) const;
};

/// t, x0..x{n-1}
CsvTable path_table(const Path& path);
/// t, det, J_00, J_01, ... (row-major)
CsvTable jacobian_table(const JacobianState& j);
/// t, increment, cumulative, value (node 0 has empty increment fields)
CsvTable series_table(const IncrementSeries& s);
/// step, t, mark, pre..., post...
CsvTable events_table(const Path& path);

}  // namespace jumpsde
