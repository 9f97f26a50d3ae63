#include "jumpsde/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "jumpsde/errors.hpp"

namespace jumpsde {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw InvalidArgument("csv row width does not match header");
  rows.push_back(std::move(row));
}

namespace {

void write_record(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << csv_field(fields[i]);
  }
  out << "\r\n";
}

}  // namespace

void CsvTable::write(std::ostream& out) const {
  write_record(out, header);
  for (const auto& r : rows) write_record(out, r);
}

void CsvTable::write_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  write(f);
  if (!f) throw Error("failed writing '" + path + "'");
}

CsvTable path_table(const Path& path) {
  CsvTable t;
  t.header.push_back("t");
  const auto n = path.states.empty() ? 0 : path.states.front().size();
  for (Eigen::Index i = 0; i < n; ++i) t.header.push_back("x" + std::to_string(i));
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    std::vector<std::string> row{format_double(path.grid.time(k))};
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(format_double(path.states[k][i]));
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable jacobian_table(const JacobianState& j) {
  CsvTable t;
  t.header = {"t", "det"};
  const auto n = j.matrices.empty() ? 0 : j.matrices.front().rows();
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) t.header.push_back("J" + std::to_string(r) + std::to_string(c));
  }
  for (std::size_t k = 0; k < j.matrices.size(); ++k) {
    std::vector<std::string> row{format_double(j.grid.time(k)), format_double(j.dets[k])};
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) row.push_back(format_double(j.matrices[k](r, c)));
    }
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable series_table(const IncrementSeries& s) {
  CsvTable t;
  t.header = {"t", "increment", "cumulative", "value"};
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    if (k == 0) {
      t.add_row({format_double(s.grid.time(0)), "", "", format_double(s.values[0])});
    } else {
      t.add_row({format_double(s.grid.time(k)), format_double(s.increments[k - 1]), format_double(s.cumulative[k - 1]),
                 format_double(s.values[k])});
    }
  }
  return t;
}

CsvTable events_table(const Path& path) {
  CsvTable t;
  t.header = {"step", "t", "mark"};
  const auto n = path.states.empty() ? 0 : path.states.front().size();
  for (Eigen::Index i = 0; i < n; ++i) t.header.push_back("pre" + std::to_string(i));
  for (Eigen::Index i = 0; i < n; ++i) t.header.push_back("post" + std::to_string(i));
  for (const auto& e : path.applied_events) {
    std::vector<std::string> row{std::to_string(e.step), format_double(e.time), std::to_string(e.mark_index)};
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(format_double(e.pre[i]));
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(format_double(e.post[i]));
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace jumpsde
