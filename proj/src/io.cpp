#include "medix/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "MDXG binary format assumes a little-endian host");

namespace medix {

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return f;
}

double parse_double(const std::string& s, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw std::runtime_error("malformed number '" + s + "' in " + path);
  return v;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
  auto f = open_in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) throw std::runtime_error("empty file: " + path);
  return rows;
}

void write_matrix_csv(const Matrix& g, const std::string& path) {
  auto f = open_out(path);
  for (std::size_t j = 0; j < g.cols; ++j) f << (j ? ",g" : "g") << j;
  f << '\n';
  for (std::size_t i = 0; i < g.rows; ++i) {
    for (std::size_t j = 0; j < g.cols; ++j) {
      if (j) f << ',';
      f << format_double(g(i, j));
    }
    f << '\n';
  }
}

Matrix read_matrix_csv(const std::string& path) {
  const auto rows = read_csv_rows(path);
  const std::size_t d = rows[0].size();
  Matrix g(rows.size() - 1, d);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw std::runtime_error("ragged CSV row in " + path);
    for (std::size_t j = 0; j < d; ++j) g(i - 1, j) = parse_double(rows[i][j], path);
  }
  return g;
}

void write_matrix_binary(const Matrix& g, const std::string& path) {
  auto f = open_out(path, true);
  const std::uint32_t m = static_cast<std::uint32_t>(g.rows);
  const std::uint32_t d = static_cast<std::uint32_t>(g.cols);
  f.write("MDXG", 4);
  f.write(reinterpret_cast<const char*>(&m), 4);
  f.write(reinterpret_cast<const char*>(&d), 4);
  f.write(reinterpret_cast<const char*>(g.values.data()),
          static_cast<std::streamsize>(g.values.size() * sizeof(double)));
}

Matrix read_matrix_binary(const std::string& path) {
  auto f = open_in(path, true);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::string(magic, 4) != "MDXG")
    throw std::runtime_error("bad magic, not an MDXG file: " + path);
  std::uint32_t m = 0, d = 0;
  f.read(reinterpret_cast<char*>(&m), 4);
  f.read(reinterpret_cast<char*>(&d), 4);
  if (!f) throw std::runtime_error("truncated MDXG header: " + path);
  Matrix g(m, d);
  f.read(reinterpret_cast<char*>(g.values.data()),
         static_cast<std::streamsize>(g.values.size() * sizeof(double)));
  if (!f) throw std::runtime_error("truncated MDXG payload: " + path);
  return g;
}

Matrix read_matrix_any(const std::string& path) {
  return ends_with(path, ".csv") ? read_matrix_csv(path) : read_matrix_binary(path);
}

void write_matrix_any(const Matrix& g, const std::string& path) {
  if (ends_with(path, ".csv"))
    write_matrix_csv(g, path);
  else
    write_matrix_binary(g, path);
}

void validate_dataset(const LabeledDataset& data) {
  const std::size_t n = data.features.rows;
  if (data.num_classes < 2) throw std::invalid_argument("dataset needs at least 2 classes");
  if (n < static_cast<std::size_t>(data.num_classes))
    throw std::invalid_argument("dataset smaller than class count");
  if (data.labels.size() != n) throw std::invalid_argument("labels/features size mismatch");
  for (int y : data.labels)
    if (y < 0 || y >= data.num_classes) throw std::invalid_argument("label out of range");
  for (double v : data.features.values)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature");
}

void write_dataset_csv(const LabeledDataset& data, const std::string& path) {
  auto f = open_out(path);
  f << "label";
  for (std::size_t j = 0; j < data.features.cols; ++j) f << ",f" << j;
  f << '\n';
  for (std::size_t i = 0; i < data.features.rows; ++i) {
    f << data.labels[i];
    for (std::size_t j = 0; j < data.features.cols; ++j)
      f << ',' << format_double(data.features(i, j));
    f << '\n';
  }
}

LabeledDataset read_dataset_csv(const std::string& path) {
  const auto rows = read_csv_rows(path);
  if (rows[0].empty() || rows[0][0] != "label")
    throw std::runtime_error("expected 'label' column first in " + path);
  const std::size_t p = rows[0].size() - 1;
  LabeledDataset data;
  data.features = Matrix(rows.size() - 1, p);
  data.labels.resize(rows.size() - 1);
  int max_label = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != p + 1) throw std::runtime_error("ragged CSV row in " + path);
    data.labels[i - 1] = static_cast<int>(parse_double(rows[i][0], path));
    max_label = std::max(max_label, data.labels[i - 1]);
    for (std::size_t j = 0; j < p; ++j)
      data.features(i - 1, j) = parse_double(rows[i][j + 1], path);
  }
  data.num_classes = max_label + 1;
  return data;
}

void write_wild_csv(const WildSet& wild, const std::string& path) {
  auto f = open_out(path);
  const bool with_pseudo = !wild.pseudo_labels.empty();
  f << "__origin";
  if (with_pseudo) f << ",pseudo_label";
  for (std::size_t j = 0; j < wild.features.cols; ++j) f << ",f" << j;
  f << '\n';
  for (std::size_t i = 0; i < wild.features.rows; ++i) {
    f << (wild.origin[i] == Origin::ood ? "ood" : "ind");
    if (with_pseudo) f << ',' << wild.pseudo_labels[i];
    for (std::size_t j = 0; j < wild.features.cols; ++j)
      f << ',' << format_double(wild.features(i, j));
    f << '\n';
  }
}

WildSet read_wild_csv(const std::string& path) {
  const auto rows = read_csv_rows(path);
  if (rows[0].empty() || rows[0][0] != "__origin")
    throw std::runtime_error("expected '__origin' column first in " + path);
  const bool with_pseudo = rows[0].size() > 1 && rows[0][1] == "pseudo_label";
  const std::size_t skip = with_pseudo ? 2 : 1;
  const std::size_t p = rows[0].size() - skip;
  WildSet wild;
  wild.features = Matrix(rows.size() - 1, p);
  wild.origin.resize(rows.size() - 1);
  if (with_pseudo) wild.pseudo_labels.resize(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != p + skip) throw std::runtime_error("ragged CSV row in " + path);
    if (rows[i][0] == "ind")
      wild.origin[i - 1] = Origin::ind;
    else if (rows[i][0] == "ood")
      wild.origin[i - 1] = Origin::ood;
    else
      throw std::runtime_error("unknown origin tag '" + rows[i][0] + "' in " + path);
    if (with_pseudo)
      wild.pseudo_labels[i - 1] = static_cast<int>(parse_double(rows[i][1], path));
    for (std::size_t j = 0; j < p; ++j)
      wild.features(i - 1, j) = parse_double(rows[i][j + skip], path);
  }
  return wild;
}

std::vector<double> read_scores(const std::string& path) {
  auto f = open_in(path);
  std::vector<double> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    out.push_back(parse_double(split_csv_line(line)[0], path));
  }
  return out;
}

void write_scores(const std::vector<double>& scores, const std::string& path) {
  auto f = open_out(path);
  for (double s : scores) f << format_double(s) << '\n';
}

}  // namespace medix
