#pragma once
// File formats: gradient matrices (CSV and MDXG binary), dataset CSVs, score
// lists, and the shared double formatting used by every emitter.
//
// Matrix CSV: header `g0,g1,...`, one row per sample.
// MDXG binary: magic "MDXG", u32 m, u32 d, then m*d little-endian f64 row-major.
// Labeled dataset CSV: header `label,f0,f1,...`.
// Wild set CSV: header `__origin[,pseudo_label],f0,...` with origin ind|ood.

#include <optional>
#include <string>
#include <vector>

#include "medix/dataset.hpp"
#include "medix/matrix.hpp"

namespace medix {

// Shortest round-trip-exact decimal form of v.
std::string format_double(double v);

void write_matrix_csv(const Matrix& g, const std::string& path);
Matrix read_matrix_csv(const std::string& path);

void write_matrix_binary(const Matrix& g, const std::string& path);
Matrix read_matrix_binary(const std::string& path);

// Dispatch on extension: .csv text, anything else MDXG binary.
Matrix read_matrix_any(const std::string& path);
void write_matrix_any(const Matrix& g, const std::string& path);

void write_dataset_csv(const LabeledDataset& data, const std::string& path);
LabeledDataset read_dataset_csv(const std::string& path);

void write_wild_csv(const WildSet& wild, const std::string& path);
WildSet read_wild_csv(const std::string& path);

// One score per line; blank lines ignored.
std::vector<double> read_scores(const std::string& path);
void write_scores(const std::vector<double>& scores, const std::string& path);

// Internal helpers shared by the CSV emitters/parsers.
std::vector<std::string> split_csv_line(const std::string& line);
std::vector<std::vector<std::string>> read_csv_rows(const std::string& path);

}  // namespace medix
