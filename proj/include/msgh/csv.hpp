#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace msgh {

/// Numeric table read from a CSV file. Rows with missing or non-numeric
/// entries in the selected columns are dropped and counted.
struct Dataset {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // N x M
    std::string source;
    std::size_t dropped_rows = 0;
};

/// Comma-separated, '.' decimal point, optional header row. With a header,
/// `cols` selects columns by name; without one, columns are named
/// c0, c1, ... and `cols` may use those names. Empty `cols` keeps every
/// column. Throws std::runtime_error on unreadable files or unknown
/// column names.
Dataset read_csv(const std::string& path,
                 const std::vector<std::string>& cols = {},
                 bool header = true);

/// Writes header + rows atomically (temp file + rename).
void write_csv(const std::string& path,
               const std::vector<std::string>& columns,
               const Eigen::MatrixXd& values);

/// Atomic whole-file write helper shared by the CSV and model writers.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace msgh
