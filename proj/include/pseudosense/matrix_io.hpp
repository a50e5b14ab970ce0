#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pseudosense/diff_matrix.hpp"

namespace pseudosense {

/// Binary matrix dump.
///
/// Layout, all integers little-endian:
///   u64 rows, u64 cols
///   rows*cols IEEE-754 binary64 values, column-major
///   u64 label_count (0 or cols)
///   per label: u32 byte_length, word bytes, i64 sense_a, i64 sense_b
struct MatrixDump {
  Eigen::MatrixXd data;
  std::vector<PairLabel> labels;
};

void write_matrix_dump(const std::filesystem::path& path, const Eigen::MatrixXd& data,
                       std::span<const PairLabel> labels = {});
MatrixDump read_matrix_dump(const std::filesystem::path& path);

void write_diff_matrix(const std::filesystem::path& path, const DiffMatrix& m);
DiffMatrix read_diff_matrix(const std::filesystem::path& path);

}  // namespace pseudosense
