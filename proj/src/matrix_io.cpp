#include "pseudosense/matrix_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "pseudosense/errors.hpp"

namespace pseudosense {

namespace {

template <typename T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return value;
  }
}

template <typename T>
void put(std::ostream& out, T value) {
  value = to_little_endian(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw FormatError("truncated matrix dump '" + path.string() + "'");
  }
  return to_little_endian(value);
}

}  // namespace

void write_matrix_dump(const std::filesystem::path& path, const Eigen::MatrixXd& data,
                       std::span<const PairLabel> labels) {
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(data.cols())) {
    throw InvalidArgument("label count does not match column count");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");

  put<std::uint64_t>(out, static_cast<std::uint64_t>(data.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(data.cols()));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  } else {
    for (Eigen::Index i = 0; i < data.size(); ++i) put<double>(out, data.data()[i]);
  }
  put<std::uint64_t>(out, labels.size());
  for (const auto& label : labels) {
    if (label.word.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw InvalidArgument("label too long");
    }
    put<std::uint32_t>(out, static_cast<std::uint32_t>(label.word.size()));
    out.write(label.word.data(), static_cast<std::streamsize>(label.word.size()));
    put<std::int64_t>(out, label.sense_a);
    put<std::int64_t>(out, label.sense_b);
  }
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

MatrixDump read_matrix_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  const auto rows = get<std::uint64_t>(in, path);
  const auto cols = get<std::uint64_t>(in, path);
  if (cols != 0 && rows > std::numeric_limits<std::uint64_t>::max() / sizeof(double) / cols) {
    throw FormatError("implausible matrix shape in '" + path.string() + "'");
  }
  MatrixDump dump;
  dump.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < dump.data.size(); ++i) dump.data.data()[i] = get<double>(in, path);

  const auto count = get<std::uint64_t>(in, path);
  if (count != 0 && count != cols) {
    throw FormatError("label table size mismatch in '" + path.string() + "'");
  }
  dump.labels.reserve(count);
  for (std::uint64_t j = 0; j < count; ++j) {
    const auto len = get<std::uint32_t>(in, path);
    std::string word(len, '\0');
    if (!in.read(word.data(), len)) throw FormatError("truncated label table in '" + path.string() + "'");
    const auto a = get<std::int64_t>(in, path);
    const auto b = get<std::int64_t>(in, path);
    dump.labels.push_back({std::move(word), a, b});
  }
  return dump;
}

void write_diff_matrix(const std::filesystem::path& path, const DiffMatrix& m) {
  write_matrix_dump(path, m.data, m.labels);
}

DiffMatrix read_diff_matrix(const std::filesystem::path& path) {
  auto dump = read_matrix_dump(path);
  if (dump.labels.size() != static_cast<std::size_t>(dump.data.cols())) {
    throw FormatError("'" + path.string() + "' has no label table; not a difference matrix");
  }
  DiffMatrix m;
  m.source_dimension = static_cast<std::size_t>(dump.data.rows());
  m.data = std::move(dump.data);
  m.labels = std::move(dump.labels);
  return m;
}

}  // namespace pseudosense
