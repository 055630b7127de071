#include "cohaudit/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cohaudit {

namespace {

constexpr std::array<char, 4> kMagic{'C', 'A', 'M', 'X'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xffu));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int b = bytes - 1; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

std::string read_all(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw ParseError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double parse_double(std::string_view token, const std::filesystem::path& path) {
  double v = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("'" + path.string() + "': bad number '" + std::string(token) + "'");
  }
  if (!std::isfinite(v)) throw ParseError("'" + path.string() + "': non-finite entry");
  return v;
}

std::vector<std::string_view> split_tokens(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (i < text.size()) {
    while (i < text.size() && is_sep(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_sep(text[j])) ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

MeasurementMatrix load_csv(const std::filesystem::path& path) {
  const std::string text = read_all(path, std::ios::in);
  const auto eol = text.find('\n');
  const std::string_view header = std::string_view(text).substr(0, eol);
  const auto dims = split_tokens(header);
  if (dims.size() != 2) throw ParseError("'" + path.string() + "': header must be 'rows,cols'");
  Index dim[2];
  for (int d = 0; d < 2; ++d) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(dims[d].data(), dims[d].data() + dims[d].size(), v);
    if (ec != std::errc() || ptr != dims[d].data() + dims[d].size() || v < 1) {
      throw ParseError("'" + path.string() + "': bad dimension '" + std::string(dims[d]) + "'");
    }
    dim[d] = static_cast<Index>(v);
  }
  const std::string_view body =
      eol == std::string::npos ? std::string_view{} : std::string_view(text).substr(eol + 1);
  const auto tokens = split_tokens(body);
  if (static_cast<Index>(tokens.size()) != dim[0] * dim[1]) {
    throw ParseError("'" + path.string() + "': header says " + std::to_string(dim[0]) + "x" +
                     std::to_string(dim[1]) + " but payload has " +
                     std::to_string(tokens.size()) + " values");
  }
  MatrixXd m(dim[0], dim[1]);
  std::size_t t = 0;
  for (Index i = 0; i < dim[0]; ++i)
    for (Index j = 0; j < dim[1]; ++j) m(i, j) = parse_double(tokens[t++], path);
  return MeasurementMatrix(std::move(m));
}

MeasurementMatrix load_binary(const std::filesystem::path& path) {
  const std::string raw = read_all(path, std::ios::in | std::ios::binary);
  const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
  if (raw.size() < 12 || std::memcmp(raw.data(), kMagic.data(), 4) != 0) {
    throw ParseError("'" + path.string() + "': missing CAMX header");
  }
  const auto rows = static_cast<Index>(get_le(bytes + 4, 4));
  const auto cols = static_cast<Index>(get_le(bytes + 8, 4));
  if (rows < 1 || cols < 1) throw ParseError("'" + path.string() + "': zero dimension");
  const auto expected = 12 + static_cast<std::size_t>(rows * cols) * 8;
  if (raw.size() != expected) {
    throw ParseError("'" + path.string() + "': payload size does not match header dimensions");
  }
  MatrixXd m(rows, cols);
  const unsigned char* p = bytes + 12;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j, p += 8) {
      const double v = std::bit_cast<double>(get_le(p, 8));
      if (!std::isfinite(v)) throw ParseError("'" + path.string() + "': non-finite entry");
      m(i, j) = v;
    }
  }
  return MeasurementMatrix(std::move(m));
}

}  // namespace

MatrixFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? MatrixFormat::csv : MatrixFormat::binary;
}

MeasurementMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  return format == MatrixFormat::csv ? load_csv(path) : load_binary(path);
}

void save_matrix(const MeasurementMatrix& m, const std::filesystem::path& path,
                 MatrixFormat format) {
  if (m.cols() < 1) throw DimensionError("cannot save a matrix with zero columns");
  const auto mode = format == MatrixFormat::csv ? std::ios::out : std::ios::out | std::ios::binary;
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
  const MatrixXd& d = m.data();
  if (format == MatrixFormat::csv) {
    out << d.rows() << ',' << d.cols() << '\n';
    char buf[32];
    for (Index i = 0; i < d.rows(); ++i) {
      for (Index j = 0; j < d.cols(); ++j) {
        // Shortest representation that round-trips exactly.
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d(i, j));
        if (j) out << ',';
        out.write(buf, ptr - buf);
      }
      out << '\n';
    }
  } else {
    out.write(kMagic.data(), 4);
    put_u32(out, static_cast<std::uint32_t>(d.rows()));
    put_u32(out, static_cast<std::uint32_t>(d.cols()));
    for (Index i = 0; i < d.rows(); ++i)
      for (Index j = 0; j < d.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(d(i, j)));
  }
  if (!out) throw ParseError("write to '" + path.string() + "' failed");
}

}  // namespace cohaudit
