#include "twinface/encoding.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "twinface/error.hpp"
#include "twinface/key_io.hpp"

namespace twinface {

BigInt encode_signed(const BigInt& x, const BigInt& n, std::size_t bound_bits) {
  BigInt bound = pow2(bound_bits);
  if (abs(x) > bound) throw DomainError("encode_signed: |x| exceeds 2^" + std::to_string(bound_bits));
  if (2 * bound >= n) throw DomainError("encode_signed: modulus too small for the bound");
  return sgn(x) >= 0 ? x : n + x;
}

BigInt encode_signed(std::int64_t x, const BigInt& n, std::size_t bound_bits) {
  BigInt v;
  mpz_set_si(v.get_mpz_t(), x);
  return encode_signed(v, n, bound_bits);
}

BigInt centered(const BigInt& m, const BigInt& n) { return m <= n / 2 ? m : m - n; }

BigInt decode_signed(const BigInt& m, const BigInt& n, std::size_t bound_bits) {
  if (sgn(m) < 0 || m >= n) throw RangeError("decode_signed: residue outside [0, N)");
  BigInt bound = pow2(bound_bits);
  if (m > bound && m < n - bound) {
    throw RangeError("decode_signed: residue outside the signed range +-2^" +
                     std::to_string(bound_bits));
  }
  return centered(m, n);
}

std::int64_t decode_signed_i64(const BigInt& m, const BigInt& n, std::size_t bound_bits) {
  BigInt v = decode_signed(m, n, bound_bits);
  if (!mpz_fits_slong_p(v.get_mpz_t())) throw RangeError("decode_signed: value exceeds 64 bits");
  return mpz_get_si(v.get_mpz_t());
}

std::int64_t quantize(double f, const QuantizationSpec& spec) {
  if (!(f >= 0.0 && f <= 1.0)) throw DomainError("quantize: feature value outside [0, 1]");
  return static_cast<std::int64_t>(std::round(f * static_cast<double>(spec.scale)));
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_value(const std::string& field, std::size_t line_no) {
  double v = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    throw FormatError("csv line " + std::to_string(line_no) + ": bad number '" + field + "'");
  }
  if (!(v >= 0.0 && v <= 1.0)) {
    throw FormatError("csv line " + std::to_string(line_no) + ": value " + field +
                      " outside [0, 1]");
  }
  return v;
}

}  // namespace

FeatureTable parse_feature_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("csv: empty input");
  auto head = split_commas(line);
  if (head.size() < 2 || head[0] != "id") throw FormatError("csv: header must be id,v1,...,vn");
  for (std::size_t j = 1; j < head.size(); ++j) {
    if (head[j] != "v" + std::to_string(j)) {
      throw FormatError("csv: header column " + std::to_string(j) + " should be v" +
                        std::to_string(j));
    }
  }
  std::size_t dim = head.size() - 1;

  FeatureTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_commas(line);
    if (fields.size() != dim + 1) {
      throw FormatError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim + 1) + " fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw FormatError("csv line " + std::to_string(line_no) + ": empty id");
    std::vector<double> row;
    row.reserve(dim);
    for (std::size_t j = 1; j <= dim; ++j) row.push_back(parse_value(fields[j], line_no));
    table.ids.push_back(fields[0]);
    table.values.push_back(std::move(row));
  }
  if (table.ids.empty()) throw FormatError("csv: no data rows");
  return table;
}

FeatureTable load_feature_csv(const std::filesystem::path& path) {
  return parse_feature_csv(read_text_file(path));
}

std::string format_feature_csv(const FeatureTable& table) {
  std::ostringstream out;
  out << "id";
  for (std::size_t j = 1; j <= table.dimension(); ++j) out << ",v" << j;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    out << table.ids[i];
    for (double v : table.values[i]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

}  // namespace twinface
