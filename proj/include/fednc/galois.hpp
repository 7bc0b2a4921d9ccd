#pragma once

// Exact arithmetic in GF(2^s) for s in {1, 2, 4, 8, 16}. Addition is XOR;
// multiplication reduces carry-less products modulo an irreducible
// polynomial. All coding operations sit on top of this field.

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace fednc::gf {

using Symbol = std::uint16_t;

struct ZeroInverseError : std::domain_error {
  ZeroInverseError() : std::domain_error("inverse of zero is undefined") {}
};

struct PaddingRequiredError : std::invalid_argument {
  PaddingRequiredError()
      : std::invalid_argument(
            "odd payload length requires padding at s=16") {}
};

// Field parameters. reduction_poly carries the leading term, so the AES
// polynomial x^8+x^4+x^3+x+1 is encoded as 0x11B.
struct FieldSpec {
  unsigned width = 8;
  std::uint32_t reduction_poly = 0x11B;

  static FieldSpec with_width(unsigned s);
  bool operator==(const FieldSpec&) const = default;
};

class Field {
 public:
  explicit Field(FieldSpec spec);

  // Shared instance with the default polynomial for this width.
  static const Field& of(unsigned width);

  unsigned width() const { return spec_.width; }
  std::uint32_t reduction_poly() const { return spec_.reduction_poly; }
  std::uint32_t order() const { return 1u << spec_.width; }
  const FieldSpec& spec() const { return spec_; }

  Symbol add(Symbol a, Symbol b) const { return a ^ b; }

  Symbol mul(Symbol a, Symbol b) const {
    switch (strategy_) {
      case Strategy::kAnd:
        return a & b;
      case Strategy::kFullTable:
        return mul_table_[(std::uint32_t(a) << 8) | b];
      case Strategy::kLogTable: {
        if (a == 0 || b == 0) return 0;
        const unsigned n = order() - 1;
        unsigned e = log_[a] + log_[b];
        if (e >= n) e -= n;
        return exp_[e];
      }
      case Strategy::kShiftReduce:
      default:
        return mul_shift_reduce(a, b);
    }
  }

  Symbol inv(Symbol a) const;

  // Payload bytes -> symbols. Sub-byte symbols are sliced MSB-first; s=8 is
  // one byte per symbol; s=16 takes little-endian byte pairs. Odd-length
  // payloads at s=16 throw unless auto_pad appends a zero byte.
  std::vector<Symbol> symbols_from_bytes(std::span<const std::uint8_t> bytes,
                                         bool auto_pad = false) const;

  // Inverse mapping. Trailing bits of a final partial byte are zero-filled,
  // which makes this the packing function for coefficient blocks too.
  std::vector<std::uint8_t> bytes_from_symbols(
      std::span<const Symbol> symbols) const;

  // Reads exactly `count` symbols from a packed block of packed_size(count)
  // bytes produced by bytes_from_symbols.
  std::vector<Symbol> unpack_symbols(std::span<const std::uint8_t> bytes,
                                     std::size_t count) const;

  // ceil(count * s / 8)
  std::size_t packed_size(std::size_t count) const {
    return (count * spec_.width + 7) / 8;
  }

 private:
  enum class Strategy { kAnd, kLogTable, kFullTable, kShiftReduce };

  Symbol mul_shift_reduce(Symbol a, Symbol b) const;
  Symbol pow(Symbol base, std::uint32_t e) const;
  void build_tables();

  FieldSpec spec_;
  Strategy strategy_;
  std::vector<Symbol> exp_;
  std::vector<Symbol> log_;
  std::vector<Symbol> inv_;
  std::vector<std::uint8_t> mul_table_;
};

// Degree of a nonzero GF(2) polynomial given as an integer bit pattern.
int poly_degree(std::uint64_t p);

// Exhaustive trial division; intended for degrees up to 16.
bool poly_irreducible(std::uint32_t poly, unsigned degree);

}  // namespace fednc::gf
