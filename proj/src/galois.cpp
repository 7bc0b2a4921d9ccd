#include "fednc/galois.hpp"

#include <map>
#include <mutex>

namespace fednc::gf {

namespace {

constexpr std::uint32_t default_poly(unsigned width) {
  switch (width) {
    case 1:
      return 0x3;  // x + 1
    case 2:
      return 0x7;  // x^2 + x + 1
    case 4:
      return 0x13;  // x^4 + x + 1
    case 8:
      return 0x11B;  // x^8 + x^4 + x^3 + x + 1
    case 16:
      return 0x1100B;  // x^16 + x^12 + x^3 + x + 1
    default:
      return 0;
  }
}

bool valid_width(unsigned s) {
  return s == 1 || s == 2 || s == 4 || s == 8 || s == 16;
}

}  // namespace

int poly_degree(std::uint64_t p) {
  int d = -1;
  while (p) {
    ++d;
    p >>= 1;
  }
  return d;
}

bool poly_irreducible(std::uint32_t poly, unsigned degree) {
  if (poly_degree(poly) != static_cast<int>(degree)) return false;
  if (degree == 1) return true;
  // Divisibility by any polynomial of degree 1..degree/2 disqualifies.
  // Composite trial divisors are redundant but harmless.
  for (std::uint32_t div = 2; poly_degree(div) <= static_cast<int>(degree / 2);
       ++div) {
    std::uint64_t rem = poly;
    const int dd = poly_degree(div);
    for (int d = poly_degree(rem); d >= dd; --d) {
      if ((rem >> d) & 1) rem ^= std::uint64_t(div) << (d - dd);
    }
    if (rem == 0) return false;
  }
  return true;
}

FieldSpec FieldSpec::with_width(unsigned s) {
  if (!valid_width(s)) {
    throw std::invalid_argument("field width must be one of 1, 2, 4, 8, 16");
  }
  return FieldSpec{s, default_poly(s)};
}

Field::Field(FieldSpec spec) : spec_(spec) {
  if (!valid_width(spec_.width)) {
    throw std::invalid_argument("field width must be one of 1, 2, 4, 8, 16");
  }
  if (!poly_irreducible(spec_.reduction_poly, spec_.width)) {
    throw std::invalid_argument(
        "reduction polynomial is not irreducible of the required degree");
  }
  if (spec_.width == 1) {
    strategy_ = Strategy::kAnd;
  } else if (spec_.width == 8) {
    strategy_ = Strategy::kFullTable;
  } else if (spec_.width == 16) {
    strategy_ = Strategy::kShiftReduce;
  } else {
    strategy_ = Strategy::kLogTable;
  }
  build_tables();
}

const Field& Field::of(unsigned width) {
  static std::mutex mu;
  static std::map<unsigned, std::unique_ptr<Field>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(width);
  if (it == cache.end()) {
    it = cache
             .emplace(width,
                      std::make_unique<Field>(FieldSpec::with_width(width)))
             .first;
  }
  return *it->second;
}

Symbol Field::mul_shift_reduce(Symbol a, Symbol b) const {
  std::uint32_t acc = 0;
  std::uint32_t aa = a;
  const std::uint32_t high = 1u << spec_.width;
  for (std::uint32_t bb = b; bb; bb >>= 1) {
    if (bb & 1) acc ^= aa;
    aa <<= 1;
    if (aa & high) aa ^= spec_.reduction_poly;
  }
  return static_cast<Symbol>(acc);
}

Symbol Field::pow(Symbol base, std::uint32_t e) const {
  Symbol result = 1;
  Symbol acc = base;
  for (; e; e >>= 1) {
    if (e & 1) result = mul_shift_reduce(result, acc);
    acc = mul_shift_reduce(acc, acc);
  }
  return result;
}

void Field::build_tables() {
  const std::uint32_t q = order();
  if (spec_.width == 1 || spec_.width == 16) return;

  // Log/antilog tables from the smallest primitive element.
  exp_.assign(q - 1, 0);
  log_.assign(q, 0);
  for (std::uint32_t g = 2; g < q; ++g) {
    std::vector<bool> seen(q, false);
    Symbol x = 1;
    bool primitive = true;
    for (std::uint32_t i = 0; i < q - 1; ++i) {
      if (seen[x]) {
        primitive = false;
        break;
      }
      seen[x] = true;
      exp_[i] = x;
      log_[x] = static_cast<Symbol>(i);
      x = mul_shift_reduce(x, static_cast<Symbol>(g));
    }
    if (primitive && x == 1) break;
  }

  inv_.assign(q, 0);
  for (std::uint32_t a = 1; a < q; ++a) {
    inv_[a] = exp_[(q - 1 - log_[a]) % (q - 1)];
  }

  if (spec_.width == 8) {
    mul_table_.assign(q * q, 0);
    for (std::uint32_t a = 0; a < q; ++a) {
      for (std::uint32_t b = 0; b < q; ++b) {
        mul_table_[(a << 8) | b] = static_cast<std::uint8_t>(
            mul_shift_reduce(static_cast<Symbol>(a), static_cast<Symbol>(b)));
      }
    }
  }
}

Symbol Field::inv(Symbol a) const {
  if (a == 0) throw ZeroInverseError();
  switch (strategy_) {
    case Strategy::kAnd:
      return 1;
    case Strategy::kFullTable:
    case Strategy::kLogTable:
      return inv_[a];
    case Strategy::kShiftReduce:
    default:
      return pow(a, order() - 2);  // Fermat: a^(q-2)
  }
}

std::vector<Symbol> Field::symbols_from_bytes(
    std::span<const std::uint8_t> bytes, bool auto_pad) const {
  const unsigned s = spec_.width;
  std::vector<Symbol> out;
  if (s == 16) {
    if (bytes.size() % 2 != 0 && !auto_pad) throw PaddingRequiredError();
    out.reserve((bytes.size() + 1) / 2);
    for (std::size_t i = 0; i < bytes.size(); i += 2) {
      const std::uint16_t lo = bytes[i];
      const std::uint16_t hi = (i + 1 < bytes.size()) ? bytes[i + 1] : 0;
      out.push_back(static_cast<Symbol>(lo | (hi << 8)));
    }
    return out;
  }
  if (s == 8) {
    out.assign(bytes.begin(), bytes.end());
    return out;
  }
  const unsigned per_byte = 8 / s;
  const Symbol mask = static_cast<Symbol>((1u << s) - 1);
  out.reserve(bytes.size() * per_byte);
  for (std::uint8_t b : bytes) {
    for (unsigned j = 0; j < per_byte; ++j) {
      out.push_back(static_cast<Symbol>((b >> (8 - (j + 1) * s)) & mask));
    }
  }
  return out;
}

std::vector<std::uint8_t> Field::bytes_from_symbols(
    std::span<const Symbol> symbols) const {
  const unsigned s = spec_.width;
  std::vector<std::uint8_t> out;
  if (s == 16) {
    out.reserve(symbols.size() * 2);
    for (Symbol v : symbols) {
      out.push_back(static_cast<std::uint8_t>(v & 0xFF));
      out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    return out;
  }
  if (s == 8) {
    out.reserve(symbols.size());
    for (Symbol v : symbols) out.push_back(static_cast<std::uint8_t>(v));
    return out;
  }
  const unsigned per_byte = 8 / s;
  out.assign(packed_size(symbols.size()), 0);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const std::size_t byte = i / per_byte;
    const unsigned slot = static_cast<unsigned>(i % per_byte);
    out[byte] |= static_cast<std::uint8_t>(symbols[i] << (8 - (slot + 1) * s));
  }
  return out;
}

std::vector<Symbol> Field::unpack_symbols(std::span<const std::uint8_t> bytes,
                                          std::size_t count) const {
  if (bytes.size() != packed_size(count)) {
    throw std::invalid_argument("packed block has the wrong size");
  }
  std::vector<Symbol> all = symbols_from_bytes(bytes, /*auto_pad=*/true);
  all.resize(count);
  return all;
}

}  // namespace fednc::gf
