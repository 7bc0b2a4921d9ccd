#include "fednc/codec.hpp"

#include <algorithm>
#include <cstring>

namespace fednc::codec {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

constexpr char kMagic[4] = {'F', 'N', 'C', '1'};
constexpr std::size_t kHeaderSize = 19;

}  // namespace

CodingVector random_coding_vector(std::size_t k, const gf::Field& field,
                                  Rng& rng) {
  CodingVector v;
  v.coefficients.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    v.coefficients.push_back(
        static_cast<gf::Symbol>(rng.next_bits(field.width())));
  }
  return v;
}

CodedPacket encode(std::span<const Packet> packets, const CodingVector& vector,
                   const gf::Field& field) {
  if (packets.empty()) {
    throw VectorMismatchError("cannot encode an empty generation");
  }
  if (vector.size() != packets.size()) {
    throw VectorMismatchError("coding vector length " +
                              std::to_string(vector.size()) +
                              " does not match generation size " +
                              std::to_string(packets.size()));
  }
  const std::size_t len = packets.front().payload.size();
  const std::uint32_t generation = packets.front().generation;
  for (const Packet& p : packets) {
    if (p.payload.size() != len) {
      throw LengthMismatchError("packets in one generation must share length");
    }
    if (p.generation != generation) {
      throw GenerationMismatchError(
          "packets in one generation must share the round index");
    }
  }

  std::vector<std::vector<gf::Symbol>> rows;
  rows.reserve(packets.size());
  for (const Packet& p : packets) {
    rows.push_back(field.symbols_from_bytes(p.payload, /*auto_pad=*/true));
  }

  const std::size_t m = rows.front().size();
  std::vector<gf::Symbol> acc(m, 0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const gf::Symbol alpha = vector.coefficients[k];
    if (alpha == 0) continue;
    const auto& row = rows[k];
    for (std::size_t i = 0; i < m; ++i) {
      acc[i] = field.add(acc[i], field.mul(alpha, row[i]));
    }
  }

  CodedPacket out;
  out.vector = vector;
  out.payload = field.bytes_from_symbols(acc);
  out.generation = generation;
  out.spec = field.spec();
  out.original_len = static_cast<std::uint32_t>(len);
  return out;
}

DecoderState::DecoderState(std::size_t k, const gf::Field& field,
                           std::uint32_t generation)
    : field_(&field), k_(k), generation_(generation), pivot_row_(k, -1) {
  if (k == 0) throw std::invalid_argument("generation size must be positive");
}

AbsorbOutcome DecoderState::absorb(const CodedPacket& packet) {
  if (packet.generation != generation_) {
    throw GenerationMismatchError("coded packet belongs to generation " +
                                  std::to_string(packet.generation) +
                                  ", decoder expects " +
                                  std::to_string(generation_));
  }
  if (packet.vector.size() != k_) {
    throw VectorMismatchError("coding vector length does not match decoder");
  }
  std::vector<gf::Symbol> payload =
      field_->symbols_from_bytes(packet.payload, /*auto_pad=*/false);
  if (payload_symbols_) {
    if (payload.size() != *payload_symbols_ ||
        packet.original_len != *original_len_) {
      throw LengthMismatchError("coded packet payload length changed");
    }
  } else {
    payload_symbols_ = payload.size();
    original_len_ = packet.original_len;
  }
  return reduce_and_store(packet.vector.coefficients, std::move(payload));
}

AbsorbOutcome DecoderState::absorb_vector(const CodingVector& vector) {
  if (vector.size() != k_) {
    throw VectorMismatchError("coding vector length does not match decoder");
  }
  return reduce_and_store(vector.coefficients, {});
}

AbsorbOutcome DecoderState::reduce_and_store(std::vector<gf::Symbol> coeff,
                                             std::vector<gf::Symbol> payload) {
  const gf::Field& f = *field_;

  // Forward-reduce the incoming row against the stored RREF rows.
  for (std::size_t c = 0; c < k_; ++c) {
    if (coeff[c] == 0 || pivot_row_[c] < 0) continue;
    const Row& row = rows_[static_cast<std::size_t>(pivot_row_[c])];
    const gf::Symbol factor = coeff[c];
    for (std::size_t j = c; j < k_; ++j) {
      coeff[j] = f.add(coeff[j], f.mul(factor, row.coeff[j]));
    }
    for (std::size_t j = 0; j < payload.size(); ++j) {
      payload[j] = f.add(payload[j], f.mul(factor, row.payload[j]));
    }
  }

  std::size_t pivot = k_;
  for (std::size_t c = 0; c < k_; ++c) {
    if (coeff[c] != 0) {
      pivot = c;
      break;
    }
  }
  if (pivot == k_) return AbsorbOutcome::Redundant;

  // Normalize the pivot to 1.
  const gf::Symbol scale = f.inv(coeff[pivot]);
  if (scale != 1) {
    for (std::size_t j = pivot; j < k_; ++j) coeff[j] = f.mul(scale, coeff[j]);
    for (auto& v : payload) v = f.mul(scale, v);
  }

  // Back-eliminate the new pivot column from the stored rows.
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    Row& row = rows_[r];
    const gf::Symbol factor = row.coeff[pivot];
    if (factor == 0) continue;
    for (std::size_t j = pivot; j < k_; ++j) {
      row.coeff[j] = f.add(row.coeff[j], f.mul(factor, coeff[j]));
    }
    for (std::size_t j = 0; j < payload.size(); ++j) {
      row.payload[j] = f.add(row.payload[j], f.mul(factor, payload[j]));
    }
  }

  pivot_row_[pivot] = static_cast<int>(rows_.size());
  rows_.push_back(Row{std::move(coeff), std::move(payload)});
  ++rank_;
  return complete() ? AbsorbOutcome::Complete : AbsorbOutcome::Innovative;
}

bool DecoderState::in_row_space(const CodingVector& vector) const {
  if (vector.size() != k_) {
    throw VectorMismatchError("coding vector length does not match decoder");
  }
  std::vector<gf::Symbol> v = vector.coefficients;
  const gf::Field& f = *field_;
  for (std::size_t c = 0; c < k_; ++c) {
    if (v[c] == 0 || pivot_row_[c] < 0) continue;
    const Row& row = rows_[static_cast<std::size_t>(pivot_row_[c])];
    const gf::Symbol factor = v[c];
    for (std::size_t j = c; j < k_; ++j) {
      v[j] = f.add(v[j], f.mul(factor, row.coeff[j]));
    }
  }
  return std::all_of(v.begin(), v.end(),
                     [](gf::Symbol s) { return s == 0; });
}

std::vector<Packet> DecoderState::extract() const {
  if (!complete()) throw RankDeficientError(rank_, k_);
  std::vector<Packet> out;
  out.reserve(k_);
  // Full rank in RREF means row pivot_row_[c] is the unit vector e_c.
  for (std::size_t c = 0; c < k_; ++c) {
    const Row& row = rows_[static_cast<std::size_t>(pivot_row_[c])];
    std::vector<std::uint8_t> bytes = field_->bytes_from_symbols(row.payload);
    bytes.resize(original_len_.value_or(0));
    out.push_back(Packet{std::move(bytes), static_cast<std::uint32_t>(c),
                         generation_});
  }
  return out;
}

std::vector<std::uint8_t> serialize_coded(const CodedPacket& packet) {
  const gf::Field& field = gf::Field::of(packet.spec.width);
  std::vector<std::uint8_t> out;
  const std::size_t k = packet.vector.size();
  out.reserve(kHeaderSize + field.packed_size(k) + packet.payload.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, packet.generation);
  out.push_back(static_cast<std::uint8_t>(packet.spec.width));
  out.push_back(static_cast<std::uint8_t>(k & 0xFF));
  out.push_back(static_cast<std::uint8_t>((k >> 8) & 0xFF));
  put_u32(out, static_cast<std::uint32_t>(packet.payload.size()));
  put_u32(out, packet.original_len);
  const std::vector<std::uint8_t> coeff =
      field.bytes_from_symbols(packet.vector.coefficients);
  out.insert(out.end(), coeff.begin(), coeff.end());
  out.insert(out.end(), packet.payload.begin(), packet.payload.end());
  return out;
}

CodedPacket deserialize_coded(std::span<const std::uint8_t> frame) {
  if (frame.size() < kHeaderSize) {
    throw MalformedFrameError(frame.size(), "frame truncated inside header");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (frame[i] != static_cast<std::uint8_t>(kMagic[i])) {
      throw MalformedFrameError(i, "bad magic");
    }
  }
  const std::uint32_t generation = get_u32(frame, 4);
  const unsigned s = frame[8];
  if (s != 1 && s != 2 && s != 4 && s != 8 && s != 16) {
    throw MalformedFrameError(8, "field width not in {1,2,4,8,16}");
  }
  const std::size_t k = static_cast<std::size_t>(frame[9]) |
                        (static_cast<std::size_t>(frame[10]) << 8);
  if (k == 0) {
    throw MalformedFrameError(9, "generation size must be positive");
  }
  const std::uint32_t payload_len = get_u32(frame, 11);
  const std::uint32_t original_len = get_u32(frame, 15);
  if (s == 16) {
    if (payload_len % 2 != 0) {
      throw MalformedFrameError(11, "payload not symbol-aligned at s=16");
    }
    if (original_len != payload_len && original_len + 1 != payload_len) {
      throw MalformedFrameError(15, "original length inconsistent with payload");
    }
  } else if (original_len != payload_len) {
    throw MalformedFrameError(15, "original length inconsistent with payload");
  }

  const gf::Field& field = gf::Field::of(s);
  const std::size_t coeff_bytes = field.packed_size(k);
  const std::size_t expected = kHeaderSize + coeff_bytes + payload_len;
  if (frame.size() < expected) {
    throw MalformedFrameError(frame.size(), "frame truncated");
  }
  if (frame.size() > expected) {
    throw MalformedFrameError(expected, "trailing bytes after payload");
  }

  // Unused pad bits of the final coefficient byte must be zero so that the
  // frame encoding stays canonical.
  if (s < 8 && (k * s) % 8 != 0) {
    const std::uint8_t last = frame[kHeaderSize + coeff_bytes - 1];
    const unsigned used = static_cast<unsigned>((k * s) % 8);
    if ((last & ((1u << (8 - used)) - 1)) != 0) {
      throw MalformedFrameError(kHeaderSize + coeff_bytes - 1,
                                "nonzero padding bits in coefficient block");
    }
  }

  CodedPacket out;
  out.generation = generation;
  out.spec = gf::FieldSpec::with_width(s);
  out.original_len = original_len;
  out.vector.coefficients =
      field.unpack_symbols(frame.subspan(kHeaderSize, coeff_bytes), k);
  out.payload.assign(frame.begin() + kHeaderSize + coeff_bytes,
                     frame.begin() + expected);
  return out;
}

}  // namespace fednc::codec
