#pragma once

// RLNC packet coding: random coefficient vectors, symbol-wise linear
// combination, and incremental Gaussian elimination over GF(2^s). The
// decoder keeps its rows in reduced row-echelon form so rank is available
// after every absorbed packet.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fednc/galois.hpp"
#include "fednc/rng.hpp"

namespace fednc::codec {

struct LengthMismatchError : std::invalid_argument {
  explicit LengthMismatchError(const std::string& what)
      : std::invalid_argument(what) {}
};

struct VectorMismatchError : std::invalid_argument {
  explicit VectorMismatchError(const std::string& what)
      : std::invalid_argument(what) {}
};

struct GenerationMismatchError : std::invalid_argument {
  explicit GenerationMismatchError(const std::string& what)
      : std::invalid_argument(what) {}
};

struct RankDeficientError : std::runtime_error {
  explicit RankDeficientError(std::size_t rank, std::size_t k)
      : std::runtime_error("decoder rank " + std::to_string(rank) +
                           " below generation size " + std::to_string(k)) {}
};

struct MalformedFrameError : std::runtime_error {
  explicit MalformedFrameError(std::size_t at, const std::string& what)
      : std::runtime_error("malformed frame at byte " + std::to_string(at) +
                           ": " + what),
        offset(at) {}
  std::size_t offset;
};

// One client's serialized model update within a generation.
struct Packet {
  std::vector<std::uint8_t> payload;
  std::uint32_t origin_id = 0;
  std::uint32_t generation = 0;
};

struct CodingVector {
  std::vector<gf::Symbol> coefficients;

  std::size_t size() const { return coefficients.size(); }
  bool operator==(const CodingVector&) const = default;
};

// Encoded tuple (a_i, C_i) as transmitted on the edge -> central hop.
struct CodedPacket {
  CodingVector vector;
  std::vector<std::uint8_t> payload;
  std::uint32_t generation = 0;
  gf::FieldSpec spec;
  std::uint32_t original_len = 0;  // packet bytes before s=16 zero padding
};

enum class AbsorbOutcome { Innovative, Redundant, Complete };

// Each of the k coefficients is uniform over [0, 2^s); the all-zero vector
// is a legitimate draw.
CodingVector random_coding_vector(std::size_t k, const gf::Field& field,
                                  Rng& rng);

CodedPacket encode(std::span<const Packet> packets, const CodingVector& vector,
                   const gf::Field& field);

// Online Gaussian elimination workspace. Payload rows are carried through
// the same row operations as coefficient rows; with rank k the coefficient
// matrix has been reduced to the identity and payload rows are the original
// packets. Also usable coefficient-only for rank bookkeeping.
class DecoderState {
 public:
  DecoderState(std::size_t k, const gf::Field& field,
               std::uint32_t generation = 0);

  AbsorbOutcome absorb(const CodedPacket& packet);

  // Rank bookkeeping without payload content (channel simulations and the
  // eavesdropper audit need only the row space).
  AbsorbOutcome absorb_vector(const CodingVector& vector);

  // True iff the vector lies in the span of the absorbed rows.
  bool in_row_space(const CodingVector& vector) const;

  std::size_t rank() const { return rank_; }
  std::size_t generation_size() const { return k_; }
  std::uint32_t generation() const { return generation_; }
  bool complete() const { return rank_ == k_; }

  std::vector<Packet> extract() const;

 private:
  struct Row {
    std::vector<gf::Symbol> coeff;
    std::vector<gf::Symbol> payload;
  };

  AbsorbOutcome reduce_and_store(std::vector<gf::Symbol> coeff,
                                 std::vector<gf::Symbol> payload);

  const gf::Field* field_;
  std::size_t k_;
  std::uint32_t generation_;
  std::size_t rank_ = 0;
  std::vector<Row> rows_;
  std::vector<int> pivot_row_;  // column -> row index, -1 when unset
  std::optional<std::uint32_t> original_len_;
  std::optional<std::size_t> payload_symbols_;
};

// Wire frame, all integers little-endian:
//   magic "FNC1" | generation u32 | s u8 | K u16 | payload_len u32 |
//   original_len u32 | coefficients (K symbols, MSB-first packed) | payload
std::vector<std::uint8_t> serialize_coded(const CodedPacket& packet);
CodedPacket deserialize_coded(std::span<const std::uint8_t> frame);

}  // namespace fednc::codec
