#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "virtuebench/background_theory.hpp"
#include "virtuebench/observation.hpp"
#include "virtuebench/symbol_stream.hpp"
#include "virtuebench/toy_net.hpp"

namespace vb {

// Deterministic families put 1 - eps on their predicted label and spread eps
// over the rest; probabilistic families mix with uniform at rate eps. Keeps
// every log-likelihood finite while exact surrogates stay within 1e-5 bits
// of 0 per observation.
inline constexpr double kSmoothingEps = 0x1.0p-20;

enum class Family : uint8_t { Clustering, Dictionary, Circuit, Mixture, Straightforward };

std::string family_id(Family f);
Sym family_symbol(Family f);

// Context available when decoding a serialized explanation. Families that
// predict through the subject model (dictionary, circuit, activation-space
// clustering) need the net here; self-contained families ignore it.
struct DecodeContext {
  std::shared_ptr<const ToyNet> net;
};

struct LogLik {
  double bits = 0.0;   // log2 probability
  bool clamped = false;  // a zero-probability event hit the smoothing floor
};

// Which fields may legally vary at each grammar position; drives the edit
// neighborhood. Literal widths are the distinct widths the family emits.
struct EditAlphabet {
  std::vector<Sym> symbols;
  std::vector<int> literal_widths;
};

class Explanation {
 public:
  virtual ~Explanation() = default;

  virtual Family family() const = 0;
  virtual int input_width() const = 0;
  virtual int label_count() const = 0;

  // Smoothed categorical distribution over labels; sums to 1 within 1e-9.
  virtual std::vector<double> predict(uint16_t input_bits) const = 0;

  // log2 P(obs | E). Factorized families share one code path for both, so
  // joint == factorized bit-for-bit; the mixture family overrides joint.
  virtual LogLik joint_log2(std::span<const Observation> obs) const;
  LogLik factorized_log2(std::span<const Observation> obs) const;

  virtual SymbolStream to_stream(const BackgroundTheory& b) const = 0;
  virtual int entity_count() const = 0;
  virtual bool nomological() const { return false; }

  // Family-internal constraints beyond per-input normalization.
  virtual bool internal_constraints_ok() const = 0;

  virtual EditAlphabet edit_alphabet(const BackgroundTheory& b) const = 0;

  // Maximum absolute difference of predictive distributions over the whole
  // enumerated input space.
  double max_predictive_gap(const Explanation& other) const;

 protected:
  void check_width(std::span<const Observation> obs) const;
};

using ExplanationPtr = std::shared_ptr<const Explanation>;

// ---- serialization -------------------------------------------------------

// Prefix-free bit string whose length equals conciseness(e, b) exactly.
struct SerializedExplanation {
  std::vector<uint8_t> bytes;
  uint64_t bit_length = 0;
};

SerializedExplanation serialize(const Explanation& e, const BackgroundTheory& b);
ExplanationPtr deserialize(const SerializedExplanation& s, const BackgroundTheory& b,
                           const DecodeContext& ctx);

// Family-dispatched parse of a field source (used by both bit decoding and
// edited-stream decoding). Throws DecodeError on any malformed input.
ExplanationPtr decode_stream(const SymbolStream& s, const BackgroundTheory& b,
                             const DecodeContext& ctx);

// "XVB1" length-prefixed container.
std::vector<uint8_t> to_blob(const SerializedExplanation& s);
SerializedExplanation from_blob(const std::vector<uint8_t>& blob);

// ---- edits ---------------------------------------------------------------

enum class EditKind : uint8_t { Insert, Delete, Substitute, Transpose };

struct EditOp {
  EditKind kind;
  size_t location = 0;
  std::vector<Field> payload;  // Insert: fields to add; Substitute: one field

  static EditOp insert(size_t loc, Field f) { return {EditKind::Insert, loc, {f}}; }
  static EditOp erase(size_t loc) { return {EditKind::Delete, loc, {}}; }
  static EditOp substitute(size_t loc, Field f) { return {EditKind::Substitute, loc, {f}}; }
  static EditOp transpose(size_t loc) { return {EditKind::Transpose, loc, {}}; }
};

// Applies ops in order to a copy of the stream. Out-of-range locations raise
// DecodeError (an edit yields a valid explanation or a decode error, never a
// crash).
SymbolStream apply_ops(const SymbolStream& s, std::span<const EditOp> ops);

// Decode the edited stream. The throwing form raises DecodeError; the `try`
// form returns nullptr for infeasible neighbors.
ExplanationPtr apply_edit(const Explanation& e, std::span<const EditOp> delta,
                          const BackgroundTheory& b, const DecodeContext& ctx);
ExplanationPtr try_apply_edit(const Explanation& e, std::span<const EditOp> delta,
                              const BackgroundTheory& b, const DecodeContext& ctx);

// Edit list that undoes `ops` when applied to the edited stream.
std::vector<EditOp> inverse_ops(const SymbolStream& original, std::span<const EditOp> ops);

}  // namespace vb
