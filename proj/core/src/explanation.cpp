#include "virtuebench/explanation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "virtuebench/explainers/circuit.hpp"
#include "virtuebench/explainers/clustering.hpp"
#include "virtuebench/explainers/dictionary.hpp"
#include "virtuebench/explainers/mixture.hpp"
#include "virtuebench/explainers/straightforward.hpp"

namespace vb {

std::string family_id(Family f) {
  switch (f) {
    case Family::Clustering: return "clustering";
    case Family::Dictionary: return "dictionary";
    case Family::Circuit: return "circuit";
    case Family::Mixture: return "mixture";
    case Family::Straightforward: return "straightforward";
  }
  throw ValidationError("unreachable family");
}

Sym family_symbol(Family f) {
  switch (f) {
    case Family::Clustering: return Sym::FamClustering;
    case Family::Dictionary: return Sym::FamDictionary;
    case Family::Circuit: return Sym::FamCircuit;
    case Family::Mixture: return Sym::FamMixture;
    case Family::Straightforward: return Sym::FamStraightforward;
  }
  throw ValidationError("unreachable family");
}

void Explanation::check_width(std::span<const Observation> obs) const {
  for (const Observation& o : obs) {
    if (o.width != input_width()) {
      throw WidthMismatch("observation width " + std::to_string(o.width) +
                          " != explanation width " + std::to_string(input_width()));
    }
  }
}

LogLik Explanation::factorized_log2(std::span<const Observation> obs) const {
  check_width(obs);
  LogLik r;
  for (const Observation& o : obs) {
    auto p = predict(o.input);
    double py = o.label < p.size() ? p[o.label] : 0.0;
    if (py <= 0.0) {
      py = kSmoothingEps;
      r.clamped = true;
    }
    r.bits += std::log2(py);
  }
  return r;
}

LogLik Explanation::joint_log2(std::span<const Observation> obs) const {
  // Factorized families: the joint is the product of the per-point marginals.
  // Shares the exact code path so joint == factorized bit-for-bit.
  return factorized_log2(obs);
}

double Explanation::max_predictive_gap(const Explanation& other) const {
  if (input_width() != other.input_width() || label_count() != other.label_count()) {
    return 1.0;
  }
  double gap = 0.0;
  uint32_t total = uint32_t{1} << input_width();
  for (uint32_t x = 0; x < total; ++x) {
    auto a = predict(static_cast<uint16_t>(x));
    auto b = other.predict(static_cast<uint16_t>(x));
    for (size_t y = 0; y < a.size(); ++y) gap = std::max(gap, std::abs(a[y] - b[y]));
  }
  return gap;
}

// ---- serialization --------------------------------------------------------

SerializedExplanation serialize(const Explanation& e, const BackgroundTheory& b) {
  SymbolStream s = e.to_stream(b);
  SerializedExplanation out;
  out.bytes = pack_stream(s, b, &out.bit_length);
  return out;
}

ExplanationPtr decode_dispatch(FieldSource& src, const BackgroundTheory& b,
                               const DecodeContext& ctx) {
  Sym fam = src.next_symbol();
  ExplanationPtr e;
  switch (fam) {
    case Sym::FamClustering: e = ClusteringExplanation::from_source(src, b, ctx); break;
    case Sym::FamDictionary: e = DictionaryExplanation::from_source(src, b, ctx); break;
    case Sym::FamCircuit: e = CircuitExplanation::from_source(src, b, ctx); break;
    case Sym::FamMixture: e = MixtureExplanation::from_source(src, b, ctx); break;
    case Sym::FamStraightforward: e = StraightforwardExplanation::from_source(src, b, ctx); break;
    default: throw DecodeError("stream does not start with a family tag");
  }
  src.expect_end();
  return e;
}

ExplanationPtr deserialize(const SerializedExplanation& s, const BackgroundTheory& b,
                           const DecodeContext& ctx) {
  BitFieldSource src(BitReader(s.bytes.data(), s.bit_length), b);
  return decode_dispatch(src, b, ctx);
}

ExplanationPtr decode_stream(const SymbolStream& s, const BackgroundTheory& b,
                             const DecodeContext& ctx) {
  StreamFieldSource src(s);
  return decode_dispatch(src, b, ctx);
}

std::vector<uint8_t> to_blob(const SerializedExplanation& s) {
  std::vector<uint8_t> out = {'X', 'V', 'B', '1'};
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(s.bit_length >> (8 * i)));
  out.insert(out.end(), s.bytes.begin(), s.bytes.end());
  return out;
}

SerializedExplanation from_blob(const std::vector<uint8_t>& blob) {
  if (blob.size() < 12 || std::memcmp(blob.data(), "XVB1", 4) != 0) {
    throw DecodeError("bad explanation blob magic");
  }
  SerializedExplanation s;
  for (int i = 0; i < 8; ++i) s.bit_length |= static_cast<uint64_t>(blob[4 + i]) << (8 * i);
  s.bytes.assign(blob.begin() + 12, blob.end());
  if (s.bytes.size() * 8 < s.bit_length) throw DecodeError("explanation blob truncated");
  return s;
}

// ---- edits ----------------------------------------------------------------

SymbolStream apply_ops(const SymbolStream& s, std::span<const EditOp> ops) {
  SymbolStream out = s;
  for (const EditOp& op : ops) {
    switch (op.kind) {
      case EditKind::Insert: {
        if (op.location > out.size()) throw DecodeError("insert past end");
        out.insert(out.begin() + static_cast<ptrdiff_t>(op.location), op.payload.begin(),
                   op.payload.end());
        break;
      }
      case EditKind::Delete: {
        if (op.location >= out.size()) throw DecodeError("delete past end");
        out.erase(out.begin() + static_cast<ptrdiff_t>(op.location));
        break;
      }
      case EditKind::Substitute: {
        if (op.location >= out.size() || op.payload.size() != 1) {
          throw DecodeError("bad substitute");
        }
        out[op.location] = op.payload.front();
        break;
      }
      case EditKind::Transpose: {
        if (op.location + 1 >= out.size()) throw DecodeError("transpose past end");
        std::swap(out[op.location], out[op.location + 1]);
        break;
      }
    }
  }
  return out;
}

ExplanationPtr apply_edit(const Explanation& e, std::span<const EditOp> delta,
                          const BackgroundTheory& b, const DecodeContext& ctx) {
  if (delta.empty()) throw ValidationError("empty edit list");
  SymbolStream edited = apply_ops(e.to_stream(b), delta);
  return decode_stream(edited, b, ctx);
}

ExplanationPtr try_apply_edit(const Explanation& e, std::span<const EditOp> delta,
                              const BackgroundTheory& b, const DecodeContext& ctx) {
  try {
    return apply_edit(e, delta, b, ctx);
  } catch (const DecodeError&) {
    return nullptr;
  } catch (const FixedOverflow&) {
    return nullptr;
  }
}

std::vector<EditOp> inverse_ops(const SymbolStream& original, std::span<const EditOp> ops) {
  // Build inverses by replaying forward and reversing each op against the
  // state it acted on.
  SymbolStream state = original;
  std::vector<EditOp> inv;
  for (const EditOp& op : ops) {
    switch (op.kind) {
      case EditKind::Insert:
        for (size_t i = 0; i < op.payload.size(); ++i) inv.push_back(EditOp::erase(op.location));
        break;
      case EditKind::Delete:
        inv.push_back(EditOp::insert(op.location, state.at(op.location)));
        break;
      case EditKind::Substitute:
        inv.push_back(EditOp::substitute(op.location, state.at(op.location)));
        break;
      case EditKind::Transpose:
        inv.push_back(EditOp::transpose(op.location));
        break;
    }
    state = apply_ops(state, std::span<const EditOp>(&op, 1));
  }
  std::reverse(inv.begin(), inv.end());
  return inv;
}

}  // namespace vb
