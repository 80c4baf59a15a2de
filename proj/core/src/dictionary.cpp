#include "virtuebench/explainers/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "virtuebench/rng.hpp"

namespace vb {

namespace {

using i128 = __int128;

int64_t dot_raw(const std::vector<int32_t>& a, const std::vector<int32_t>& b) {
  int64_t s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += fx_mul_raw(a[i], b[i]);
  return s;
}

int index_bits_for(int atom_count) {
  int bits = 1;
  while ((1 << bits) < std::max(2, atom_count)) ++bits;
  return bits;
}

}  // namespace

DictionaryExplanation::DictionaryExplanation(std::shared_ptr<const ToyNet> net, int layer_index,
                                             int max_l0, int mag_bits,
                                             std::vector<std::vector<int32_t>> atoms,
                                             std::vector<std::vector<SparseCoef>> codes)
    : net_(std::move(net)),
      layer_index_(layer_index),
      max_l0_(max_l0),
      mag_bits_(mag_bits),
      atoms_(std::move(atoms)),
      codes_(std::move(codes)) {
  if (!net_) throw ValidationError("dictionary explanation needs a net");
  if (layer_index_ < 1 || layer_index_ > net_->depth()) {
    throw ValidationError("layer index out of range");
  }
  if (max_l0_ < 0 || max_l0_ > 15) throw ValidationError("max_l0 out of range");
  if (mag_bits_ < 2 || mag_bits_ > 32) throw ValidationError("mag_bits out of range");
  size_t width = static_cast<size_t>(net_->layer_sizes()[layer_index_]);
  for (const auto& a : atoms_) {
    if (a.size() != width) throw ValidationError("atom width mismatch");
  }
  if (codes_.size() != (size_t{1} << net_->input_width())) {
    throw ValidationError("one code per enumerated input required");
  }
  for (const auto& code : codes_) {
    if (code.size() > static_cast<size_t>(max_l0_)) throw ValidationError("l0 bound violated");
    for (const SparseCoef& c : code) {
      if (c.atom >= atoms_.size()) throw ValidationError("code references a missing atom");
    }
  }
}

std::vector<int32_t> DictionaryExplanation::reconstruct(uint16_t input_bits) const {
  size_t width = atoms_.empty() ? static_cast<size_t>(net_->layer_sizes()[layer_index_])
                                : atoms_.front().size();
  std::vector<int64_t> acc(width, 0);
  for (const SparseCoef& c : codes_[input_bits]) {
    const auto& atom = atoms_[c.atom];
    for (size_t i = 0; i < width; ++i) acc[i] += fx_mul_raw(c.magnitude, atom[i]);
  }
  std::vector<int32_t> out(width);
  for (size_t i = 0; i < width; ++i) {
    out[i] = static_cast<int32_t>(std::clamp<int64_t>(acc[i], kFixedMin, kFixedMax));
  }
  return out;
}

double DictionaryExplanation::reconstruction_error(uint16_t input_bits) const {
  auto target = net_->layer_activations(input_bits, layer_index_);
  auto recon = reconstruct(input_bits);
  double err = 0.0;
  for (size_t i = 0; i < target.size(); ++i) {
    double d = (static_cast<double>(target[i]) - static_cast<double>(recon[i])) /
               static_cast<double>(kFixedOne);
    err += d * d;
  }
  return err;
}

std::vector<double> DictionaryExplanation::predict(uint16_t input_bits) const {
  auto result = net_->forward_from_layer(layer_index_, reconstruct(input_bits));
  int labels = label_count();
  std::vector<double> p(labels, labels > 1 ? kSmoothingEps / (labels - 1) : 0.0);
  p[result.label] = labels > 1 ? 1.0 - kSmoothingEps : 1.0;
  return p;
}

int DictionaryExplanation::entity_count() const {
  std::set<uint8_t> used;
  for (const auto& code : codes_) {
    for (const SparseCoef& c : code) {
      if (c.magnitude != 0) used.insert(c.atom);
    }
  }
  return static_cast<int>(used.size());
}

bool DictionaryExplanation::internal_constraints_ok() const {
  uint32_t total = uint32_t{1} << net_->input_width();
  for (uint32_t x = 0; x < total; ++x) {
    if (codes_[x].size() > static_cast<size_t>(max_l0_)) return false;
    if (!std::isfinite(reconstruction_error(static_cast<uint16_t>(x)))) return false;
  }
  return true;
}

uint64_t DictionaryExplanation::code_bits() const {
  int idx_bits = index_bits_for(atom_count());
  uint64_t bits = 0;
  for (const auto& code : codes_) {
    bits += 4 + code.size() * static_cast<uint64_t>(idx_bits + mag_bits_);
  }
  return bits;
}

uint64_t DictionaryExplanation::dictionary_bits(const BackgroundTheory& b) const {
  uint64_t width = atoms_.empty() ? 0 : atoms_.front().size();
  return static_cast<uint64_t>(atoms_.size()) * width * b.quantization_bits();
}

SymbolStream DictionaryExplanation::to_stream(const BackgroundTheory& b) const {
  int qb = b.quantization_bits();
  int idx_bits = index_bits_for(atom_count());
  SymbolStream s;
  s.push_back(Field::symbol(Sym::FamDictionary));
  s.push_back(Field::literal(static_cast<uint64_t>(layer_index_), 8));
  s.push_back(Field::literal(atoms_.size(), 8));
  s.push_back(Field::literal(atoms_.empty() ? 0 : atoms_.front().size(), 8));
  s.push_back(Field::literal(static_cast<uint64_t>(max_l0_), 8));
  s.push_back(Field::literal(static_cast<uint64_t>(mag_bits_), 8));
  for (const auto& atom : atoms_) {
    for (int32_t v : atom) {
      s.push_back(Field::literal(encode_quantized(quantize_raw(v, qb), qb), qb));
    }
  }
  for (const auto& code : codes_) {
    s.push_back(Field::literal(code.size(), 4));
    for (const SparseCoef& c : code) {
      s.push_back(Field::literal(c.atom, idx_bits));
      s.push_back(Field::literal(encode_quantized(quantize_raw(c.magnitude, mag_bits_), mag_bits_),
                                 mag_bits_));
    }
  }
  return s;
}

EditAlphabet DictionaryExplanation::edit_alphabet(const BackgroundTheory& b) const {
  return {{}, {4, 8, index_bits_for(atom_count()), mag_bits_, b.quantization_bits()}};
}

ExplanationPtr DictionaryExplanation::from_source(FieldSource& src, const BackgroundTheory& b,
                                                  const DecodeContext& ctx) {
  if (!ctx.net) throw DecodeError("dictionary explanation needs a decode net");
  int qb = b.quantization_bits();
  int layer = static_cast<int>(src.next_literal(8));
  int atom_count = static_cast<int>(src.next_literal(8));
  int width = static_cast<int>(src.next_literal(8));
  int max_l0 = static_cast<int>(src.next_literal(8));
  int mag_bits = static_cast<int>(src.next_literal(8));
  if (layer < 1 || layer > ctx.net->depth()) throw DecodeError("bad layer index");
  if (width != ctx.net->layer_sizes()[layer]) throw DecodeError("width != layer width");
  if (atom_count < 1 || max_l0 > 15 || mag_bits < 2 || mag_bits > 32) {
    throw DecodeError("bad dictionary header");
  }
  int idx_bits = index_bits_for(atom_count);
  std::vector<std::vector<int32_t>> atoms(atom_count, std::vector<int32_t>(width));
  for (auto& atom : atoms) {
    for (auto& v : atom) v = decode_quantized(src.next_literal(qb), qb);
  }
  uint32_t total = uint32_t{1} << ctx.net->input_width();
  std::vector<std::vector<SparseCoef>> codes(total);
  for (uint32_t x = 0; x < total; ++x) {
    uint64_t count = src.next_literal(4);
    if (count > static_cast<uint64_t>(max_l0)) throw DecodeError("code exceeds max_l0");
    for (uint64_t t = 0; t < count; ++t) {
      uint64_t atom = src.next_literal(idx_bits);
      if (atom >= static_cast<uint64_t>(atom_count)) throw DecodeError("atom index out of range");
      int32_t mag = decode_quantized(src.next_literal(mag_bits), mag_bits);
      codes[x].push_back({static_cast<uint8_t>(atom), mag});
    }
  }
  try {
    return std::make_shared<DictionaryExplanation>(ctx.net, layer, max_l0, mag_bits,
                                                   std::move(atoms), std::move(codes));
  } catch (const std::exception& e) {
    throw DecodeError(std::string("invalid dictionary: ") + e.what());
  }
}

// ---- fitting ----------------------------------------------------------------

namespace {

// Greedy matching pursuit against fixed atoms; atoms may not be re-selected
// for the same input. Selection maximizes <r,d>^2 / <d,d> via exact
// cross-multiplied comparisons.
std::vector<SparseCoef> pursue(const std::vector<int32_t>& x,
                               const std::vector<std::vector<int32_t>>& atoms, int max_l0,
                               int mag_bits) {
  std::vector<SparseCoef> code;
  std::vector<int64_t> residual(x.begin(), x.end());
  std::vector<bool> used(atoms.size(), false);
  std::vector<int32_t> r32(x.size());
  for (int t = 0; t < max_l0; ++t) {
    for (size_t i = 0; i < residual.size(); ++i) {
      r32[i] = static_cast<int32_t>(std::clamp<int64_t>(residual[i], kFixedMin, kFixedMax));
    }
    int best = -1;
    int64_t best_num = 0, best_den = 1;
    for (size_t a = 0; a < atoms.size(); ++a) {
      if (used[a]) continue;
      int64_t den = dot_raw(atoms[a], atoms[a]);
      if (den == 0) continue;
      int64_t num = dot_raw(r32, atoms[a]);
      // compare num^2/den against best_num^2/best_den
      i128 lhs = static_cast<i128>(num) * num * best_den;
      i128 rhs = static_cast<i128>(best_num) * best_num * den;
      if (best < 0 || lhs > rhs) {
        best = static_cast<int>(a);
        best_num = num;
        best_den = den;
      }
    }
    if (best < 0 || best_num == 0) break;
    int32_t coef = static_cast<int32_t>(std::clamp<int64_t>(
        fx_div_raw(best_num, best_den), kFixedMin, kFixedMax));
    coef = quantize_raw(coef, mag_bits);
    if (coef == 0) break;
    used[best] = true;
    code.push_back({static_cast<uint8_t>(best), coef});
    for (size_t i = 0; i < residual.size(); ++i) {
      residual[i] -= fx_mul_raw(coef, atoms[best][i]);
    }
  }
  return code;
}

}  // namespace

std::shared_ptr<const DictionaryExplanation> fit_dictionary(std::shared_ptr<const ToyNet> net,
                                                            int layer_index, int atom_count,
                                                            int max_l0, uint64_t seed,
                                                            int mag_bits, bool identity_init) {
  if (!net) throw ValidationError("fit_dictionary needs a net");
  if (atom_count < 1 || atom_count > 255) throw ValidationError("atom_count out of range");
  if (layer_index < 1 || layer_index > net->depth()) {
    throw ValidationError("layer index out of range");
  }
  if (max_l0 < 0 || max_l0 > 15) throw ValidationError("max_l0 out of range");

  int width = net->layer_sizes()[layer_index];
  uint32_t total = uint32_t{1} << net->input_width();
  std::vector<std::vector<int32_t>> data(total);
  for (uint32_t x = 0; x < total; ++x) {
    data[x] = net->layer_activations(static_cast<uint16_t>(x), layer_index);
  }

  Rng rng(Rng::mix(seed, 0xd1c7));
  std::vector<std::vector<int32_t>> atoms(atom_count, std::vector<int32_t>(width, 0));
  for (int a = 0; a < atom_count; ++a) {
    if (identity_init && a < width) {
      atoms[a][a] = static_cast<int32_t>(kFixedOne);
    } else {
      atoms[a] = data[rng.next_below(total)];
    }
  }

  auto reseed_dead_atom = [&](int a, const std::vector<std::vector<SparseCoef>>& codes) {
    // Deterministic re-init from the largest current residual.
    double best_norm = -1.0;
    uint32_t best_x = 0;
    for (uint32_t x = 0; x < total; ++x) {
      std::vector<int64_t> res(data[x].begin(), data[x].end());
      for (const SparseCoef& c : codes[x]) {
        for (int i = 0; i < width; ++i) res[i] -= fx_mul_raw(c.magnitude, atoms[c.atom][i]);
      }
      double norm = 0.0;
      for (int i = 0; i < width; ++i) {
        double v = static_cast<double>(res[i]);
        norm += v * v;
      }
      if (norm > best_norm + 0.5) {  // integer-valued; strict improvement only
        best_norm = norm;
        best_x = x;
      }
    }
    std::vector<int64_t> res(data[best_x].begin(), data[best_x].end());
    for (const SparseCoef& c : codes[best_x]) {
      for (int i = 0; i < width; ++i) res[i] -= fx_mul_raw(c.magnitude, atoms[c.atom][i]);
    }
    for (int i = 0; i < width; ++i) {
      atoms[a][i] = static_cast<int32_t>(std::clamp<int64_t>(res[i], kFixedMin, kFixedMax));
    }
  };

  std::vector<std::vector<SparseCoef>> codes(total);
  for (int round = 0; round < 50; ++round) {
    // coding step
    for (uint32_t x = 0; x < total; ++x) codes[x] = pursue(data[x], atoms, max_l0, mag_bits);

    // dictionary step: per-atom least squares with codes fixed;
    // d_a = sum_i c_ia * E_i / sum_i c_ia^2 over inputs using atom a.
    for (int a = 0; a < atom_count; ++a) {
      std::vector<i128> num(width, 0);
      i128 den = 0;
      for (uint32_t x = 0; x < total; ++x) {
        int32_t coef = 0;
        for (const SparseCoef& c : codes[x]) {
          if (c.atom == a) coef = c.magnitude;
        }
        if (coef == 0) continue;
        // E = x - sum_{j != a} c_j d_j
        std::vector<int64_t> e(data[x].begin(), data[x].end());
        for (const SparseCoef& c : codes[x]) {
          if (c.atom == a) continue;
          for (int i = 0; i < width; ++i) e[i] -= fx_mul_raw(c.magnitude, atoms[c.atom][i]);
        }
        for (int i = 0; i < width; ++i) num[i] += static_cast<i128>(coef) * e[i];
        den += static_cast<i128>(coef) * coef;
      }
      if (den == 0) continue;  // dead this round; handled below if it stays dead
      for (int i = 0; i < width; ++i) {
        i128 v = (num[i] << kFracBits) / den;
        atoms[a][i] = static_cast<int32_t>(
            std::clamp<i128>(v, static_cast<i128>(kFixedMin), static_cast<i128>(kFixedMax)));
      }
      if (dot_raw(atoms[a], atoms[a]) == 0) reseed_dead_atom(a, codes);
    }
  }

  // Final atoms on the parameter grid, final codes against those atoms.
  for (auto& atom : atoms) {
    for (auto& v : atom) v = quantize_raw(v, kDefaultQuantBits);
  }
  for (uint32_t x = 0; x < total; ++x) codes[x] = pursue(data[x], atoms, max_l0, mag_bits);

  return std::make_shared<const DictionaryExplanation>(net, layer_index, max_l0, mag_bits,
                                                       std::move(atoms), std::move(codes));
}

}  // namespace vb
