#include "virtuebench/background_theory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vb {

namespace {

std::optional<Sym> sym_by_name(std::string_view name) {
  for (size_t i = 0; i < kSymCount; ++i) {
    if (kSymNames[i] == name) return static_cast<Sym>(i);
  }
  return std::nullopt;
}

}  // namespace

BackgroundTheory::BackgroundTheory(std::map<std::string, int> codebook, int quantization_bits,
                                   std::string version)
    : codebook_(std::move(codebook)),
      quantization_bits_(quantization_bits),
      version_(std::move(version)) {
  if (quantization_bits_ < 2 || quantization_bits_ > 32) {
    throw ValidationError("quantization_bits must be in [2, 32]");
  }
  for (const auto& [name, len] : codebook_) {
    auto s = sym_by_name(name);
    if (!s) throw ValidationError("unknown codebook symbol: " + name);
    if (len < 1 || len > 32) throw ValidationError("code length out of range for " + name);
    code_len_[static_cast<size_t>(*s)] = len;
  }
  if (kraft_sum() > 1.0 + 1e-12) {
    throw ValidationError("codebook violates the Kraft inequality");
  }
  build_codes();
}

BackgroundTheory BackgroundTheory::default_theory() {
  std::map<std::string, int> book;
  book["edge.on"] = 2;
  book["edge.off"] = 2;
  for (const char* f : {"fam.clustering", "fam.dictionary", "fam.circuit", "fam.mixture",
                        "fam.straightforward"}) {
    book[f] = 5;
  }
  for (const char* s : {"space.input", "space.layer", "act.relu", "act.identity", "abl.zero",
                        "abl.mean", "hyp.majority", "hyp.parity", "hyp.const0", "hyp.const1",
                        "hyp.modadd"}) {
    book[s] = 6;
  }
  return BackgroundTheory(std::move(book), 16, "default-1");
}

BackgroundTheory BackgroundTheory::from_json_text(const std::string& text, int quantization_bits,
                                                  const std::string& version) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object()) throw ValidationError("codebook JSON must be an object");
  std::map<std::string, int> book;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number_integer()) {
      throw ValidationError("codebook entry is not an integer: " + it.key());
    }
    book[it.key()] = it.value().get<int>();
  }
  return BackgroundTheory(std::move(book), quantization_bits, version);
}

BackgroundTheory BackgroundTheory::from_json_file(const std::string& path, int quantization_bits,
                                                  const std::string& version) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open codebook file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), quantization_bits, version);
}

double BackgroundTheory::kraft_sum() const {
  double s = 0.0;
  for (const auto& [name, len] : codebook_) s += std::exp2(-static_cast<double>(len));
  return s;
}

int BackgroundTheory::code_length(Sym s) const {
  int len = code_len_[static_cast<size_t>(s)];
  if (len == 0) throw UnknownSymbol("symbol missing from codebook: " + std::string(sym_name(s)));
  return len;
}

void BackgroundTheory::build_codes() {
  // Canonical assignment: sort by (length, name), then count upward,
  // shifting left on every length increase.
  std::vector<Sym> order;
  for (size_t i = 0; i < kSymCount; ++i) {
    if (code_len_[i] > 0) order.push_back(static_cast<Sym>(i));
  }
  std::sort(order.begin(), order.end(), [&](Sym a, Sym b) {
    int la = code_len_[static_cast<size_t>(a)], lb = code_len_[static_cast<size_t>(b)];
    if (la != lb) return la < lb;
    return sym_name(a) < sym_name(b);
  });
  uint32_t code = 0;
  int prev_len = order.empty() ? 0 : code_len_[static_cast<size_t>(order.front())];
  decode_map_.clear();
  for (Sym s : order) {
    int len = code_len_[static_cast<size_t>(s)];
    code <<= (len - prev_len);
    if (len < 32 && code >= (uint32_t{1} << len)) {
      throw ValidationError("canonical code overflow (Kraft violation)");
    }
    code_bits_[static_cast<size_t>(s)] = code;
    code_width_[static_cast<size_t>(s)] = static_cast<uint32_t>(len);
    decode_map_[{len, code}] = s;
    ++code;
    prev_len = len;
  }
}

void BackgroundTheory::encode_symbol(BitWriter& w, Sym s) const {
  int len = code_length(s);
  w.put_bits(code_bits_[static_cast<size_t>(s)], len);
}

Sym BackgroundTheory::decode_symbol(BitReader& r) const {
  uint32_t val = 0;
  int len = 0;
  while (len < 33) {
    val = (val << 1) | static_cast<uint32_t>(r.get_bit());
    ++len;
    auto it = decode_map_.find({len, val});
    if (it != decode_map_.end()) return it->second;
  }
  throw DecodeError("no symbol matches the bit pattern");
}

BackgroundTheory BackgroundTheory::extended_with_counts(
    const std::map<Sym, uint64_t>& used_counts) const {
  uint64_t total = 0;
  for (const auto& [s, c] : used_counts) total += c;
  std::map<std::string, int> book;

  // Frequency-derived lengths for the conditioning explanation's symbols,
  // shortened toward ceil(log2((N+1)/c)).
  double used_mass = 0.0;
  std::map<Sym, int> used_len;
  for (const auto& [s, c] : used_counts) {
    if (c == 0) continue;
    int len = 1;
    while ((static_cast<unsigned __int128>(c) << len) < total + 1) ++len;
    used_len[s] = len;
  }
  // Keep at least 1/8 of the code space for everything else.
  for (int guard = 0; guard < 64; ++guard) {
    used_mass = 0.0;
    for (const auto& [s, len] : used_len) used_mass += std::exp2(-len);
    if (used_mass <= 0.875) break;
    for (auto& [s, len] : used_len) ++len;
  }

  double remaining = 1.0 - used_mass;
  double others_mass = 0.0;
  for (const auto& [name, len] : codebook_) {
    auto s = static_cast<size_t>(0);
    (void)s;
    bool is_used = false;
    for (const auto& [us, ul] : used_len) {
      if (sym_name(us) == name) {
        is_used = true;
        break;
      }
    }
    if (!is_used) others_mass += std::exp2(-len);
  }
  int extra = 0;
  while (others_mass * std::exp2(-extra) > remaining && extra < 64) ++extra;

  for (const auto& [name, len] : codebook_) {
    bool placed = false;
    for (const auto& [us, ul] : used_len) {
      if (sym_name(us) == name) {
        book[name] = std::min(32, ul);
        placed = true;
        break;
      }
    }
    if (!placed) book[name] = std::min(32, len + extra);
  }
  return BackgroundTheory(std::move(book), quantization_bits_, version_ + "+cond");
}

}  // namespace vb
