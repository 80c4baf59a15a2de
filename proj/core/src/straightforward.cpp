#include "virtuebench/explainers/straightforward.hpp"

namespace vb {

StraightforwardExplanation::StraightforwardExplanation(std::shared_ptr<const ToyNet> net)
    : net_(std::move(net)) {
  if (!net_) throw ValidationError("straightforward explanation needs a net");
}

std::vector<double> StraightforwardExplanation::predict(uint16_t input_bits) const {
  int labels = label_count();
  std::vector<double> p(labels, labels > 1 ? kSmoothingEps / (labels - 1) : 0.0);
  p[net_->label_of(input_bits)] = labels > 1 ? 1.0 - kSmoothingEps : 1.0;
  return p;
}

uint64_t StraightforwardExplanation::header_bits(const ToyNet& net, const BackgroundTheory& b) {
  return static_cast<uint64_t>(b.code_length(Sym::FamStraightforward)) + 4 +
         8 * (static_cast<uint64_t>(net.depth()) + 1) +
         static_cast<uint64_t>(b.code_length(net.activation() == Activation::Relu
                                                 ? Sym::ActRelu
                                                 : Sym::ActIdentity));
}

SymbolStream StraightforwardExplanation::to_stream(const BackgroundTheory& b) const {
  int qb = b.quantization_bits();
  SymbolStream s;
  s.push_back(Field::symbol(Sym::FamStraightforward));
  s.push_back(Field::literal(static_cast<uint64_t>(net_->depth()), 4));
  for (int size : net_->layer_sizes()) s.push_back(Field::literal(static_cast<uint64_t>(size), 8));
  s.push_back(Field::symbol(net_->activation() == Activation::Relu ? Sym::ActRelu
                                                                   : Sym::ActIdentity));
  for (int l = 0; l < net_->depth(); ++l) {
    for (int32_t w : net_->weights()[l]) {
      s.push_back(Field::literal(encode_quantized(quantize_raw(w, qb), qb), qb));
    }
    for (int32_t bia : net_->biases()[l]) {
      s.push_back(Field::literal(encode_quantized(quantize_raw(bia, qb), qb), qb));
    }
  }
  return s;
}

EditAlphabet StraightforwardExplanation::edit_alphabet(const BackgroundTheory& b) const {
  return {{Sym::FamStraightforward, Sym::ActRelu, Sym::ActIdentity},
          {4, 8, b.quantization_bits()}};
}

ExplanationPtr StraightforwardExplanation::from_source(FieldSource& src,
                                                       const BackgroundTheory& b,
                                                       const DecodeContext& /*ctx*/) {
  int qb = b.quantization_bits();
  int depth = static_cast<int>(src.next_literal(4));
  if (depth < 1 || depth > 8) throw DecodeError("bad depth");
  std::vector<int> sizes(depth + 1);
  for (int& s : sizes) {
    s = static_cast<int>(src.next_literal(8));
    if (s < 1) throw DecodeError("zero layer size");
  }
  Sym act = src.next_symbol();
  if (act != Sym::ActRelu && act != Sym::ActIdentity) throw DecodeError("bad activation symbol");
  std::vector<std::vector<int32_t>> weights(depth), biases(depth);
  for (int l = 0; l < depth; ++l) {
    weights[l].resize(static_cast<size_t>(sizes[l]) * sizes[l + 1]);
    for (auto& w : weights[l]) w = decode_quantized(src.next_literal(qb), qb);
    biases[l].resize(sizes[l + 1]);
    for (auto& bi : biases[l]) bi = decode_quantized(src.next_literal(qb), qb);
  }
  try {
    auto net = std::make_shared<const ToyNet>(std::move(sizes), std::move(weights),
                                              std::move(biases),
                                              act == Sym::ActRelu ? Activation::Relu
                                                                  : Activation::Identity,
                                              0);
    return std::make_shared<StraightforwardExplanation>(std::move(net));
  } catch (const std::exception& e) {
    throw DecodeError(std::string("invalid net: ") + e.what());
  }
}

std::shared_ptr<const StraightforwardExplanation> straightforward(
    std::shared_ptr<const ToyNet> net) {
  return std::make_shared<const StraightforwardExplanation>(std::move(net));
}

}  // namespace vb
