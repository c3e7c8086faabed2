#pragma once

#include <iosfwd>

#include "qmpc/model/config.hpp"

namespace qmpc {

// Deterministic toy model: weights uniform over {-1,+1}, scales drawn inside
// bands that keep every fold in range and one input quantization step worth
// at most one output step through the nonlinear tables.
Model gen_toy_model(const ModelConfig& dims, u64 seed);

// Textual key=value header plus raw little-endian blobs; weights bit-packed
// one bit each (1 -> +1), scales printed with %.17g so doubles round-trip.
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);
std::string model_header_text(const Model& m);

// Embedding quantization at the data owner: clip(floor(v / s_x), -8, 7).
QuantTensor quantize_embeddings(const std::vector<double>& values, std::size_t rows,
                                std::size_t cols, double s_x);

// Deterministic synthetic embeddings for seeded runs.
QuantTensor gen_toy_input(const ModelConfig& cfg, unsigned seq, u64 seed);

}  // namespace qmpc
