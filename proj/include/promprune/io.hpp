#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "promprune/pipeline.hpp"
#include "promprune/prominence.hpp"
#include "promprune/tensor_core.hpp"

namespace promprune::io {

// "PTM1" | u32 n_tokens | u32 dim | n_tokens*dim f32, all little-endian.
TokenMatrix read_tokens(const std::filesystem::path& path);
void write_tokens(const TokenMatrix& tokens, const std::filesystem::path& path);

TokenMatrix decode_tokens(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_tokens(const TokenMatrix& tokens);

// "PSV1" | u32 n_heads | u32 n_tokens | n_heads*n_tokens f32 (H x N).
Matrix read_saliency(const std::filesystem::path& path);
void write_saliency(const Matrix& head_scores,
                    const std::filesystem::path& path);

Matrix decode_saliency(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_saliency(const Matrix& head_scores);

inline constexpr int kSelectionSchema = 1;

/// Versioned JSON text for a SelectionResult (timings are not written).
std::string selection_to_json(const SelectionResult& result);
SelectionResult selection_from_json(const std::string& text);

std::string entropy_to_json(const EntropyReport& report);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                const std::vector<std::uint8_t>& bytes);

}  // namespace promprune::io
