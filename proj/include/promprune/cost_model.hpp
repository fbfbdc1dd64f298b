#pragma once

#include <cstdint>

namespace promprune {

struct ModelCostSpec {
  std::int64_t hidden_dim = 4096;
  std::int64_t n_layers = 32;
  std::int64_t intermediate_dim = 11008;
  std::int64_t n_params = 6'740'000'000;
  std::int64_t text_tokens = 60;

  void validate() const;
};

/// LLaVA-NeXT-7B (Vicuna-7B language model).
ModelCostSpec llava_next_7b();

/// Dense prefill: 2 * params * L + 4 * layers * L^2 * hidden, with
/// L = visual + text tokens.
double estimate_prefill_flops(std::int64_t seq_visual, const ModelCostSpec& spec);

/// K and V for every visual token in every layer.
double estimate_kv_cache_bytes(std::int64_t seq_visual,
                               const ModelCostSpec& spec,
                               int bytes_per_element = 2);

}  // namespace promprune
