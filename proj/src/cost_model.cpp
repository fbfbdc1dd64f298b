#include "promprune/cost_model.hpp"

#include "promprune/error.hpp"

namespace promprune {

void ModelCostSpec::validate() const {
  if (hidden_dim < 1 || n_layers < 1 || intermediate_dim < 1 || n_params < 1 ||
      text_tokens < 1) {
    throw Error(ErrorKind::invalid_input, "model cost fields must be positive");
  }
}

ModelCostSpec llava_next_7b() {
  return ModelCostSpec{4096, 32, 11008, 6'740'000'000, 60};
}

double estimate_prefill_flops(std::int64_t seq_visual, const ModelCostSpec& spec) {
  spec.validate();
  if (seq_visual < 0) {
    throw Error(ErrorKind::invalid_input, "visual token count must be >= 0");
  }
  const double len = static_cast<double>(seq_visual + spec.text_tokens);
  const double linear = 2.0 * static_cast<double>(spec.n_params) * len;
  const double attention = 4.0 * static_cast<double>(spec.n_layers) * len * len *
                           static_cast<double>(spec.hidden_dim);
  return linear + attention;
}

double estimate_kv_cache_bytes(std::int64_t seq_visual,
                               const ModelCostSpec& spec,
                               int bytes_per_element) {
  spec.validate();
  if (seq_visual < 0 || bytes_per_element < 1) {
    throw Error(ErrorKind::invalid_input, "invalid KV cache query");
  }
  return 2.0 * static_cast<double>(spec.n_layers) *
         static_cast<double>(spec.hidden_dim) * bytes_per_element *
         static_cast<double>(seq_visual);
}

}  // namespace promprune
