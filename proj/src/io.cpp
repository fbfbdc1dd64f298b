#include "promprune/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace promprune::io {

namespace {

using Bytes = std::vector<std::uint8_t>;
using nlohmann::json;

constexpr size_t kHeaderBytes = 12;

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xffu));
  }
}

std::uint32_t get_u32(const Bytes& in, size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(in[offset + static_cast<size_t>(b)]) << (8 * b);
  }
  return v;
}

void put_f32(Bytes& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

float get_f32(const Bytes& in, size_t offset) {
  return std::bit_cast<float>(get_u32(in, offset));
}

std::uint32_t checked_u32(Index v, const char* what) {
  if (v < 1 || v > static_cast<Index>(UINT32_MAX)) {
    throw Error(ErrorKind::invalid_input, std::string(what) + " out of range");
  }
  return static_cast<std::uint32_t>(v);
}

// Validates magic, header and payload size; returns (rows, cols).
std::pair<Index, Index> parse_header(const Bytes& bytes, const char* magic,
                                     const char* rows_name,
                                     const char* cols_name) {
  if (bytes.size() < 4) {
    throw Error(ErrorKind::truncated, "file shorter than its magic");
  }
  if (std::memcmp(bytes.data(), magic, 4) != 0) {
    throw Error(ErrorKind::bad_magic,
                std::string("expected magic '") + magic + "'");
  }
  if (bytes.size() < kHeaderBytes) {
    throw Error(ErrorKind::truncated, "header is truncated");
  }
  const std::uint64_t rows = get_u32(bytes, 4);
  const std::uint64_t cols = get_u32(bytes, 8);
  if (rows == 0 || cols == 0) {
    throw Error(ErrorKind::invalid_input,
                std::string(rows_name) + " and " + cols_name + " must be >= 1");
  }
  const std::uint64_t expected = kHeaderBytes + 4 * rows * cols;
  if (bytes.size() < expected) {
    throw Error(ErrorKind::truncated,
                "payload has " + std::to_string((bytes.size() - kHeaderBytes) / 4) +
                    " floats, expected " + std::to_string(rows * cols));
  }
  if (bytes.size() > expected) {
    throw Error(ErrorKind::trailing_bytes,
                std::to_string(bytes.size() - expected) +
                    " bytes after the payload");
  }
  return {static_cast<Index>(rows), static_cast<Index>(cols)};
}

template <typename Mat>
void decode_payload(const Bytes& bytes, Mat& out) {
  size_t offset = kHeaderBytes;
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index j = 0; j < out.cols(); ++j) {
      const float v = get_f32(bytes, offset);
      offset += 4;
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::non_finite,
                    "non-finite value at (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
      }
      out(i, j) = static_cast<double>(v);
    }
  }
}

template <typename Mat>
Bytes encode(const char* magic, const Mat& m) {
  Bytes out(magic, magic + 4);
  out.reserve(kHeaderBytes + 4 * static_cast<size_t>(m.size()));
  put_u32(out, checked_u32(m.rows(), "row count"));
  put_u32(out, checked_u32(m.cols(), "column count"));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) put_f32(out, static_cast<float>(m(i, j)));
  }
  return out;
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw Error(ErrorKind::parse, std::string("missing field '") + key + "'");
  }
  return j.at(key).get<T>();
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path,
                const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "short write to " + path.string());
}

TokenMatrix decode_tokens(const std::vector<std::uint8_t>& bytes) {
  const auto [rows, cols] = parse_header(bytes, "PTM1", "n_tokens", "dim");
  TokenMatrix tokens(rows, cols);
  decode_payload(bytes, tokens);
  return tokens;
}

std::vector<std::uint8_t> encode_tokens(const TokenMatrix& tokens) {
  validate_tokens(tokens);
  return encode("PTM1", tokens);
}

TokenMatrix read_tokens(const std::filesystem::path& path) {
  return decode_tokens(read_file(path));
}

void write_tokens(const TokenMatrix& tokens, const std::filesystem::path& path) {
  write_file(path, encode_tokens(tokens));
}

Matrix decode_saliency(const std::vector<std::uint8_t>& bytes) {
  const auto [heads, n] = parse_header(bytes, "PSV1", "n_heads", "n_tokens");
  Matrix scores(heads, n);
  decode_payload(bytes, scores);
  if (scores.minCoeff() < 0.0) {
    throw Error(ErrorKind::invalid_input, "saliency file has negative scores");
  }
  return scores;
}

std::vector<std::uint8_t> encode_saliency(const Matrix& head_scores) {
  if (!head_scores.allFinite() ||
      (head_scores.size() > 0 && head_scores.minCoeff() < 0.0)) {
    throw Error(ErrorKind::invalid_input,
                "saliency scores must be finite and nonnegative");
  }
  return encode("PSV1", head_scores);
}

Matrix read_saliency(const std::filesystem::path& path) {
  return decode_saliency(read_file(path));
}

void write_saliency(const Matrix& head_scores,
                    const std::filesystem::path& path) {
  write_file(path, encode_saliency(head_scores));
}

std::string entropy_to_json(const EntropyReport& report) {
  json j;
  j["metric"] = std::string(to_string(report.metric));
  j["raw_entropy"] = report.raw_entropy;
  j["normalized_entropy"] = report.normalized_entropy;
  j["normalizer"] = report.normalizer;
  return j.dump(2) + "\n";
}

std::string selection_to_json(const SelectionResult& result) {
  json j;
  j["schema"] = kSelectionSchema;
  j["total_budget"] = result.total_budget;
  j["selected"] = result.selected.indices();
  json stages = json::array();
  for (Stage s : result.stage_of) stages.push_back(std::string(to_string(s)));
  j["stage_of"] = std::move(stages);
  j["coverage_order"] = result.coverage_order;
  j["t_sal"] = result.split.t_sal;
  j["t_cov"] = result.split.t_cov;
  j["coverage_ratio"] = result.split.coverage_ratio;
  j["normalized_entropy"] = result.split.normalized_entropy;
  j["entropy"] = json::parse(entropy_to_json(result.entropy));
  j["diagnostics"] = result.diagnostics;
  return j.dump(2) + "\n";
}

SelectionResult selection_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (field<int>(j, "schema") != kSelectionSchema) {
      throw Error(ErrorKind::parse, "unsupported selection schema");
    }
    SelectionResult r;
    r.total_budget = field<Index>(j, "total_budget");
    r.selected = IndexSet::from_sorted(field<std::vector<Index>>(j, "selected"));
    for (const auto& s : field<std::vector<std::string>>(j, "stage_of")) {
      r.stage_of.push_back(parse_stage(s));
    }
    if (r.stage_of.size() != r.selected.indices().size()) {
      throw Error(ErrorKind::parse, "stage_of does not match selected");
    }
    r.coverage_order = field<std::vector<Index>>(j, "coverage_order");
    r.split.t_sal = field<Index>(j, "t_sal");
    r.split.t_cov = field<Index>(j, "t_cov");
    r.split.coverage_ratio = field<double>(j, "coverage_ratio");
    r.split.normalized_entropy = field<double>(j, "normalized_entropy");
    const json& e = j.at("entropy");
    r.entropy.metric = parse_entropy_metric(field<std::string>(e, "metric"));
    r.entropy.raw_entropy = field<double>(e, "raw_entropy");
    r.entropy.normalized_entropy = field<double>(e, "normalized_entropy");
    r.entropy.normalizer = field<double>(e, "normalizer");
    r.diagnostics = field<std::map<std::string, double>>(j, "diagnostics");
    return r;
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::parse, ex.what());
  }
}

}  // namespace promprune::io
