// promprune: command-line front end for entropy-guided token selection.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "promprune/budget.hpp"
#include "promprune/cost_model.hpp"
#include "promprune/io.hpp"
#include "promprune/oracle.hpp"
#include "promprune/pipeline.hpp"
#include "promprune/prominence.hpp"
#include "promprune/synth.hpp"

namespace pp = promprune;
using nlohmann::json;

namespace {

constexpr int kExitOracleViolation = 9;
constexpr int kExitUsage = 2;

int exit_code(pp::ErrorKind kind) {
  switch (kind) {
    case pp::ErrorKind::invalid_input: return 3;
    case pp::ErrorKind::degenerate_input: return 4;
    case pp::ErrorKind::invalid_budget: return 5;
    case pp::ErrorKind::instance_too_large: return 6;
    case pp::ErrorKind::bad_magic:
    case pp::ErrorKind::truncated:
    case pp::ErrorKind::trailing_bytes:
    case pp::ErrorKind::non_finite: return 7;
    case pp::ErrorKind::io: return 8;
    case pp::ErrorKind::parse: return 10;
  }
  return 1;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw pp::Error(pp::ErrorKind::io, "cannot write " + out_path);
  out << text;
}

struct SelectionArgs {
  std::string tokens;
  std::string saliency;
  std::string attention_mode = "cls";
  pp::Index budget = 64;
  std::string preset = "clip";
  std::optional<double> mu;
  double tau = pp::kDefaultTau;
  std::string diversity = "dpp";
  std::string fps_start = "lowest";
  std::string out;
};

void add_selection_flags(CLI::App* cmd, SelectionArgs& a) {
  cmd->add_option("--tokens", a.tokens, "PTM1 token file")->required();
  cmd->add_option("--saliency", a.saliency, "PSV1 saliency file")->required();
  cmd->add_option("--attention-mode", a.attention_mode,
                  "How head rows were produced")
      ->check(CLI::IsMember({"cls", "global"}));
  cmd->add_option("--budget", a.budget, "Total token budget T")->required();
  cmd->add_option("--preset", a.preset, "Encoder preset for mu")
      ->check(CLI::IsMember({"clip", "qwen25vl"}));
  cmd->add_option("--mu", a.mu, "Sigmoid midpoint (overrides --preset)");
  cmd->add_option("--tau", a.tau, "Sigmoid smoothness");
  cmd->add_option("--diversity", a.diversity, "Stage-2 selector")
      ->check(CLI::IsMember({"dpp", "fps", "fl"}));
  cmd->add_option("--fps-start", a.fps_start, "FPS initial token")
      ->check(CLI::IsMember({"lowest", "saliency"}));
  cmd->add_option("--out", a.out, "Output path (stdout if omitted)");
}

pp::CompressConfig make_config(const SelectionArgs& a) {
  pp::CompressConfig config;
  config.total_budget = a.budget;
  config.mu = a.mu.value_or(pp::preset_mu(pp::parse_encoder_preset(a.preset)));
  config.tau = a.tau;
  config.diversity = pp::parse_diversity_method(a.diversity);
  config.fps_start = a.fps_start == "saliency" ? pp::FpsStart::highest_saliency
                                               : pp::FpsStart::lowest_index;
  return config;
}

pp::SaliencyVector load_saliency(const std::string& path,
                                 const std::string& mode) {
  return pp::reduce_head_attention(pp::io::read_saliency(path),
                                   mode == "global"
                                       ? pp::AttentionReduction::global_average
                                       : pp::AttentionReduction::cls_row);
}

void log_timings(const pp::SelectionResult& r) {
  std::fprintf(stderr,
               "timing_us entropy=%.0f allocation=%.0f stage1=%.0f stage2=%.0f "
               "total=%.0f diagnostics=%.0f\n",
               r.timings.entropy_us, r.timings.allocation_us,
               r.timings.stage1_us, r.timings.stage2_us, r.timings.total_us,
               r.timings.diagnostics_us);
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

json latency_summary(const std::vector<double>& us) {
  return {{"p50_ms", percentile(us, 0.5) / 1e3},
          {"p90_ms", percentile(us, 0.9) / 1e3},
          {"max_ms", percentile(us, 1.0) / 1e3}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-guided visual token selection"};
  app.require_subcommand(1);

  // entropy
  std::string ent_tokens, ent_saliency, ent_metric = "spectral",
                                        ent_mode = "cls", ent_out;
  auto* entropy_cmd = app.add_subcommand("entropy", "Prominence entropy of a sample");
  entropy_cmd->add_option("--tokens", ent_tokens, "PTM1 token file");
  entropy_cmd->add_option("--saliency", ent_saliency, "PSV1 file (attn metric)");
  entropy_cmd->add_option("--attention-mode", ent_mode)
      ->check(CLI::IsMember({"cls", "global"}));
  entropy_cmd->add_option("--metric", ent_metric)
      ->check(CLI::IsMember({"spectral", "norm", "attn"}));
  entropy_cmd->add_option("--out", ent_out);

  // allocate
  std::string alloc_tokens, alloc_preset = "clip", alloc_out;
  pp::Index alloc_budget = 64;
  std::optional<double> alloc_mu;
  double alloc_tau = pp::kDefaultTau;
  auto* allocate_cmd = app.add_subcommand("allocate", "Entropy and budget split");
  allocate_cmd->add_option("--tokens", alloc_tokens)->required();
  allocate_cmd->add_option("--budget", alloc_budget)->required();
  allocate_cmd->add_option("--preset", alloc_preset)
      ->check(CLI::IsMember({"clip", "qwen25vl"}));
  allocate_cmd->add_option("--mu", alloc_mu);
  allocate_cmd->add_option("--tau", alloc_tau);
  allocate_cmd->add_option("--out", alloc_out);

  // compress / compress-fixed
  SelectionArgs comp;
  auto* compress_cmd = app.add_subcommand("compress", "Full two-stage selection");
  add_selection_flags(compress_cmd, comp);

  SelectionArgs fixed;
  pp::Index t_sal_fixed = 0;
  auto* fixed_cmd =
      app.add_subcommand("compress-fixed", "Selection with a fixed saliency budget");
  add_selection_flags(fixed_cmd, fixed);
  fixed_cmd->add_option("--t-sal-fixed", t_sal_fixed)->required();

  // oracle
  pp::Index trials = 200, max_n = 16, max_k = 6;
  std::uint64_t oracle_seed = 7;
  auto* oracle_cmd =
      app.add_subcommand("oracle", "Check greedy DPP against naive and exhaustive search");
  oracle_cmd->add_option("--trials", trials);
  oracle_cmd->add_option("--max-n", max_n);
  oracle_cmd->add_option("--max-k", max_k);
  oracle_cmd->add_option("--seed", oracle_seed);

  // synth
  pp::Index syn_n = 576, syn_d = 1024, syn_k = 16;
  double syn_noise = 0.01;
  std::uint64_t syn_seed = 0;
  std::string syn_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic token/saliency files");
  synth_cmd->add_option("--n", syn_n);
  synth_cmd->add_option("--d", syn_d);
  synth_cmd->add_option("--k", syn_k, "Number of equal-energy directions");
  synth_cmd->add_option("--noise", syn_noise);
  synth_cmd->add_option("--seed", syn_seed);
  synth_cmd->add_option("--out", syn_out, "Output prefix (.ptm/.psv appended)")
      ->required();

  // bench
  std::vector<pp::Index> bench_n{576, 2880}, bench_d{1024}, bench_budget{64, 320};
  pp::Index bench_reps = 5, bench_k = 16;
  double bench_noise = 0.05;
  std::uint64_t bench_seed = 0;
  std::string bench_preset = "clip", bench_diversity = "dpp";
  auto* bench_cmd = app.add_subcommand("bench", "Per-phase latency over (N, d, T) grids");
  bench_cmd->add_option("--n", bench_n);
  bench_cmd->add_option("--d", bench_d);
  bench_cmd->add_option("--budget", bench_budget);
  bench_cmd->add_option("--reps", bench_reps);
  bench_cmd->add_option("--k", bench_k);
  bench_cmd->add_option("--noise", bench_noise);
  bench_cmd->add_option("--seed", bench_seed);
  bench_cmd->add_option("--preset", bench_preset)
      ->check(CLI::IsMember({"clip", "qwen25vl"}));
  bench_cmd->add_option("--diversity", bench_diversity)
      ->check(CLI::IsMember({"dpp", "fps", "fl"}));

  // flops
  pp::ModelCostSpec cost = pp::llava_next_7b();
  std::vector<std::int64_t> visual_tokens{2880, 320};
  auto* flops_cmd = app.add_subcommand("flops", "Prefill FLOPs and KV cache estimate");
  flops_cmd->add_option("--visual-tokens", visual_tokens,
                        "Visual token counts; reductions are relative to the first");
  flops_cmd->add_option("--params", cost.n_params);
  flops_cmd->add_option("--hidden", cost.hidden_dim);
  flops_cmd->add_option("--layers", cost.n_layers);
  flops_cmd->add_option("--intermediate", cost.intermediate_dim);
  flops_cmd->add_option("--text-tokens", cost.text_tokens);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[usage]: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*entropy_cmd) {
      const pp::EntropyMetric metric = pp::parse_entropy_metric(ent_metric);
      pp::EntropyReport report;
      if (metric == pp::EntropyMetric::attention) {
        if (ent_saliency.empty()) {
          throw pp::Error(pp::ErrorKind::invalid_input,
                          "--metric attn requires --saliency");
        }
        report = pp::attention_entropy(load_saliency(ent_saliency, ent_mode));
      } else {
        if (ent_tokens.empty()) {
          throw pp::Error(pp::ErrorKind::invalid_input, "--tokens is required");
        }
        const pp::TokenMatrix tokens = pp::io::read_tokens(ent_tokens);
        report = metric == pp::EntropyMetric::spectral
                     ? pp::spectral_entropy(tokens)
                     : pp::feature_norm_entropy(tokens);
      }
      emit(pp::io::entropy_to_json(report), ent_out);
    } else if (*allocate_cmd) {
      pp::CompressConfig config;
      config.total_budget = alloc_budget;
      config.mu = alloc_mu.value_or(pp::preset_mu(pp::parse_encoder_preset(alloc_preset)));
      config.tau = alloc_tau;
      const pp::TokenMatrix tokens = pp::io::read_tokens(alloc_tokens);
      if (alloc_budget > tokens.rows()) {
        throw pp::Error(pp::ErrorKind::invalid_budget, "budget exceeds token count");
      }
      const pp::EntropyReport report = pp::spectral_entropy(tokens);
      const pp::BudgetSplit split =
          pp::allocate_budget(report.normalized_entropy, config);
      json j = json::parse(pp::io::entropy_to_json(report));
      j["total_budget"] = config.total_budget;
      j["t_sal"] = split.t_sal;
      j["t_cov"] = split.t_cov;
      j["coverage_ratio"] = split.coverage_ratio;
      j["mu"] = config.mu;
      j["tau"] = config.tau;
      emit(j.dump(2) + "\n", alloc_out);
    } else if (*compress_cmd || *fixed_cmd) {
      const bool is_fixed = static_cast<bool>(*fixed_cmd);
      const SelectionArgs& a = is_fixed ? fixed : comp;
      const pp::CompressConfig config = make_config(a);
      const pp::TokenMatrix tokens = pp::io::read_tokens(a.tokens);
      const pp::SaliencyVector saliency = load_saliency(a.saliency, a.attention_mode);
      const pp::SelectionResult result =
          is_fixed ? pp::compress_fixed(tokens, saliency, t_sal_fixed, config)
                   : pp::compress(tokens, saliency, config);
      log_timings(result);
      emit(pp::io::selection_to_json(result), a.out);
    } else if (*oracle_cmd) {
      const pp::oracle::DppTrialSummary s =
          pp::oracle::run_dpp_trials(trials, max_n, max_k, oracle_seed);
      for (const auto& f : s.failures) std::cerr << "violation: " << f << "\n";
      std::printf(
          "dpp oracle: trials=%lld mismatches=%lld exceeded_optimum=%lld "
          "min_ratio=%.6f median_ratio=%.6f\n",
          static_cast<long long>(s.trials), static_cast<long long>(s.mismatches),
          static_cast<long long>(s.exceeded_optimum), s.min_ratio, s.median_ratio);
      if (!s.ok()) return kExitOracleViolation;
    } else if (*synth_cmd) {
      const pp::SyntheticSample sample =
          pp::synth_tokens(syn_n, syn_d, syn_k, syn_noise, syn_seed);
      pp::io::write_tokens(sample.tokens, syn_out + ".ptm");
      pp::io::write_saliency(sample.saliency.transpose(), syn_out + ".psv");
      std::printf("wrote %s.ptm (%lld x %lld) and %s.psv\n", syn_out.c_str(),
                  static_cast<long long>(syn_n), static_cast<long long>(syn_d),
                  syn_out.c_str());
    } else if (*bench_cmd) {
      json report = json::array();
      for (pp::Index n : bench_n) {
        for (pp::Index d : bench_d) {
          for (pp::Index budget : bench_budget) {
            if (budget > n) continue;
            const pp::SyntheticSample sample = pp::synth_tokens(
                n, d, std::min({bench_k, n, d}), bench_noise, bench_seed);
            pp::CompressConfig config;
            config.total_budget = budget;
            config.mu = pp::preset_mu(pp::parse_encoder_preset(bench_preset));
            config.diversity = pp::parse_diversity_method(bench_diversity);
            std::vector<double> ent, alloc, s1, s2, total, diag;
            pp::SelectionResult last;
            for (pp::Index r = 0; r < bench_reps; ++r) {
              last = pp::compress(sample.tokens, sample.saliency, config);
              ent.push_back(last.timings.entropy_us);
              alloc.push_back(last.timings.allocation_us);
              s1.push_back(last.timings.stage1_us);
              s2.push_back(last.timings.stage2_us);
              total.push_back(last.timings.total_us);
              diag.push_back(last.timings.diagnostics_us);
            }
            double phase_sum = 0.0, total_sum = 0.0;
            for (size_t i = 0; i < total.size(); ++i) {
              phase_sum += ent[i] + alloc[i] + s1[i] + s2[i];
              total_sum += total[i];
            }
            report.push_back(
                {{"n", n}, {"d", d}, {"budget", budget},
                 {"t_sal", last.split.t_sal}, {"t_cov", last.split.t_cov},
                 {"normalized_entropy", last.split.normalized_entropy},
                 {"reps", bench_reps},
                 {"phases",
                  {{"entropy", latency_summary(ent)},
                   {"allocation", latency_summary(alloc)},
                   {"stage1", latency_summary(s1)},
                   {"stage2", latency_summary(s2)}}},
                 {"total", latency_summary(total)},
                 {"diagnostics", latency_summary(diag)},
                 {"phase_sum_over_total", phase_sum / total_sum}});
          }
        }
      }
      std::cout << report.dump(2) << "\n";
    } else if (*flops_cmd) {
      json out = json::array();
      const double base = pp::estimate_prefill_flops(visual_tokens.front(), cost);
      for (std::int64_t v : visual_tokens) {
        const double f = pp::estimate_prefill_flops(v, cost);
        out.push_back({{"visual_tokens", v},
                       {"text_tokens", cost.text_tokens},
                       {"flops", f},
                       {"tflops", f / 1e12},
                       {"kv_cache_mib", pp::estimate_kv_cache_bytes(v, cost) /
                                            (1024.0 * 1024.0)},
                       {"flops_reduction", 1.0 - f / base}});
      }
      std::cout << out.dump(2) << "\n";
    }
  } catch (const pp::Error& e) {
    std::cerr << "error[" << pp::category(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  return 0;
}
