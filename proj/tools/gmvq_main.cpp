// gmvq: train and evaluate Gaussian-mixture vector-quantization models on
// desk-scale synthetic data, and run the Gumbel-Softmax gradient-bias sweep.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gmvq/bias_experiment.hpp"
#include "gmvq/checkpoint.hpp"
#include "gmvq/config.hpp"
#include "gmvq/dataset.hpp"
#include "gmvq/log.hpp"
#include "gmvq/stats.hpp"
#include "gmvq/train.hpp"

namespace fs = std::filesystem;

namespace {

struct RunOutputs {
  gmvq::TrainResult result;
  gmvq::EvalResult eval;
};

RunOutputs run_training(const gmvq::ModelConfig& cfg, const gmvq::Dataset& data, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  RunOutputs out;
  out.result = gmvq::train(cfg, data);
  gmvq::write_metrics_csv((out_dir / "metrics.csv").string(), out.result.history);
  gmvq::save_checkpoint((out_dir / "checkpoint.gmvq").string(), out.result.model);
  out.eval = gmvq::evaluate(out.result.model, data);
  return out;
}

int cmd_gen_data(long clusters, long dim, long n, double spread, std::uint64_t seed, const std::string& out) {
  gmvq::Dataset ds = gmvq::make_synthetic_dataset(clusters, dim, n, spread, seed);
  gmvq::write_dataset(out, ds);
  gmvq::log_info("wrote %ld x %ld dataset (%ld clusters, spread %.4g) to %s", (long)ds.size(),
                 (long)ds.dim(), clusters, spread, out.c_str());
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path, const std::string& out_dir,
              bool has_seed, std::uint64_t seed) {
  gmvq::ModelConfig cfg = gmvq::load_config(config_path);
  if (has_seed) cfg.seed = seed;
  gmvq::Dataset data = gmvq::read_dataset(data_path);
  RunOutputs out = run_training(cfg, data, out_dir);
  std::printf("train: quantizer=%s epochs=%ld eval_mse=%.6g eval_perplexity=%.4f%s\n",
              gmvq::to_string(cfg.quantizer).c_str(), cfg.epochs, out.eval.mse, out.eval.perplexity,
              out.result.diverged ? " (DIVERGED, rolled back)" : "");
  return out.result.diverged ? 1 : 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path) {
  gmvq::Model m = gmvq::load_checkpoint(checkpoint_path);
  gmvq::Dataset data = gmvq::read_dataset(data_path);
  gmvq::EvalResult r = gmvq::evaluate(m, data);
  std::printf("eval: mse=%.6g perplexity=%.4f\n", r.mse, r.perplexity);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& data_path, const std::string& out_dir,
              const std::vector<double>& betas, const std::vector<double>& gammas, int seeds) {
  gmvq::ModelConfig base = gmvq::load_config(config_path);
  gmvq::Dataset data = gmvq::read_dataset(data_path);
  fs::create_directories(out_dir);

  std::ofstream summary(fs::path(out_dir) / "summary.csv");
  if (!summary) throw std::runtime_error("gmvq: cannot open sweep summary for writing");
  summary << "beta,gamma,seed,final_train_mse,eval_mse,eval_perplexity\n";

  // perplexities[seed] aligned with betas, for the per-seed trend report.
  std::vector<std::vector<double>> ppl_by_seed(static_cast<size_t>(seeds));
  for (double beta : betas) {
    for (double gamma : gammas) {
      for (int s = 0; s < seeds; ++s) {
        gmvq::ModelConfig cfg = base;
        cfg.beta = beta;
        cfg.gamma = gamma;
        cfg.seed = base.seed + static_cast<std::uint64_t>(s);
        char cell[128];
        std::snprintf(cell, sizeof cell, "beta%.3g_gamma%.3g_seed%d", beta, gamma, s);
        RunOutputs out = run_training(cfg, data, fs::path(out_dir) / cell);
        const double train_mse = out.result.history.empty() ? 0.0 : out.result.history.back().mse;
        char line[256];
        std::snprintf(line, sizeof line, "%.12g,%.12g,%d,%.12g,%.12g,%.12g\n", beta, gamma, s, train_mse,
                      out.eval.mse, out.eval.perplexity);
        summary << line;
        if (gammas.size() == 1) ppl_by_seed[static_cast<size_t>(s)].push_back(out.eval.perplexity);
        gmvq::log_info("sweep cell %s: eval_mse=%.6g eval_perplexity=%.4f", cell, out.eval.mse,
                       out.eval.perplexity);
      }
    }
  }

  if (betas.size() >= 2 && gammas.size() == 1) {
    for (int s = 0; s < seeds; ++s) {
      std::vector<double> b(betas.begin(), betas.end());
      const double rho = gmvq::spearman(b, ppl_by_seed[static_cast<size_t>(s)]);
      std::printf("sweep: seed %d spearman(beta, eval_perplexity) = %.4f\n", s, rho);
    }
  }
  std::printf("sweep: wrote %s/summary.csv\n", out_dir.c_str());
  return 0;
}

int cmd_bias(int seeds, int grid, int repeats, double estimator_tau, std::uint64_t master_seed,
             const std::string& out) {
  gmvq::BiasSweepConfig cfg;
  cfg.scorer_seeds = seeds;
  cfg.grid_points = grid;
  cfg.repeats = repeats;
  cfg.estimator_tau = estimator_tau;
  cfg.master_seed = master_seed;
  gmvq::BiasSweepResult res = gmvq::run_bias_sweep(cfg);
  std::ofstream os(out);
  if (!os) throw std::runtime_error("gmvq: cannot open '" + out + "' for writing");
  gmvq::write_bias_csv(os, res);
  std::printf("pearson_rho,p_value\n%.12g,%.12g\n", res.corr.rho, res.corr.p_value);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian Mixture Vector Quantization: training, evaluation and the gradient-bias sweep"};
  app.require_subcommand(1);

  // gen-data
  long gd_clusters = 16, gd_dim = 64, gd_n = 4096;
  double gd_spread = 0.1;
  std::uint64_t gd_seed = 7;
  std::string gd_out;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic Gaussian-mixture dataset");
  gen->add_option("--clusters", gd_clusters, "Number of mixture components")->check(CLI::Range(2l, 1000000l));
  gen->add_option("--dim", gd_dim, "Data dimensionality")->check(CLI::PositiveNumber);
  gen->add_option("--n", gd_n, "Number of samples")->check(CLI::PositiveNumber);
  gen->add_option("--spread", gd_spread, "Within-cluster standard deviation");
  gen->add_option("--seed", gd_seed, "RNG seed");
  gen->add_option("--out", gd_out, "Output dataset path")->required();

  // train
  std::string tr_config, tr_data, tr_out;
  std::uint64_t tr_seed = 0;
  auto* tr = app.add_subcommand("train", "Train a model from a config file");
  tr->add_option("--config", tr_config, "Config file (key = value lines)")->required();
  tr->add_option("--data", tr_data, "Dataset file")->required();
  tr->add_option("--out", tr_out, "Run directory (metrics.csv, checkpoint.gmvq)")->required();
  auto* tr_seed_opt = tr->add_option("--seed", tr_seed, "Override the config seed");

  // eval
  std::string ev_ckpt, ev_data;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  ev->add_option("--data", ev_data, "Dataset file")->required();

  // sweep
  std::string sw_config, sw_data, sw_out;
  std::vector<double> sw_betas = {0.5, 1.0, 2.0, 4.0};
  std::vector<double> sw_gammas = {0.1};
  int sw_seeds = 3;
  auto* sw = app.add_subcommand("sweep", "Grid of training runs over beta/gamma");
  sw->add_option("--config", sw_config, "Base config file")->required();
  sw->add_option("--data", sw_data, "Dataset file")->required();
  sw->add_option("--out", sw_out, "Sweep output directory")->required();
  sw->add_option("--beta", sw_betas, "Beta grid (comma separated)")->delimiter(',');
  sw->add_option("--gamma", sw_gammas, "Gamma grid (comma separated)")->delimiter(',');
  sw->add_option("--seeds", sw_seeds, "Seeds per cell")->check(CLI::PositiveNumber);

  // bias
  int bi_seeds = 20, bi_grid = 12, bi_repeats = 50;
  double bi_tau = 0.5;
  std::uint64_t bi_master = 0;
  std::string bi_out;
  auto* bi = app.add_subcommand("bias", "Gumbel-Softmax gradient bias vs entropy sweep");
  bi->add_option("--seeds", bi_seeds, "Scorer seeds per grid point")->check(CLI::PositiveNumber);
  bi->add_option("--grid", bi_grid, "Entropy grid points (>= 10)");
  bi->add_option("--repeats", bi_repeats, "Estimator repeats per sample")->check(CLI::PositiveNumber);
  bi->add_option("--estimator-tau", bi_tau, "Gumbel-Softmax temperature inside the estimator");
  bi->add_option("--master-seed", bi_master, "Master seed");
  bi->add_option("--out", bi_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gd_clusters, gd_dim, gd_n, gd_spread, gd_seed, gd_out);
    if (tr->parsed()) return cmd_train(tr_config, tr_data, tr_out, tr_seed_opt->count() > 0, tr_seed);
    if (ev->parsed()) return cmd_eval(ev_ckpt, ev_data);
    if (sw->parsed()) return cmd_sweep(sw_config, sw_data, sw_out, sw_betas, sw_gammas, sw_seeds);
    if (bi->parsed()) return cmd_bias(bi_seeds, bi_grid, bi_repeats, bi_tau, bi_master, bi_out);
  } catch (const gmvq::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
