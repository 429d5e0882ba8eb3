// Command-line front end: launch training runs, sweep the ablation grid,
// evaluate checkpoints, run the verification oracles, and render SVG plots
// from metrics CSVs.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "memr/config.hpp"
#include "memr/plotting.hpp"
#include "memr/trainer.hpp"
#include "memr/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc;
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string default_out_dir() {
  const char* env = std::getenv("MEMR_OUT_DIR");
  return env && *env ? env : "runs";
}

std::string make_run_id(const memr::TrainerConfig& cfg) {
  const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now().time_since_epoch())
                      .count();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  mix(static_cast<std::uint64_t>(ns));
  mix(cfg.seed);
  for (char c : cfg.env_name) mix(static_cast<std::uint64_t>(c));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%012llx", static_cast<unsigned long long>(h) & 0xffffffffffffULL);
  return buf;
}

json config_json(const memr::TrainerConfig& cfg) {
  json j;
  for (const auto& [k, v] : memr::parse_kv_string(memr::config_to_string(cfg))) j[k] = v;
  return j;
}

void write_manifest(const fs::path& path, const std::string& run_id,
                    const memr::TrainerConfig& cfg, const std::string& started,
                    const std::string& ended, const fs::path& metrics_csv,
                    const fs::path& run_dir) {
  json j;
  j["run_id"] = run_id;
  j["started_at"] = started;
  j["ended_at"] = ended.empty() ? json(nullptr) : json(ended);
  j["config"] = config_json(cfg);
  j["artifacts"]["metrics_csv"] = metrics_csv.string();
  j["artifacts"]["run_dir"] = run_dir.string();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write manifest '" + path.string() + "'");
  os << j.dump(2) << "\n";
}

struct TrainFlags {
  std::string config_file;
  std::string out_dir;
  std::string run_id;
  bool paper_scale = false;
  long checkpoint_every = 0;  // 0: final checkpoint only
};

// Registers TrainerConfig fields as long flags; values land in `kv` only
// when the user passes them, so file values and profile defaults are
// overridden selectively. Flags listed in `skip` are left to the caller
// (the ablate command reuses three of them as grid axes).
void add_config_flags(CLI::App* cmd, std::map<std::string, std::string>& kv,
                      const std::set<std::string>& skip = {}) {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"env", "environment name (pendulum|pointmass)"},
      {"seed", "master RNG seed"},
      {"steps", "total environment steps"},
      {"model-update-freq", "environment steps between model retrains"},
      {"rollouts-per-step", "model rollouts per environment step (M)"},
      {"alpha", "prioritization strength in [0,1]"},
      {"beta-start", "importance-weight exponent at step 0"},
      {"beta-end", "importance-weight exponent at the final step"},
      {"policy-epochs", "epochs per online model-policy fit (D)"},
      {"policy-updates", "SAC update rounds per environment step (G)"},
      {"batch-size", "SAC batch size (B), at most M"},
      {"model-size", "model dataset capacity (segments * M)"},
      {"env-buffer-capacity", "environment replay capacity"},
      {"initial-random-steps", "uniform-random warmup steps"},
      {"eval-interval", "environment steps between metric rows"},
      {"eval-episodes", "episodes per evaluation"},
      {"gamma", "discount factor"},
      {"tau", "target smoothing coefficient"},
      {"sac-lr", "SAC learning rate"},
      {"alpha-lr", "temperature learning rate"},
      {"model-lr", "dynamics model learning rate"},
      {"policy-model-lr", "model-data policy learning rate"},
      {"dynamics-hidden", "dynamics hidden sizes, comma separated"},
      {"sac-hidden", "SAC hidden sizes, comma separated"},
      {"policy-model-hidden", "model-data policy hidden sizes"},
      {"ensemble-size", "dynamics ensemble members"},
      {"model-batch-size", "dynamics training minibatch"},
      {"model-max-epochs", "dynamics training epoch cap"},
      {"model-patience", "early-stop patience in epochs"},
      {"model-holdout", "holdout fraction for early stopping"},
      {"model-min-train", "minimum transitions before training"},
      {"model-from-scratch", "reinitialize model members each retrain"},
      {"policy-model-minibatch", "online fit minibatch"},
      {"real-data-fraction", "fraction of each SAC batch from D_env"},
  };
  for (const auto& [flag, help] : keys) {
    if (skip.count(flag)) continue;
    std::string key = flag;
    for (auto& c : key) {
      if (c == '-') c = '_';
    }
    if (key == "steps") key = "total_num_steps";
    if (key == "model_size") key = "model_dataset_size";
    cmd->add_option_function<std::string>(
        "--" + flag, [&kv, key](const std::string& v) { kv[key] = v; }, help);
  }
}

memr::TrainerConfig build_config(const TrainFlags& flags,
                                 const std::map<std::string, std::string>& flag_kv) {
  memr::TrainerConfig cfg;
  if (flags.paper_scale) cfg.apply_paper_scale();
  if (!flags.config_file.empty()) memr::apply_kv(cfg, memr::parse_kv_file(flags.config_file));
  memr::apply_kv(cfg, memr::KvMap(flag_kv.begin(), flag_kv.end()));
  cfg.validate();
  return cfg;
}

int run_training(const memr::TrainerConfig& cfg, const TrainFlags& flags) {
  const std::string run_id = flags.run_id.empty() ? make_run_id(cfg) : flags.run_id;
  const fs::path run_dir = fs::path(flags.out_dir) / run_id;
  fs::create_directories(run_dir);
  const fs::path manifest_path = run_dir / "manifest.json";
  const fs::path metrics_path = run_dir / "metrics.csv";
  const std::string started = iso_now();
  write_manifest(manifest_path, run_id, cfg, started, "", metrics_path, run_dir);

  std::cout << "run " << run_id << " -> " << run_dir.string() << "\n";
  std::cout << memr::config_to_string(cfg);

  std::ofstream metrics(metrics_path);
  if (!metrics) throw std::runtime_error("cannot open metrics file");
  metrics << memr::metrics_csv_header() << "\n";
  metrics.flush();

  auto trainer = std::make_unique<memr::Trainer>(cfg);
  trainer->set_metrics_stream(&metrics);

  const long every = flags.checkpoint_every > 0 ? flags.checkpoint_every
                                                : cfg.total_num_steps;
  while (trainer->current_step() < cfg.total_num_steps) {
    trainer->run_until(trainer->current_step() + every);
    if (trainer->current_step() < cfg.total_num_steps) {
      const fs::path ckpt =
          run_dir / ("ckpt_" + std::to_string(trainer->current_step()) + ".memr");
      trainer->save_checkpoint(ckpt.string());
      std::cout << "checkpoint " << ckpt.string() << "\n";
    }
  }
  trainer->save_checkpoint((run_dir / "ckpt_final.memr").string());
  write_manifest(manifest_path, run_id, cfg, started, iso_now(), metrics_path, run_dir);

  if (!trainer->metrics().empty()) {
    const auto& last = trainer->metrics().back();
    std::cout << "final eval return " << last.eval_return << " at step " << last.step
              << "\n";
  }
  return kExitOk;
}

int cmd_train(const TrainFlags& flags, const std::map<std::string, std::string>& flag_kv) {
  memr::TrainerConfig cfg;
  try {
    cfg = build_config(flags, flag_kv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    return run_training(cfg, flags);
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  }
}

struct AblateFlags {
  std::string alphas;
  std::string policy_updates;
  std::string model_sizes;
  std::string seeds = "0";
};

int cmd_ablate(const TrainFlags& flags, const std::map<std::string, std::string>& flag_kv,
               const AblateFlags& ab) {
  memr::TrainerConfig base;
  std::vector<double> alphas;
  std::vector<int> updates, seeds;
  std::vector<long> sizes;
  try {
    base = build_config(flags, flag_kv);
    if (!ab.alphas.empty()) alphas = memr::parse_double_list(ab.alphas);
    if (!ab.policy_updates.empty()) updates = memr::parse_int_list(ab.policy_updates);
    if (!ab.model_sizes.empty()) {
      for (int v : memr::parse_int_list(ab.model_sizes)) sizes.push_back(v);
    }
    seeds = memr::parse_int_list(ab.seeds);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (alphas.empty()) alphas = {base.alpha};
  if (updates.empty()) updates = {base.policy_updates};
  if (sizes.empty()) sizes = {base.model_dataset_size};

  const std::string grid_id = make_run_id(base);
  const fs::path grid_dir = fs::path(flags.out_dir) / ("ablate_" + grid_id);
  fs::create_directories(grid_dir);
  const fs::path agg_path = grid_dir / "ablation.csv";
  std::ofstream agg(agg_path);
  agg << "alpha,policy_updates,model_dataset_size,seed,status,final_return,"
         "final_discounted,mean_knn_entropy\n";

  struct Key {
    double alpha;
    int updates;
    long size;
    bool operator<(const Key& o) const {
      return std::tie(alpha, updates, size) < std::tie(o.alpha, o.updates, o.size);
    }
  };
  std::map<Key, std::vector<double>> finals;

  for (double a : alphas) {
    for (int g : updates) {
      for (long ms : sizes) {
        for (int seed : seeds) {
          memr::TrainerConfig cfg = base;
          cfg.alpha = a;
          cfg.policy_updates = g;
          cfg.model_dataset_size = ms;
          cfg.seed = static_cast<std::uint64_t>(seed);
          char label[128];
          std::snprintf(label, sizeof(label), "alpha%.2f_g%d_ms%ld_seed%d", a, g, ms,
                        seed);
          std::cout << "=== ablation run " << label << " ===\n";
          try {
            cfg.validate();
            memr::Trainer trainer(cfg);
            std::ofstream metrics(grid_dir / (std::string(label) + "_metrics.csv"));
            metrics << memr::metrics_csv_header() << "\n";
            trainer.set_metrics_stream(&metrics);
            trainer.run();
            const auto& rows = trainer.metrics();
            double final_ret = 0.0, final_disc = 0.0, mean_ent = 0.0;
            if (!rows.empty()) {
              final_ret = rows.back().eval_return;
              final_disc = rows.back().discounted_return;
              for (const auto& r : rows) mean_ent += r.knn_entropy;
              mean_ent /= static_cast<double>(rows.size());
            }
            agg << a << "," << g << "," << ms << "," << seed << ",ok," << final_ret
                << "," << final_disc << "," << mean_ent << "\n";
            agg.flush();
            finals[Key{a, g, ms}].push_back(final_ret);
          } catch (const std::exception& e) {
            std::cerr << "run " << label << " failed: " << e.what() << "\n";
            agg << a << "," << g << "," << ms << "," << seed << ",failed,0,0,0\n";
            agg.flush();
          }
        }
      }
    }
  }

  std::cout << "\nsummary (final mean return across seeds)\n";
  std::cout << "alpha  G  model_size  mean     std\n";
  for (const auto& [key, vals] : finals) {
    double m = 0.0;
    for (double v : vals) m += v;
    m /= static_cast<double>(vals.size());
    double sd = 0.0;
    if (vals.size() > 1) {
      for (double v : vals) sd += (v - m) * (v - m);
      sd = std::sqrt(sd / static_cast<double>(vals.size() - 1));
    }
    std::printf("%-6.2f %-2d %-10ld %-8.1f %-8.1f\n", key.alpha, key.updates, key.size,
                m, sd);
  }
  std::cout << "aggregate CSV: " << agg_path.string() << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, int episodes, std::uint64_t seed) {
  try {
    auto trainer = memr::Trainer::load_checkpoint(checkpoint);
    const auto res = trainer->evaluate(episodes, seed);
    std::cout << "checkpoint " << checkpoint << " at step " << trainer->current_step()
              << "\n";
    std::cout << "mean return " << res.mean_return << "\n";
    std::cout << "mean discounted return " << res.mean_discounted << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "eval failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_verify(const std::string& lemma_ns, int theorem_trials, std::uint64_t seed) {
  std::vector<memr::verify::CheckResult> results;
  try {
    if (lemma_ns.empty() && theorem_trials <= 0) {
      results = memr::verify::run_default_suite(seed);
    } else {
      memr::Rng rng(seed);
      if (!lemma_ns.empty()) {
        for (int n : memr::parse_int_list(lemma_ns)) {
          results.push_back(memr::verify::lemma_bound(n, 1000, rng));
        }
      }
      if (theorem_trials > 0) {
        results.push_back(memr::verify::theorem_ranking(theorem_trials, rng));
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
    all_pass &= r.pass;
  }
  return all_pass ? kExitOk : kExitRuntime;
}

struct PlotFlags {
  std::vector<std::string> csvs;
  std::string out_dir = ".";
  std::string prefix = "plot";
  int updates_per_step = 5;
  int rollouts_per_step = 40;
  long rollout_start = 1000;
};

int cmd_plot(const PlotFlags& flags) {
  std::vector<memr::CsvTable> tables;
  try {
    for (const auto& path : flags.csvs) tables.push_back(memr::read_csv(path));
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    const auto steps = tables.front().column("step");
    std::vector<std::vector<double>> returns;
    for (const auto& t : tables) {
      const auto s = t.column("step");
      if (s != steps) {
        std::cerr << "error: CSV step columns do not align across files\n";
        return kExitUsage;
      }
      returns.push_back(t.column("eval_return"));
    }

    fs::create_directories(flags.out_dir);
    const fs::path dir(flags.out_dir);

    auto series = memr::aggregate_series(steps, returns);
    memr::write_line_plot_svg((dir / (flags.prefix + "_return_vs_steps.svg")).string(),
                              "Return vs environment steps", "environment steps",
                              "mean eval return", series);

    std::vector<double> update_x(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
      update_x[i] = static_cast<double>(flags.updates_per_step) *
                    std::max(0.0, steps[i] - static_cast<double>(flags.rollout_start) + 1.0);
    }
    auto series_u = memr::aggregate_series(update_x, returns);
    memr::write_line_plot_svg((dir / (flags.prefix + "_return_vs_updates.svg")).string(),
                              "Return vs policy updates", "policy updates",
                              "mean eval return", series_u);

    std::vector<double> rollouts(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
      rollouts[i] = static_cast<double>(flags.rollouts_per_step) *
                    std::max(0.0, steps[i] - static_cast<double>(flags.rollout_start) + 1.0);
    }
    memr::PlotSeries series_r;
    series_r.x = steps;
    series_r.mean = rollouts;
    memr::write_line_plot_svg((dir / (flags.prefix + "_rollouts_vs_steps.svg")).string(),
                              "Model rollouts vs environment steps", "environment steps",
                              "model rollouts generated", series_r);
    std::cout << "wrote 3 plots under " << dir.string() << " with prefix '"
              << flags.prefix << "'\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "plot failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum-entropy single-step model rollouts for policy optimization"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  train_flags.out_dir = default_out_dir();
  std::map<std::string, std::string> train_kv;
  auto* train = app.add_subcommand("train", "run a training session");
  add_config_flags(train, train_kv);
  train->add_option("--config", train_flags.config_file, "TOML-style key=value config file");
  train->add_option("--out-dir", train_flags.out_dir, "artifact root (or MEMR_OUT_DIR)");
  train->add_option("--run-id", train_flags.run_id, "explicit run id");
  train->add_option("--checkpoint-every", train_flags.checkpoint_every,
                    "periodic checkpoint interval in steps (0: final only)");
  train->add_flag("--paper-scale", train_flags.paper_scale,
                  "full-size profile: M=400, B=256, 400k steps, wide nets");

  AblateFlags ablate_flags;
  TrainFlags ablate_base;
  ablate_base.out_dir = default_out_dir();
  std::map<std::string, std::string> ablate_kv;
  auto* ablate = app.add_subcommand("ablate", "sequential grid over ablation axes");
  add_config_flags(ablate, ablate_kv, {"alpha", "policy-updates", "model-size"});
  ablate->add_option("--config", ablate_base.config_file, "base config file");
  ablate->add_option("--out-dir", ablate_base.out_dir, "artifact root");
  ablate->add_flag("--paper-scale", ablate_base.paper_scale, "full-size base profile");
  ablate->add_option("--alpha", ablate_flags.alphas,
                     "comma list of prioritization strengths");
  ablate->add_option("--policy-updates", ablate_flags.policy_updates,
                     "comma list of G values");
  ablate->add_option("--model-size", ablate_flags.model_sizes,
                     "comma list of model dataset sizes");
  ablate->add_option("--seeds", ablate_flags.seeds, "comma list of seeds");

  std::string eval_checkpoint;
  int eval_episodes = 10;
  std::uint64_t eval_seed = 0;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint deterministically");
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint path")->required();
  eval->add_option("--episodes", eval_episodes, "episodes to average");
  eval->add_option("--seed", eval_seed, "evaluation seed");

  std::string verify_lemma_ns;
  int verify_theorem_trials = 0;
  std::uint64_t verify_seed = 0;
  auto* verify = app.add_subcommand("verify", "run the oracle checks");
  verify->add_option("--lemma-n", verify_lemma_ns,
                     "comma list of N values for the entropy-gain bound sweep");
  verify->add_option("--theorem-trials", verify_theorem_trials,
                     "trial count for the ranking check");
  verify->add_option("--seed", verify_seed, "oracle RNG seed");

  PlotFlags plot_flags;
  auto* plot = app.add_subcommand("plot", "render SVG training curves from metrics CSVs");
  plot->add_option("csv", plot_flags.csvs, "metrics CSV files (one per seed)")
      ->required()
      ->expected(-1);
  plot->add_option("--out-dir", plot_flags.out_dir, "output directory");
  plot->add_option("--prefix", plot_flags.prefix, "output filename prefix");
  plot->add_option("--updates-per-step", plot_flags.updates_per_step,
                   "G used to derive the policy-update axis");
  plot->add_option("--rollouts-per-step", plot_flags.rollouts_per_step,
                   "M used to derive the rollout counter");
  plot->add_option("--rollout-start", plot_flags.rollout_start,
                   "first step that generated rollouts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (train->parsed()) return cmd_train(train_flags, train_kv);
  if (ablate->parsed()) return cmd_ablate(ablate_base, ablate_kv, ablate_flags);
  if (eval->parsed()) return cmd_eval(eval_checkpoint, eval_episodes, eval_seed);
  if (verify->parsed()) return cmd_verify(verify_lemma_ns, verify_theorem_trials, verify_seed);
  if (plot->parsed()) return cmd_plot(plot_flags);
  return kExitUsage;
}
