// Copyright 2026 The nalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// nalign command-line tool: oracle suites, gradient audits, landscape curves
// and the experiment drivers.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or input error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nalign/checkpoint.hpp"
#include "nalign/config.hpp"
#include "nalign/data.hpp"
#include "nalign/experiments.hpp"
#include "nalign/quadrature.hpp"
#include "nalign/verify.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace nalign;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flags shared by the training subcommands. Every flag overrides its config key.
struct RunFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::vector<std::string> sets;
  bool check = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "INI config file");
  cmd->add_option("--out", f.out, "Run directory; nothing is written without it");
  cmd->add_option("--seed", f.seed, "Overrides experiment.seed");
  cmd->add_option("--epochs", f.epochs, "Overrides experiment.epochs");
  cmd->add_option("--set", f.sets, "Override any key: section.key=value (repeatable)");
  cmd->add_flag("--check", f.check, "Exit 1 when the run misses its acceptance thresholds");
}

train::ExperimentConfig resolve_config(train::ExperimentKind kind, const RunFlags& f,
                                       const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  KeyValueConfig kv;
  if (!f.config.empty()) {
    if (!fs::exists(f.config)) throw UsageError("config file not found: " + f.config);
    kv = KeyValueConfig::load(f.config);
  }
  const std::string k = kv.get_string("experiment.kind", train::experiment_kind_name(kind));
  if (k != train::experiment_kind_name(kind))
    throw UsageError("config " + f.config + " is for experiment '" + k + "', expected '" +
                     train::experiment_kind_name(kind) + "'");
  kv.set("experiment.kind", k);
  for (const auto& [key, value] : extra) kv.set(key, value);
  if (f.seed) kv.set("experiment.seed", std::to_string(*f.seed));
  if (f.epochs) kv.set("experiment.epochs", std::to_string(*f.epochs));
  kv.apply_overrides(f.sets);
  return train::ExperimentConfig::from_config(kv);
}

std::optional<RunDirectory> open_run(const std::string& out) {
  if (out.empty()) return std::nullopt;
  return RunDirectory(out);
}

int report(const std::vector<verify::Check>& checks) {
  for (const auto& c : checks) std::cout << verify::format_check(c) << '\n';
  return verify::all_passed(checks) ? kOk : kFailed;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number list: '" + text + "'");
    }
    start = end + 1;
  }
  return out;
}

std::vector<double> parse_range(const std::string& text) {
  const std::vector<double> parts = [&] {
    std::string t = text;
    for (char& c : t)
      if (c == ':') c = ',';
    return parse_list(t);
  }();
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
    throw UsageError("offsets must be LO:HI:STEP with STEP > 0 and HI >= LO, got '" + text + "'");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(parts[0] + parts[2] * static_cast<double>(i));
  return out;
}

data::Dataset dataset_from_spec(const std::string& spec, const train::ExperimentConfig& cfg) {
  const std::size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto seed_of = [&]() -> std::uint64_t {
    if (rest.empty()) return cfg.seed;
    try {
      return std::stoull(rest);
    } catch (const std::exception&) {
      throw UsageError("bad seed in dataset spec '" + spec + "'");
    }
  };
  if (kind == "rotated-moons") return data::make_rotated_moons(cfg.moons, seed_of());
  if (kind == "gaussians") return data::make_gaussians(cfg.gaussian_n, cfg.gaussian_means, cfg.gaussian_var, seed_of());
  if (kind == "csv") {
    // csv:PATH[:DOMAIN_COL[:LABEL_COL]]
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= rest.size()) {
      const std::size_t end = std::min(rest.find(':', start), rest.size());
      parts.push_back(rest.substr(start, end - start));
      start = end + 1;
    }
    if (parts.empty() || parts[0].empty()) throw UsageError("csv dataset needs a path: csv:PATH[:DOMAIN[:LABEL]]");
    if (!fs::exists(parts[0])) throw UsageError("dataset file not found: " + parts[0]);
    const std::string domain_col = parts.size() > 1 && !parts[1].empty() ? parts[1] : "domain";
    std::optional<std::string> label_col;
    if (parts.size() > 2 && !parts[2].empty()) label_col = parts[2];
    return data::load_csv(parts[0], domain_col, label_col);
  }
  throw UsageError("unknown dataset spec '" + spec + "' (rotated-moons[:SEED], gaussians[:SEED], csv:PATH[:DOMAIN[:LABEL]])");
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

// --- subcommands -----------------------------------------------------------------

int cmd_oracle_check(std::uint64_t seed, std::size_t cases) {
  std::cout << "oracle-check seed=" << seed << " cases=" << cases << '\n';
  std::vector<verify::Check> all = verify::oracle_suite(seed, cases);
  for (auto& c : verify::njsd_suite(seed)) all.push_back(c);
  for (auto& c : verify::noisy_bound_suite(seed)) all.push_back(c);
  for (auto& c : verify::landscape_suite()) all.push_back(c);
  return report(all);
}

int cmd_grad_check(const std::string& loss, std::uint64_t seed, std::size_t configs) {
  std::vector<losses::LossKind> kinds;
  if (loss == "all") {
    kinds = losses::all_loss_kinds();
  } else {
    try {
      kinds.push_back(losses::parse_loss_kind(loss));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  std::vector<verify::Check> checks;
  for (auto k : kinds) checks.push_back(verify::grad_audit(k, seed, configs));
  return report(checks);
}

int cmd_njsd_curve(const std::string& family_name, const std::string& sigmas, const std::string& offsets,
                   const std::string& out, bool svg) {
  oracle::LandscapeFamily family;
  try {
    family = oracle::parse_family(family_name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::vector<double> s2 = parse_list(sigmas);
  for (double v : s2)
    if (!(v >= 0.0)) throw UsageError("noise variances must be >= 0");
  const std::vector<double> grid = parse_range(offsets);
  const oracle::Landscape l = oracle::njsd_landscape(family, grid, s2);

  CsvTable table{{"offset"}, {}};
  for (double v : s2) table.header.push_back("njsd_sigma2_" + format_double(v));
  for (double v : s2) table.header.push_back("slope_sigma2_" + format_double(v));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i]};
    for (std::size_t s = 0; s < s2.size(); ++s) row.push_back(l.values[s][i]);
    for (std::size_t s = 0; s < s2.size(); ++s) row.push_back(l.slopes[s][i]);
    table.add(std::move(row));
  }
  fs::create_directories(out);
  const std::string stem = "njsd_" + oracle::family_name(family);
  table.save(fs::path(out) / (stem + ".csv"));
  if (svg) {
    std::vector<tools::Series> series;
    for (std::size_t s = 0; s < s2.size(); ++s) series.push_back({"sigma2=" + format_double(s2[s]), l.values[s]});
    std::ofstream f(fs::path(out) / (stem + ".svg"));
    f << tools::line_chart("Noisy JSD, " + oracle::family_name(family), "offset", grid, series);
  }
  for (std::size_t s = 0; s < s2.size(); ++s)
    std::cout << "sigma2=" << format_double(s2[s]) << " interior_minima=" << oracle::count_interior_minima(l.values[s])
              << '\n';
  std::cout << "wrote " << (fs::path(out) / (stem + ".csv")).string() << '\n';
  return kOk;
}

int cmd_train_moons(const RunFlags& f, const std::string& loss) {
  std::vector<std::pair<std::string, std::string>> extra;
  if (!loss.empty()) extra.emplace_back("loss.kind", loss);
  const train::ExperimentConfig cfg = resolve_config(train::ExperimentKind::kMoons, f, extra);
  auto run = open_run(f.out);
  const train::MoonsRun r = train::run_moons(cfg, run ? &*run : nullptr);
  const bool pass = r.eval.passes();
  print_json({{"loss", losses::loss_kind_name(cfg.loss.kind)},
              {"seed", cfg.seed},
              {"epochs_completed", r.train.epochs_completed},
              {"diverged", r.train.diverged},
              {"latent_swd", r.eval.latent_swd},
              {"recon_mse", r.eval.recon_mse},
              {"flip_swd", r.eval.flip_swd},
              {"passes", pass}});
  if (r.train.diverged) std::cerr << "diverged: " << r.train.divergence << '\n';
  return f.check && (!pass || r.train.diverged) ? kFailed : kOk;
}

int cmd_train_plateau(const RunFlags& f, bool compare) {
  const train::ExperimentConfig cfg = resolve_config(train::ExperimentKind::kPlateau, f);
  auto run = open_run(f.out);
  auto reached = [](const train::TrainResult& t) {
    return t.reached_epoch ? nlohmann::json(*t.reached_epoch) : nlohmann::json(nullptr);
  };
  if (compare) {
    const train::PlateauRun r = train::run_plateau_compare(cfg, run ? &*run : nullptr);
    const bool faster = r.nvaub.reached_epoch && (!r.vaub.reached_epoch || *r.nvaub.reached_epoch < *r.vaub.reached_epoch);
    print_json({{"seed", cfg.seed},
                {"budget", cfg.epochs},
                {"target_swd", cfg.target_swd},
                {"vaub_reached_epoch", reached(r.vaub)},
                {"nvaub_reached_epoch", reached(r.nvaub)},
                {"nvaub_faster", faster}});
    return f.check && !faster ? kFailed : kOk;
  }
  const data::Dataset ds = train::plateau_data(cfg);
  train::AlignmentModels m = train::AlignmentModels::build(cfg, ds.dim(), ds.domains());
  const train::TrainResult r = train::train_alignment(cfg, ds, m, run ? &*run : nullptr);
  print_json({{"loss", losses::loss_kind_name(cfg.loss.kind)},
              {"seed", cfg.seed},
              {"reached_epoch", reached(r)},
              {"final_swd", r.epoch_swd.empty() ? 0.0 : r.epoch_swd.back()}});
  return f.check && !r.reached_epoch ? kFailed : kOk;
}

int cmd_train_da(const RunFlags& f) {
  const train::ExperimentConfig cfg = resolve_config(train::ExperimentKind::kDa, f);
  auto run = open_run(f.out);
  const train::DaRun r = train::run_da(cfg, run ? &*run : nullptr);
  auto side = [](const train::DaEvaluation& e) {
    return nlohmann::json{{"source_accuracy", e.source_accuracy},
                          {"target_accuracy", e.target_accuracy},
                          {"latent_swd", e.latent_swd},
                          {"dp_gap", e.dp_gap}};
  };
  const double gain = r.aligned.target_accuracy - r.ablation.target_accuracy;
  print_json({{"seed", cfg.seed}, {"aligned", side(r.aligned)}, {"ablation", side(r.ablation)}, {"target_gain", gain}});
  return f.check && !(gain >= 0.10) ? kFailed : kOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& dataset, const std::string& out) {
  if (!fs::exists(checkpoint)) throw UsageError("checkpoint not found: " + checkpoint);
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const train::ExperimentConfig cfg = train::config_from_checkpoint(ckpt);
  const data::Dataset ds = dataset_from_spec(dataset, cfg);
  const nlohmann::json j = train::evaluate_checkpoint(ckpt, ds);
  print_json(j);
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream(fs::path(out) / "eval.json") << j.dump(2) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-adversarial distribution alignment: oracles, audits and experiments"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::size_t cases = 200;
  auto* oracle = app.add_subcommand("oracle-check", "Exact identity suite on random discrete worlds");
  oracle->add_option("--seed", seed, "World generator seed");
  oracle->add_option("--cases", cases, "Random worlds")->check(CLI::PositiveNumber);

  std::string loss = "all";
  std::size_t configs = 20;
  auto* grad = app.add_subcommand("grad-check", "Finite-difference audit of the losses");
  grad->add_option("--loss", loss, "Loss kind or 'all'");
  grad->add_option("--seed", seed, "Configuration seed");
  grad->add_option("--configs", configs, "Random configurations per loss")->check(CLI::PositiveNumber);

  std::string family, sigmas = "0", offsets, out;
  bool no_svg = false;
  auto* curve = app.add_subcommand("njsd-curve", "Noisy JSD landscape as CSV and SVG");
  curve->add_option("--family", family, "two-gaussian or shifted-gmm")->required();
  curve->add_option("--sigmas", sigmas, "Comma-separated noise variances");
  curve->add_option("--offsets", offsets, "LO:HI:STEP")->required();
  curve->add_option("--out", out, "Output directory")->required();
  curve->add_flag("--no-svg", no_svg, "Skip the SVG plot");

  RunFlags moons_flags, plateau_flags, da_flags;
  std::string moons_loss;
  auto* moons = app.add_subcommand("train-moons", "Rotated moons alignment");
  add_run_flags(moons, moons_flags);
  moons->add_option("--loss", moons_loss, "vaub, beta-vaub, nvaub, aub, naub or adv (overrides loss.kind)");

  bool compare = false;
  auto* plateau = app.add_subcommand("train-plateau", "Gaussian plateau; --compare runs VAUB and NVAUB");
  add_run_flags(plateau, plateau_flags);
  plateau->add_flag("--compare", compare, "VAUB and NVAUB from the same initialization");

  auto* da = app.add_subcommand("train-da", "Plug-and-play domain adaptation demo with its ablation");
  add_run_flags(da, da_flags);

  std::string checkpoint, dataset, eval_out;
  auto* eval = app.add_subcommand("eval", "Metrics of a checkpoint on a dataset");
  eval->add_option("--checkpoint", checkpoint, "checkpoint.final of a run")->required();
  eval->add_option("--dataset", dataset, "rotated-moons[:SEED], gaussians[:SEED] or csv:PATH[:DOMAIN[:LABEL]]")
      ->required();
  eval->add_option("--out", eval_out, "Directory for eval.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*oracle) return cmd_oracle_check(seed, cases);
    if (*grad) return cmd_grad_check(loss, seed, configs);
    if (*curve) return cmd_njsd_curve(family, sigmas, offsets, out, !no_svg);
    if (*moons) return cmd_train_moons(moons_flags, moons_loss);
    if (*plateau) return cmd_train_plateau(plateau_flags, compare);
    if (*da) return cmd_train_da(da_flags);
    if (*eval) return cmd_eval(checkpoint, dataset, eval_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const data::CsvError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
