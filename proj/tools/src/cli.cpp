// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gaze/ablation.hpp"
#include "gaze/anchors.hpp"
#include "gaze/config.hpp"
#include "gaze/dataset.hpp"
#include "gaze/encoders.hpp"
#include "gaze/error.hpp"
#include "gaze/geometry.hpp"
#include "gaze/gradcheck.hpp"
#include "gaze/train.hpp"

#ifndef GAZE_VERSION
#define GAZE_VERSION "0.0.0"
#endif

namespace gaze::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) fail(ErrorKind::kIo, "write to '" + path.string() + "' failed");
}

nlohmann::json parse_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::kConfiguration, path + ": " + e.what());
  }
}

// Flags that override individual config fields; unset flags leave the config alone.
struct ConfigOverrides {
  std::optional<std::size_t> epochs, batch_size, negatives, workers, n_source, n_target;
  std::optional<double> lr, warmup, lambda_geo, lambda_mcr, lambda_gaze, temperature, coupling;
  std::optional<std::uint64_t> seed, data_seed;
  std::optional<std::string> weighting, interpolation;

  void attach(CLI::App& cmd) {
    cmd.add_option("--epochs", epochs, "Training epochs");
    cmd.add_option("--batch-size", batch_size, "Batch size B");
    cmd.add_option("--negatives", negatives, "Global negative bank size K");
    cmd.add_option("--workers", workers, "Evaluation worker threads");
    cmd.add_option("--n-source", n_source, "Source-domain sample count");
    cmd.add_option("--n-target", n_target, "Target-domain sample count");
    cmd.add_option("--lr", lr, "Peak learning rate");
    cmd.add_option("--warmup-epochs", warmup, "Linear warm-up length in epochs");
    cmd.add_option("--lambda-geo", lambda_geo, "Weight of the geometric loss");
    cmd.add_option("--lambda-mcr", lambda_mcr, "Weight of the contrastive loss");
    cmd.add_option("--lambda-gaze", lambda_gaze, "Weight of the angular gaze loss");
    cmd.add_option("--temperature", temperature, "Contrastive temperature");
    cmd.add_option("--nuisance-coupling", coupling, "Nuisance coupling of the synthetic data");
    cmd.add_option("--seed", seed, "Init/shuffle seed (overrides GAZEPROMPT_SEED)");
    cmd.add_option("--data-seed", data_seed, "Synthetic data seed");
    cmd.add_option("--weighting", weighting, "literal-cos | clamped-cos | distance | uniform");
    cmd.add_option("--interpolation", interpolation, "global | planar | spherical");
  }

  void apply(TrainConfig& c) const {
    if (epochs) c.epochs = *epochs;
    if (batch_size) c.batch_size = *batch_size;
    if (negatives) c.negatives = *negatives;
    if (workers) c.workers = *workers;
    if (n_source) c.n_source = *n_source;
    if (n_target) c.n_target = *n_target;
    if (lr) c.lr = *lr;
    if (warmup) c.warmup_epochs = *warmup;
    if (lambda_geo) c.lambda_geo = *lambda_geo;
    if (lambda_mcr) c.lambda_mcr = *lambda_mcr;
    if (lambda_gaze) c.lambda_gaze = *lambda_gaze;
    if (temperature) c.temperature = *temperature;
    if (coupling) c.nuisance_coupling = *coupling;
    if (seed) c.seed = *seed;
    if (data_seed) c.data_seed = *data_seed;
    if (weighting) c.weighting = parse_weighting_scheme(*weighting);
    if (interpolation) c.interpolation = parse_interpolation_scheme(*interpolation);
  }
};

struct ResolvedConfig {
  TrainConfig config;
  std::optional<std::uint64_t> env_seed;
};

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv(kSeedEnv);
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument(raw);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    fail(ErrorKind::kConfiguration,
         std::string(kSeedEnv) + ": expected a non-negative integer, got '" + raw + "'");
  }
}

// Precedence: defaults < config file < environment seed < flags.
ResolvedConfig resolve_config(const std::string& path, const ConfigOverrides& overrides) {
  ResolvedConfig r;
  if (!path.empty()) r.config = config_from_json(parse_json_file(path));
  r.env_seed = seed_from_env();
  if (r.env_seed) r.config.seed = *r.env_seed;
  overrides.apply(r.config);
  r.config.validate();
  return r;
}

int cmd_anchors(double yaw_step, double pitch_step, std::size_t token_dim, std::uint64_t seed,
                const std::string& out_path, std::ostream& out, std::ostream& err) {
  const AnchorSet set = build_anchor_grid(yaw_step, pitch_step, token_dim, derive_seed(seed, 2));
  const std::string n_line = "N=" + std::to_string(set.grid.size());
  const std::string doc = to_json(set).dump(2) + "\n";
  if (out_path.empty()) {
    out << doc;
    err << n_line << "\n";
  } else {
    write_file(out_path, doc);
    out << n_line << "\n";
  }
  return kExitOk;
}

int cmd_interp(double yaw, double pitch, const std::string& scheme_name,
               const std::string& anchors_path, double yaw_step, double pitch_step,
               std::ostream& out) {
  const InterpolationScheme scheme = parse_interpolation_scheme(scheme_name);
  const AnchorGrid grid = anchors_path.empty()
                              ? AnchorGrid(yaw_step, pitch_step)
                              : anchor_set_from_json(parse_json_file(anchors_path)).grid;
  const YawPitch yp{yaw, pitch};
  yp.validate();
  const GazeVector g = yawpitch_to_vec(yp);

  InterpolationWeights w;
  switch (scheme) {
    case InterpolationScheme::kSphericalBilinear: w = spherical_bilinear_weights(yp, grid); break;
    case InterpolationScheme::kPlanarBilinear: w = planar_bilinear_weights(yp, grid); break;
    case InterpolationScheme::kGlobalLinear: w = global_linear_weights(g, grid); break;
  }
  const GazeVector rec = reconstruct_direction(w, grid.gazes());

  out << "scheme=" << to_string(scheme) << " yaw=" << yaw << " pitch=" << pitch << "\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double wk = w.weight_of(k);
    bool listed = false;
    for (const auto& e : w.entries) listed = listed || e.index == k;
    if (!listed) continue;
    const YawPitch& pos = grid.position(k);
    out << "anchor=" << k << " yaw=" << pos.yaw << " pitch=" << pos.pitch
        << " weight=" << format("%.12g", wk) << "\n";
  }
  out << "weight_sum=" << format("%.12g", w.sum()) << "\n";
  out << "reconstruction_error_deg=" << format("%.9g", angular_error(rec, g)) << "\n";
  return kExitOk;
}

ojson manifest_json(const ResolvedConfig& rc, const std::vector<std::string>& args,
                    const fs::path& dir) {
  ojson m;
  m["tool"] = "gazeprompt";
  m["version"] = GAZE_VERSION;
  m["command"] = args.size() > 1 ? std::vector<std::string>(args.begin() + 1, args.end())
                                 : std::vector<std::string>{};
  ojson seeds;
  seeds["seed"] = rc.config.seed;
  seeds["data_seed"] = rc.config.data_seed;
  seeds["proxy_seed"] = rc.config.proxy_seed;
  seeds[kSeedEnv] = rc.env_seed ? ojson(*rc.env_seed) : ojson(nullptr);
  m["seeds"] = seeds;
  m["config"] = to_json(rc.config);
  ojson outputs;
  outputs["manifest"] = (dir / "manifest.json").string();
  outputs["metrics"] = (dir / "metrics.csv").string();
  outputs["checkpoint"] = (dir / "checkpoint.json").string();
  m["outputs"] = outputs;
  return m;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const ConfigOverrides& overrides, const std::vector<std::string>& args,
              std::ostream& out) {
  const ResolvedConfig rc = resolve_config(config_path, overrides);
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create '" + out_dir + "': " + ec.message());
  write_file(dir / "manifest.json", manifest_json(rc, args, dir).dump(2) + "\n");

  const TrainConfig& c = rc.config;
  const Dataset source = make_source_dataset(c);
  const Dataset target = make_target_dataset(c);
  const TrainResult result = train(c, source, &target, [&](const EpochMetrics& m) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "epoch %3zu  total %.5f  geo %.5f  t2i %.5f  i2t %.5f  gaze %.5f  lr %.5f  "
                  "src %.3f deg  tgt %.3f deg\n",
                  m.epoch, m.loss.total, m.loss.geo, m.loss.mcr_t2i, m.loss.mcr_i2t, m.loss.gaze,
                  m.lr, m.src_err_deg, m.tgt_err_deg);
    out << buf << std::flush;
  });
  write_file(dir / "metrics.csv", result.log.to_csv());
  save_parameters(result.params, (dir / "checkpoint.json").string());
  out << "wrote " << (dir / "metrics.csv").string() << " and "
      << (dir / "checkpoint.json").string() << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& ckpt, const std::string& config_path,
             std::optional<std::uint64_t> data_seed, const std::string& domain,
             std::optional<std::size_t> n, std::size_t workers, std::ostream& out) {
  ConfigOverrides none;
  TrainConfig c = resolve_config(config_path, none).config;
  if (data_seed) c.data_seed = *data_seed;
  const ParameterSet params = load_parameters(ckpt);
  const std::size_t input_dim = static_cast<std::size_t>(params.value(param::kImgW1).cols());
  if (input_dim != c.model.input_dim) {
    fail(ErrorKind::kConfiguration, "checkpoint input_dim " + std::to_string(input_dim) +
                                        " does not match config input_dim " +
                                        std::to_string(c.model.input_dim));
  }
  Dataset data;
  if (domain == "source") {
    if (n) c.n_source = *n;
    data = make_source_dataset(c);
  } else if (domain == "target") {
    if (n) c.n_target = *n;
    data = make_target_dataset(c);
  } else {
    fail(ErrorKind::kConfiguration, "--domain: expected 'source' or 'target', got '" + domain + "'");
  }
  const double err_deg = evaluate(params, data, workers);
  out << "domain=" << domain << " n=" << data.size() << " data_seed=" << c.data_seed
      << " mean_angular_error_deg=" << format("%.6f", err_deg);
  if (data.size() >= 2) {
    const double rho = feature_label_correlation(params, data, 5000, 7);
    out << " spearman=" << format("%.6f", rho);
  }
  out << "\n";
  return kExitOk;
}

int cmd_ablate(const std::string& axis_name, const std::string& config_path,
               const ConfigOverrides& overrides, std::size_t n_seeds,
               const std::vector<std::size_t>& ks, std::size_t jobs, const std::string& out_path,
               std::ostream& out, std::ostream& err) {
  const AblationAxis axis = parse_ablation_axis(axis_name);
  const ResolvedConfig rc = resolve_config(config_path, overrides);
  if (n_seeds == 0) fail(ErrorKind::kConfiguration, "--seeds must be positive");
  AblationOptions opt;
  opt.seeds.clear();
  for (std::size_t s = 0; s < n_seeds; ++s) opt.seeds.push_back(rc.config.seed + s);
  opt.workers = jobs;
  const auto variants = ablation_variants(axis, rc.config, ks);
  const auto summaries = run_ablation(variants, opt, [&](const std::string& label, const AblationRun& r) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s seed=%llu src=%.3f tgt=%.3f rho=%.4f\n", label.c_str(),
                  static_cast<unsigned long long>(r.seed), r.src_err_deg, r.tgt_err_deg,
                  r.tgt_spearman);
    err << buf << std::flush;
  });
  const std::string csv = ablation_csv(summaries);
  if (out_path.empty()) {
    out << csv;
  } else {
    write_file(out_path, csv);
    out << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_gradcheck(const std::string& target_name, std::uint64_t seed, std::size_t configs,
                  std::ostream& out) {
  GradcheckOptions opt;
  opt.seed = seed;
  opt.configurations = configs;
  const auto results = run_gradcheck(parse_gradcheck_target(target_name), opt);
  bool ok = true;
  for (const auto& r : results) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-24s worst_rel_err=%.3e configs=%zu %s\n", r.name.c_str(),
                  r.worst_relative_error, r.configurations, r.passed ? "PASS" : "FAIL");
    out << buf;
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitGradcheck;
}

int cmd_negatives(std::size_t k, const std::string& out_path, std::ostream& out) {
  const std::vector<GazeVector> pts = fibonacci_sphere(k);
  std::string csv = "index,x,y,z,yaw_deg,pitch_deg\n";
  char buf[200];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const YawPitch yp = vec_to_yawpitch(pts[i]);
    std::snprintf(buf, sizeof buf, "%zu,%.12f,%.12f,%.12f,%.9f,%.9f\n", i, pts[i].x(), pts[i].y(),
                  pts[i].z(), yp.yaw, yp.pitch);
    csv += buf;
  }
  if (out_path.empty()) {
    out << csv;
  } else {
    write_file(out_path, csv);
    out << "K=" << k << " wrote " << out_path << "\n";
  }
  return kExitOk;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSingular:
    case ErrorKind::kDegenerate:
    case ErrorKind::kNonpositiveDenominator:
    case ErrorKind::kNonFinite:
    case ErrorKind::kUndefinedRank:
      return kExitNumerical;
    default:
      return kExitConfig;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaze estimation with label-anchored prompts on a synthetic cross-domain benchmark",
               "gazeprompt"};
  app.set_version_flag("--version", GAZE_VERSION);
  app.require_subcommand(1);

  // anchors
  double a_yaw = 30.0, a_pitch = 30.0;
  std::size_t a_dim = 16;
  std::uint64_t a_seed = 0;
  std::string a_out;
  auto* anchors = app.add_subcommand("anchors", "Build the anchor grid and its embeddings");
  anchors->add_option("--yaw-step", a_yaw, "Yaw spacing in degrees")->capture_default_str();
  anchors->add_option("--pitch-step", a_pitch, "Pitch spacing in degrees")->capture_default_str();
  anchors->add_option("--token-dim", a_dim, "Embedding width")->capture_default_str();
  anchors->add_option("--seed", a_seed, "Init seed")->capture_default_str();
  anchors->add_option("--out", a_out, "Output JSON file (stdout if omitted)");

  // interp
  double i_yaw = 0.0, i_pitch = 0.0, i_ystep = 30.0, i_pstep = 30.0;
  std::string i_scheme = "spherical", i_anchors;
  auto* interp = app.add_subcommand("interp", "Interpolation weights for one direction");
  interp->add_option("--yaw", i_yaw, "Yaw in degrees")->required();
  interp->add_option("--pitch", i_pitch, "Pitch in degrees")->required();
  interp->add_option("--scheme", i_scheme, "global | planar | spherical")->capture_default_str();
  interp->add_option("--anchors", i_anchors, "Anchor set JSON (grid taken from the file)");
  interp->add_option("--yaw-step", i_ystep, "Grid yaw spacing without --anchors")
      ->capture_default_str();
  interp->add_option("--pitch-step", i_pstep, "Grid pitch spacing without --anchors")
      ->capture_default_str();

  // train
  std::string t_config, t_out;
  ConfigOverrides t_over;
  auto* trn = app.add_subcommand("train", "Train on the source domain and log both domains");
  trn->add_option("--config", t_config, "Config JSON (defaults if omitted)");
  trn->add_option("--out-dir", t_out, "Directory for manifest, metrics and checkpoint")
      ->required();
  t_over.attach(*trn);

  // eval
  std::string e_ckpt, e_config, e_domain = "target";
  std::optional<std::uint64_t> e_seed;
  std::optional<std::size_t> e_n;
  std::size_t e_workers = 1;
  auto* evl = app.add_subcommand("eval", "Mean angular error of a checkpoint on one domain");
  evl->add_option("--ckpt", e_ckpt, "Checkpoint JSON")->required();
  evl->add_option("--config", e_config, "Config JSON describing the domains");
  evl->add_option("--data-seed", e_seed, "Synthetic data seed");
  evl->add_option("--domain", e_domain, "source | target")->capture_default_str();
  evl->add_option("--n", e_n, "Sample count");
  evl->add_option("--workers", e_workers, "Worker threads")->capture_default_str();

  // ablate
  std::string b_axis, b_config, b_out;
  std::size_t b_seeds = 5, b_jobs = 1;
  std::vector<std::size_t> b_ks(std::begin(kDefaultNegativeCounts),
                                std::end(kDefaultNegativeCounts));
  ConfigOverrides b_over;
  auto* abl = app.add_subcommand("ablate", "Run one ablation axis over several seeds");
  abl->add_option("--axis", b_axis, "loss-terms | interpolation | K")->required();
  abl->add_option("--config", b_config, "Base config JSON");
  abl->add_option("--out", b_out, "Output CSV (stdout if omitted)");
  abl->add_option("--seeds", b_seeds, "Number of seeds, starting at the config seed")
      ->capture_default_str();
  abl->add_option("--k", b_ks, "Negative counts for the K axis")->capture_default_str();
  abl->add_option("--jobs", b_jobs, "Concurrent training runs")->capture_default_str();
  b_over.attach(*abl);

  // gradcheck
  std::string g_target = "all";
  std::uint64_t g_seed = 0;
  std::size_t g_configs = 100;
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of all gradients");
  grad->add_option("--target", g_target, "loss | encoder | all")->capture_default_str();
  grad->add_option("--seed", g_seed, "Sampling seed")->capture_default_str();
  grad->add_option("--configs", g_configs, "Random configurations per check")
      ->capture_default_str();

  // negatives
  std::size_t n_k = 256;
  std::string n_out;
  auto* neg = app.add_subcommand("negatives", "Global negative directions as CSV");
  neg->add_option("--k", n_k, "Number of directions")->capture_default_str();
  neg->add_option("--out", n_out, "Output CSV (stdout if omitted)");

  // config
  std::string c_config;
  ConfigOverrides c_over;
  auto* cfg = app.add_subcommand("config", "Print the resolved training config");
  cfg->add_option("--config", c_config, "Config JSON to resolve");
  c_over.attach(*cfg);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*anchors) return cmd_anchors(a_yaw, a_pitch, a_dim, a_seed, a_out, out, err);
    if (*interp) return cmd_interp(i_yaw, i_pitch, i_scheme, i_anchors, i_ystep, i_pstep, out);
    if (*trn) return cmd_train(t_config, t_out, t_over, args, out);
    if (*evl) return cmd_eval(e_ckpt, e_config, e_seed, e_domain, e_n, e_workers, out);
    if (*abl) return cmd_ablate(b_axis, b_config, b_over, b_seeds, b_ks, b_jobs, b_out, out, err);
    if (*grad) return cmd_gradcheck(g_target, g_seed, g_configs, out);
    if (*neg) return cmd_negatives(n_k, n_out, out);
    if (*cfg) {
      out << to_json(resolve_config(c_config, c_over).config).dump(2) << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace gaze::cli
