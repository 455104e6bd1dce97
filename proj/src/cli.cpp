#include "cova/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cova/embedding_io.hpp"
#include "cova/errors.hpp"
#include "cova/gradcheck_suite.hpp"
#include "cova/pipeline.hpp"
#include "cova/retrieval.hpp"
#include "cova/trainer.hpp"

namespace cova {

namespace {

namespace fs = std::filesystem;

// Counts go through double so "1e3" is accepted.
template <class Int>
CLI::Option* add_count(CLI::App* app, const std::string& name, Int& target,
                       const std::string& help) {
  auto* opt = app->add_option_function<double>(
      name,
      [&target, name](double v) {
        if (!(v >= 0.0) || v != std::floor(v) || v > 9.007199254740992e15) {
          throw CLI::ValidationError(name, "expected a non-negative integer");
        }
        target = static_cast<Int>(v);
      },
      help);
  opt->default_str(std::to_string(target));
  return opt;
}

CLI::Option* add_real(CLI::App* app, const std::string& name, Real& target,
                      const std::string& help) {
  return app->add_option(name, target, help)->capture_default_str();
}

void write_echo(const fs::path& path, const std::string& subcommand,
                const std::vector<std::string>& args, nlohmann::ordered_json settings) {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["argv"] = std::vector<std::string>(args.begin() + 1, args.end());
  j["settings"] = std::move(settings);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::trunc);
  f << j.dump(2) << "\n";
}

fs::path resolve_manifest(const std::string& data, const std::string& manifest,
                          const char* default_name) {
  if (!manifest.empty()) return manifest;
  if (data.empty()) throw ConfigError(std::string("either --data or a manifest flag is required"));
  return fs::path(data) / default_name;
}

ComponentMask drop_mask(const std::string& drop) {
  ComponentMask keep = kAllComponents;
  if (drop.empty()) return keep;
  for (std::size_t i = 1; i < kComponents; ++i) {
    if (drop == kComponentNames[i]) {
      keep[i] = false;
      return keep;
    }
  }
  throw ConfigError("--drop expects one of obj|act|att|audm, got '" + drop + "'");
}

struct SynthArgs {
  SynthConfig cfg;
  std::string out;
};

struct DedupArgs {
  std::string clips, out;
  DedupThresholds thresholds;
};

struct MineArgs {
  std::string clips, out, combinator = "and";
  BandConfig bands;
  std::size_t threads = 1;
};

struct TrainArgs {
  std::string data, manifest, eval_manifest, out;
  TrainConfig train;
  FusionConfig model;
  std::string av_fusion = "gated", text_fusion = "adaptive";
  bool no_audio = false;
  bool freeze_resampler = false;
  Real clip_norm = 0.0;
};

struct EvalArgs {
  std::string data, manifest, ckpt, out, drop;
  std::size_t threads = 1;
};

struct GradArgs {
  std::size_t seeds = 5;
  Real tolerance = 1e-3;
};

int do_synth(const SynthArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  SynthData data = synth_build(a.cfg);
  synth_write(data, a.cfg, a.out);
  write_echo(fs::path(a.out) / "synth_config.json", "synth", args, to_json(a.cfg));
  out << "wrote " << data.train.triplets.size() << " train / " << data.test.triplets.size()
      << " test triplets, " << data.test.gallery.size() << " test gallery entries to " << a.out
      << "\n";
  return kExitOk;
}

int do_dedup(const DedupArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  auto records = load_clips(a.clips);
  auto kept = dedup(records, a.thresholds);
  write_clips(kept, fs::path(a.clips).parent_path(), a.out);
  nlohmann::ordered_json s;
  s["clips"] = a.clips;
  s["out"] = a.out;
  s["video_threshold"] = a.thresholds.video;
  s["audio_threshold"] = a.thresholds.audio;
  write_echo(fs::path(a.out).replace_extension(".config.json"), "dedup", args, s);
  out << "kept " << kept.size() << " of " << records.size() << " clips\n";
  return kExitOk;
}

int do_mine(MineArgs a, const std::vector<std::string>& args, std::ostream& out) {
  if (a.combinator == "and") {
    a.bands.combinator = Combinator::all;
  } else if (a.combinator == "or") {
    a.bands.combinator = Combinator::any;
  } else {
    throw ConfigError("--combinator expects and|or");
  }
  auto records = load_clips(a.clips);
  auto pairs = mine_pairs(records, a.bands, a.threads);
  write_pairs(pairs, a.out);
  nlohmann::ordered_json s;
  s["clips"] = a.clips;
  s["out"] = a.out;
  s["band1_video"] = {a.bands.band1_video.lo, a.bands.band1_video.hi};
  s["band1_audio"] = {a.bands.band1_audio.lo, a.bands.band1_audio.hi};
  s["band2_video"] = {a.bands.band2_video.lo, a.bands.band2_video.hi};
  s["band2_audio"] = {a.bands.band2_audio.lo, a.bands.band2_audio.hi};
  s["combinator"] = a.combinator;
  write_echo(fs::path(a.out).replace_extension(".config.json"), "mine", args, s);
  std::size_t band1 = 0;
  for (const auto& p : pairs) band1 += p.band == Band::visual_similar_audio_differ;
  out << "mined " << pairs.size() << " pairs (" << band1 << " band 1, " << pairs.size() - band1
      << " band 2) from " << records.size() << " clips\n";
  return kExitOk;
}

int do_train(TrainArgs a, const std::vector<std::string>& args, std::ostream& out) {
  const fs::path manifest = resolve_manifest(a.data, a.manifest, "train.jsonl");
  const fs::path out_dir = a.out.empty() ? manifest.parent_path() / "run" : fs::path(a.out);
  a.model.av_fusion = parse_av_fusion(a.av_fusion);
  a.model.text_fusion = parse_text_fusion(a.text_fusion);
  a.model.use_audio = !a.no_audio;
  a.train.train_resampler = !a.freeze_resampler;
  if (a.clip_norm > 0.0) a.train.clip_norm = a.clip_norm;
  if (a.train.batch_size < 2) throw ConfigError("--batch must be >= 2");
  if (!(a.train.learning_rate >= 0.0)) throw ConfigError("--lr must be >= 0");

  Dataset data = load_dataset(manifest);
  a.model.width = data.dims.width;
  a.model.audio_width = data.dims.audio_width;
  Dataset eval_data;
  const Dataset* eval_ptr = nullptr;
  if (a.train.eval_every > 0) {
    fs::path em = a.eval_manifest.empty() ? manifest.parent_path() / "test.jsonl"
                                          : fs::path(a.eval_manifest);
    eval_data = load_dataset(em);
    eval_ptr = &eval_data;
  }

  fs::create_directories(out_dir);
  nlohmann::ordered_json s;
  s["manifest"] = manifest.generic_string();
  s["out"] = out_dir.generic_string();
  s["epochs"] = a.train.epochs;
  s["batch"] = a.train.batch_size;
  s["lr"] = a.train.learning_rate;
  s["seed"] = a.train.seed;
  s["eval_every"] = a.train.eval_every;
  s["beta1"] = a.train.beta1;
  s["beta2"] = a.train.beta2;
  s["clip_norm"] = a.train.clip_norm ? nlohmann::ordered_json(*a.train.clip_norm) : nlohmann::ordered_json();
  s["train_resampler"] = a.train.train_resampler;
  s["threads"] = a.train.threads;
  s["model"] = to_json(a.model);
  write_echo(out_dir / "train_config.json", "train", args, s);

  std::ofstream log(out_dir / "train_log.jsonl", std::ios::trunc);
  TrainResult r = train(data, a.model, a.train, eval_ptr, &log);
  save_checkpoint(out_dir / "checkpoint.avck", r.params, a.model, r.steps);
  const auto& epochs = r.log.epochs;
  if (!epochs.empty()) {
    out << "trained " << r.steps << " steps; mean loss epoch 1 " << epochs.front().mean_loss
        << ", epoch " << epochs.size() << " " << epochs.back().mean_loss << "\n";
  }
  out << "checkpoint: " << (out_dir / "checkpoint.avck").generic_string() << "\n";
  return kExitOk;
}

int do_eval(const EvalArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const fs::path manifest = resolve_manifest(a.data, a.manifest, "test.jsonl");
  const ComponentMask keep = drop_mask(a.drop);
  if (!fs::exists(a.ckpt)) throw CheckpointError("checkpoint not found: " + a.ckpt);
  Checkpoint ck = load_checkpoint(a.ckpt);
  Dataset data = load_dataset(manifest);
  if (data.dims.width != ck.config.width || data.dims.audio_width != ck.config.audio_width) {
    throw ConfigMismatchError("dataset dims D=" + std::to_string(data.dims.width) + ", D_a=" +
                              std::to_string(data.dims.audio_width) +
                              " do not match checkpoint config " + to_json(ck.config).dump());
  }
  const fs::path out_dir = a.out.empty() ? fs::path(a.ckpt).parent_path() : fs::path(a.out);
  nlohmann::ordered_json s;
  s["manifest"] = manifest.generic_string();
  s["ckpt"] = a.ckpt;
  s["out"] = out_dir.generic_string();
  s["drop"] = a.drop;
  s["threads"] = a.threads;
  const std::string stem = a.drop.empty() ? "metrics" : "metrics_no_" + a.drop;
  write_echo(out_dir / (stem + ".config.json"), "eval", args, s);

  EvalOptions opts;
  opts.keep = keep;
  opts.threads = a.threads;
  Evaluation ev = evaluate(data.triplets, data.gallery, ck.params, ck.config, opts);
  std::ofstream f(out_dir / (stem + ".json"), std::ios::trunc);
  f << metrics_json(ev.metrics);
  print_metrics_table(out, a.drop.empty() ? "full" : "w/o " + a.drop, ev.metrics);
  return kExitOk;
}

int do_gradcheck(const GradArgs& a, std::ostream& out) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t s = 1; s <= a.seeds; ++s) seeds.push_back(s);
  bool ok = true;
  char line[200];
  for (const auto& r : gradcheck_suite(seeds, a.tolerance)) {
    std::snprintf(line, sizeof line, "%-4s %-22s max rel err %.3e\n", r.passed() ? "ok" : "FAIL",
                  r.op.c_str(), r.max_relative_error);
    out << line;
    ok = ok && r.passed();
  }
  out << (ok ? "gradcheck passed\n" : "gradcheck FAILED\n");
  return ok ? kExitOk : kExitRuntime;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Composed audio-video-text retrieval engine", "cova"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic triplet dataset");
  synth->add_option("--out", sa.out, "Output directory")->required();
  add_count(synth, "--triplets", sa.cfg.train_triplets, "Training triplets");
  add_count(synth, "--test-triplets", sa.cfg.test_triplets, "Held-out triplets");
  add_count(synth, "--gallery-extra", sa.cfg.gallery_extra, "Distractors in the test gallery");
  add_count(synth, "--frames", sa.cfg.frames, "Frames per clip (N)");
  add_count(synth, "--audio-tokens", sa.cfg.audio_tokens, "Audio tokens per clip (T)");
  add_count(synth, "--width", sa.cfg.width, "Embedding width (D)");
  add_count(synth, "--audio-width", sa.cfg.audio_width, "Audio token width (D_a)");
  add_real(synth, "--noise", sa.cfg.noise, "Per-entry noise std (sigma)");
  add_real(synth, "--audio-change-prob", sa.cfg.audio_change_prob,
           "Fraction of triplets that change only the audio");
  add_real(synth, "--audio-shift", sa.cfg.audio_shift, "Norm of the audio-change share");
  add_real(synth, "--visual-shift", sa.cfg.visual_shift, "Norm of the visual-change shares");
  add_real(synth, "--null-text-scale", sa.cfg.null_text_scale,
           "Norm of the placeholder text for unused fields");
  add_real(synth, "--audio-scale", sa.cfg.audio_scale, "Audio signal gain");
  add_count(synth, "--seed", sa.cfg.seed, "Random seed");

  DedupArgs da;
  auto* dd = app.add_subcommand("dedup", "Drop near-duplicate clips");
  dd->add_option("--clips", da.clips, "Clip manifest (JSONL)")->required();
  dd->add_option("--out", da.out, "Output clip manifest")->required();
  add_real(dd, "--video-threshold", da.thresholds.video, "Video cosine threshold");
  add_real(dd, "--audio-threshold", da.thresholds.audio, "Audio-caption cosine threshold");

  MineArgs ma;
  auto* mine = app.add_subcommand("mine", "Mine two-band candidate pairs");
  mine->add_option("--clips", ma.clips, "Clip manifest (JSONL)")->required();
  mine->add_option("--out", ma.out, "Output pair list (JSONL)")->required();
  add_real(mine, "--band1-video-min", ma.bands.band1_video.lo, "Band 1 lower video bound");
  add_real(mine, "--band1-video-max", ma.bands.band1_video.hi, "Band 1 upper video bound");
  add_real(mine, "--band1-audio-min", ma.bands.band1_audio.lo, "Band 1 lower audio bound");
  add_real(mine, "--band1-audio-max", ma.bands.band1_audio.hi, "Band 1 upper audio bound");
  add_real(mine, "--band2-video-min", ma.bands.band2_video.lo, "Band 2 lower video bound");
  add_real(mine, "--band2-video-max", ma.bands.band2_video.hi, "Band 2 upper video bound");
  add_real(mine, "--band2-audio-min", ma.bands.band2_audio.lo, "Band 2 lower audio bound");
  add_real(mine, "--band2-audio-max", ma.bands.band2_audio.hi, "Band 2 upper audio bound");
  mine->add_option("--combinator", ma.combinator, "and|or between video and audio bounds")
      ->capture_default_str();
  add_count(mine, "--threads", ma.threads, "Worker threads");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Train the fusion model");
  tr->add_option("--data", ta.data, "Dataset directory (reads train.jsonl)");
  tr->add_option("--train-manifest", ta.manifest, "Training manifest, overrides --data");
  tr->add_option("--eval-manifest", ta.eval_manifest, "Manifest for periodic evaluation");
  tr->add_option("--out", ta.out, "Output directory (default <data>/run)");
  add_count(tr, "--epochs", ta.train.epochs, "Epochs");
  add_count(tr, "--batch", ta.train.batch_size, "Batch size");
  add_real(tr, "--lr", ta.train.learning_rate, "Learning rate");
  add_count(tr, "--seed", ta.train.seed, "Random seed");
  add_count(tr, "--eval-every", ta.train.eval_every, "Evaluate every k epochs (0 = off)");
  add_real(tr, "--beta1", ta.train.beta1, "First moment decay");
  add_real(tr, "--beta2", ta.train.beta2, "Second moment decay");
  add_real(tr, "--clip-norm", ta.clip_norm, "Global gradient norm cap (0 = off)");
  tr->add_flag("--freeze-resampler", ta.freeze_resampler, "Do not update the audio resampler");
  add_count(tr, "--threads", ta.train.threads, "Worker threads for forward passes");
  add_count(tr, "--tokens", ta.model.tokens, "Resampler tokens (M)");
  add_count(tr, "--layers", ta.model.layers, "Fusion layers (L)");
  add_count(tr, "--ffn-multiplier", ta.model.ffn_multiplier, "Feed-forward width multiplier");
  add_count(tr, "--hidden", ta.model.hidden, "Weight MLP hidden width (H)");
  tr->add_option("--av-fusion", ta.av_fusion, "gated|average")->capture_default_str();
  tr->add_option("--text-fusion", ta.text_fusion, "none|average|adaptive")->capture_default_str();
  tr->add_flag("--no-audio", ta.no_audio, "Encode every clip as silent");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a test manifest");
  ev->add_option("--data", ea.data, "Dataset directory (reads test.jsonl)");
  ev->add_option("--test-manifest", ea.manifest, "Test manifest, overrides --data");
  ev->add_option("--ckpt", ea.ckpt, "Checkpoint file")->required();
  ev->add_option("--out", ea.out, "Output directory (default: next to the checkpoint)");
  ev->add_option("--drop", ea.drop, "Drop one text component: obj|act|att|audm");
  add_count(ev, "--threads", ea.threads, "Worker threads");

  GradArgs ga;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every module");
  add_count(gc, "--seeds", ga.seeds, "Number of seeds");
  add_real(gc, "--tolerance", ga.tolerance, "Maximum relative error");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    err << app.help();
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return do_synth(sa, args, out);
    if (dd->parsed()) return do_dedup(da, args, out);
    if (mine->parsed()) return do_mine(ma, args, out);
    if (tr->parsed()) return do_train(ta, args, out);
    if (ev->parsed()) return do_eval(ea, args, out);
    if (gc->parsed()) return do_gradcheck(ga, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace cova
