#include "cova/embedding_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include "cova/errors.hpp"
#include "cova/params.hpp"
#include "cova/random.hpp"

namespace cova {

namespace {

constexpr char kTensorMagic[5] = {'A', 'V', 'C', 'T', '1'};
constexpr char kCheckpointMagic[5] = {'A', 'V', 'C', 'K', '1'};

using Bytes = std::vector<std::uint8_t>;

template <class U>
void put_le(Bytes& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_bytes(Bytes& out, const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}

// Bounds-checked reader over an in-memory buffer.
class Reader {
 public:
  Reader(const Bytes& data, std::size_t end, std::string what)
      : data_(data), end_(end), what_(std::move(what)) {}

  template <class U>
  U get_le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(U{data_[pos_ + i]} << (8 * i));
    pos_ += sizeof(U);
    return v;
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return end_ - pos_; }

 private:
  void need(std::size_t n) {
    if (end_ - pos_ < n) throw LoadError(what_ + ": truncated");
  }

  const Bytes& data_;
  std::size_t end_;
  std::size_t pos_ = 0;
  std::string what_;
};

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const Bytes& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("io", "write failed for " + path.string());
}

void encode_tensor(Bytes& out, const Tensor2& t, DType dtype) {
  put_bytes(out, kTensorMagic, sizeof kTensorMagic);
  out.push_back(static_cast<std::uint8_t>(dtype));
  out.push_back(2);
  put_le<std::uint64_t>(out, t.rows());
  put_le<std::uint64_t>(out, t.cols());
  for (Real v : t.values()) {
    if (dtype == DType::f32) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
  }
}

Tensor2 decode_tensor(Reader& r, const std::string& what) {
  if (r.get_string(sizeof kTensorMagic) != std::string(kTensorMagic, sizeof kTensorMagic)) {
    throw LoadError(what + ": bad tensor magic");
  }
  const auto dtype = r.get_le<std::uint8_t>();
  const auto rank = r.get_le<std::uint8_t>();
  if (dtype != 1 && dtype != 2) throw LoadError(what + ": unknown dtype " + std::to_string(dtype));
  if (rank != 1 && rank != 2) throw LoadError(what + ": unsupported rank " + std::to_string(rank));
  std::uint64_t rows = 1;
  std::uint64_t cols = r.get_le<std::uint64_t>();
  if (rank == 2) {
    rows = cols;
    cols = r.get_le<std::uint64_t>();
  }
  const std::uint64_t width = dtype == 1 ? 4 : 8;
  if (cols != 0 && rows > r.remaining() / width / cols) throw LoadError(what + ": truncated");
  std::vector<Real> values(rows * cols);
  for (Real& v : values) {
    v = dtype == 1 ? static_cast<Real>(std::bit_cast<float>(r.get_le<std::uint32_t>()))
                   : std::bit_cast<double>(r.get_le<std::uint64_t>());
  }
  return Tensor2(rows, cols, std::move(values));
}

std::uint64_t fnv1a(const std::uint8_t* p, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void write_tensor(const fs::path& path, const Tensor2& t, DType dtype) {
  Bytes out;
  out.reserve(32 + t.size() * 8);
  encode_tensor(out, t, dtype);
  write_file(path, out);
}

Tensor2 read_tensor(const fs::path& path) {
  Bytes data = read_file(path);
  Reader r(data, data.size(), path.string());
  Tensor2 t = decode_tensor(r, path.string());
  if (r.remaining() != 0) throw LoadError(path.string() + ": trailing bytes");
  return t;
}

void round_to_f32(Tensor2& t) {
  for (Real& v : t.values()) v = static_cast<float>(v);
}

// ---- manifest ----

namespace {

Tensor2 load_field(const nlohmann::json& rec, const std::string& id, const char* field,
                   const fs::path& base) {
  if (!rec.contains(field) || !rec[field].is_string()) {
    throw LoadError("record " + id + ": missing field '" + field + "'");
  }
  const fs::path path = base / rec[field].get<std::string>();
  if (!fs::exists(path)) {
    throw LoadError("record " + id + ": missing tensor file " + path.string());
  }
  try {
    return read_tensor(path);
  } catch (const LoadError& e) {
    throw LoadError("record " + id + ": " + e.what());
  }
}

void expect_shape(const Tensor2& t, std::size_t rows, std::size_t cols, const std::string& id,
                  const char* field, bool allow_empty = false) {
  if (allow_empty && t.rows() == 0 && (t.cols() == cols || t.cols() == 0)) return;
  if (t.rows() != rows || t.cols() != cols) {
    throw LoadError("record " + id + ": dim mismatch in " + field + ": got " +
                    std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ", expected " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

Dataset load_dataset(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw LoadError("cannot open manifest " + manifest.string());
  const fs::path base = manifest.parent_path();
  Dataset data;
  bool have_dims = false;
  std::unordered_set<std::string> triplet_ids;
  std::unordered_set<std::string> gallery_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw LoadError(manifest.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const std::string role = rec.value("role", "");
    if (role == "meta") {
      data.dims = {rec.at("N").get<std::size_t>(), rec.at("T").get<std::size_t>(),
                   rec.at("D").get<std::size_t>(), rec.at("D_a").get<std::size_t>()};
      have_dims = true;
      continue;
    }
    if (!rec.contains("id") || !rec["id"].is_string()) {
      throw LoadError(manifest.string() + ":" + std::to_string(line_no) + ": record without id");
    }
    const std::string id = rec["id"].get<std::string>();
    if (role == "triplet") {
      if (!triplet_ids.insert(id).second) throw LoadError("record " + id + ": duplicate id");
      TripletRecord t;
      t.id = id;
      t.query_frames = load_field(rec, id, "query_frames", base);
      t.query_audio = load_field(rec, id, "query_audio", base);
      t.text = load_field(rec, id, "text", base);
      if (!rec.contains("target_id") || !rec["target_id"].is_string()) {
        throw LoadError("record " + id + ": missing field 'target_id'");
      }
      t.target_id = rec["target_id"].get<std::string>();
      if (rec.contains("carriers")) t.carriers = rec["carriers"].get<std::vector<std::string>>();
      if (!have_dims) {
        data.dims = {t.query_frames.rows(), t.query_audio.rows(), t.query_frames.cols(),
                     t.query_audio.cols()};
        have_dims = true;
      }
      const auto& d = data.dims;
      expect_shape(t.query_frames, d.frames, d.width, id, "query_frames");
      expect_shape(t.query_audio, d.audio_tokens, d.audio_width, id, "query_audio", true);
      expect_shape(t.text, kTextComponents, d.width, id, "text");
      data.triplets.push_back(std::move(t));
    } else if (role == "gallery") {
      if (!gallery_ids.insert(id).second) throw LoadError("record " + id + ": duplicate id");
      GalleryEntry g;
      g.id = id;
      g.frames = load_field(rec, id, "frames", base);
      g.audio = load_field(rec, id, "audio", base);
      if (!have_dims) {
        data.dims = {g.frames.rows(), g.audio.rows(), g.frames.cols(), g.audio.cols()};
        have_dims = true;
      }
      const auto& d = data.dims;
      expect_shape(g.frames, d.frames, d.width, id, "frames");
      expect_shape(g.audio, d.audio_tokens, d.audio_width, id, "audio", true);
      data.gallery.push_back(std::move(g));
    } else {
      throw LoadError("record " + id + ": unknown role '" + role + "'");
    }
  }
  data.resolve_targets();
  return data;
}

void save_dataset(const Dataset& data, const fs::path& manifest) {
  const fs::path base = manifest.parent_path();
  const fs::path tensors = "tensors";
  fs::create_directories(base / tensors);
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw Error("io", "cannot write " + manifest.string());
  nlohmann::ordered_json meta;
  meta["role"] = "meta";
  meta["N"] = data.dims.frames;
  meta["T"] = data.dims.audio_tokens;
  meta["D"] = data.dims.width;
  meta["D_a"] = data.dims.audio_width;
  out << meta.dump() << "\n";
  auto put = [&](const std::string& name, const Tensor2& t) {
    const fs::path rel = tensors / name;
    write_tensor(base / rel, t);
    return rel.generic_string();
  };
  for (const auto& t : data.triplets) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["role"] = "triplet";
    j["query_frames"] = put(t.id + ".frames.avct", t.query_frames);
    j["query_audio"] = put(t.id + ".audio.avct", t.query_audio);
    j["text"] = put(t.id + ".text.avct", t.text);
    j["target_id"] = t.target_id;
    if (!t.carriers.empty()) j["carriers"] = t.carriers;
    out << j.dump() << "\n";
  }
  for (const auto& g : data.gallery) {
    nlohmann::ordered_json j;
    j["id"] = g.id;
    j["role"] = "gallery";
    j["frames"] = put(g.id + ".frames.avct", g.frames);
    j["audio"] = put(g.id + ".audio.avct", g.audio);
    out << j.dump() << "\n";
  }
}

// ---- checkpoints ----

nlohmann::ordered_json to_json(const FusionConfig& c) {
  nlohmann::ordered_json j;
  j["width"] = c.width;
  j["audio_width"] = c.audio_width;
  j["tokens"] = c.tokens;
  j["layers"] = c.layers;
  j["ffn_multiplier"] = c.ffn_multiplier;
  j["hidden"] = c.hidden;
  j["av_fusion"] = to_string(c.av_fusion);
  j["text_fusion"] = to_string(c.text_fusion);
  j["use_audio"] = c.use_audio;
  return j;
}

FusionConfig fusion_config_from_json(const nlohmann::json& j) {
  FusionConfig c;
  c.width = j.at("width").get<std::size_t>();
  c.audio_width = j.at("audio_width").get<std::size_t>();
  c.tokens = j.at("tokens").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.ffn_multiplier = j.at("ffn_multiplier").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.av_fusion = parse_av_fusion(j.at("av_fusion").get<std::string>());
  c.text_fusion = parse_text_fusion(j.at("text_fusion").get<std::string>());
  c.use_audio = j.at("use_audio").get<bool>();
  return c;
}

void save_checkpoint(const fs::path& path, const FusionParams& params, const FusionConfig& config,
                     std::uint64_t step) {
  Bytes out;
  put_bytes(out, kCheckpointMagic, sizeof kCheckpointMagic);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, step);
  const std::string cfg = to_json(config).dump();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.size()));
  put_bytes(out, cfg.data(), cfg.size());
  const auto tensors = named_tensors(params);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    put_bytes(out, name.data(), name.size());
    encode_tensor(out, *t, DType::f64);
  }
  put_le<std::uint64_t>(out, fnv1a(out.data(), out.size()));
  write_file(path, out);
}

Checkpoint load_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw CheckpointError("checkpoint not found: " + path.string());
  Bytes data = read_file(path);
  const std::string what = "checkpoint " + path.string();
  if (data.size() < sizeof kCheckpointMagic + 8 ||
      std::memcmp(data.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0) {
    throw CheckpointError(what + ": not a checkpoint file");
  }
  const std::size_t body = data.size() - 8;
  std::uint64_t stored = 0;
  for (std::size_t i = 0; i < 8; ++i) stored |= std::uint64_t{data[body + i]} << (8 * i);
  Checkpoint ck;
  try {
    Reader r(data, body, what);
    r.get_string(sizeof kCheckpointMagic);
    ck.version = r.get_le<std::uint32_t>();
    if (ck.version != kCheckpointVersion) {
      throw CheckpointError(what + ": version " + std::to_string(ck.version) + ", expected " +
                            std::to_string(kCheckpointVersion));
    }
    if (fnv1a(data.data(), body) != stored) {
      throw CheckpointError(what + ": checksum mismatch (truncated or corrupt)");
    }
    ck.step = r.get_le<std::uint64_t>();
    const auto cfg_len = r.get_le<std::uint32_t>();
    ck.config = fusion_config_from_json(nlohmann::json::parse(r.get_string(cfg_len)));
    ck.params = init_fusion(ck.config, 0);
    auto slots = named_tensors(ck.params);
    const auto count = r.get_le<std::uint32_t>();
    if (count != slots.size()) {
      throw CheckpointError(what + ": holds " + std::to_string(count) + " tensors, config needs " +
                            std::to_string(slots.size()));
    }
    for (auto& [name, t] : slots) {
      const auto len = r.get_le<std::uint32_t>();
      const std::string stored_name = r.get_string(len);
      if (stored_name != name) {
        throw CheckpointError(what + ": expected tensor " + name + ", found " + stored_name);
      }
      Tensor2 value = decode_tensor(r, what + " tensor " + name);
      if (!value.same_shape(*t)) throw CheckpointError(what + ": bad shape for " + name);
      *t = std::move(value);
    }
    if (r.remaining() != 0) throw CheckpointError(what + ": trailing bytes");
  } catch (const LoadError& e) {
    throw CheckpointError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(what + ": bad config: " + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(what + ": bad config: " + e.what());
  }
  return ck;
}

Checkpoint load_checkpoint(const fs::path& path, const FusionConfig& expected) {
  Checkpoint ck = load_checkpoint(path);
  if (!(ck.config == expected)) {
    throw ConfigMismatchError("checkpoint " + path.string() + " was saved with config " +
                              to_json(ck.config).dump() + ", expected " + to_json(expected).dump());
  }
  return ck;
}

// ---- synthetic data ----

nlohmann::ordered_json to_json(const SynthConfig& c) {
  nlohmann::ordered_json j;
  j["train_triplets"] = c.train_triplets;
  j["test_triplets"] = c.test_triplets;
  j["gallery_extra"] = c.gallery_extra;
  j["N"] = c.frames;
  j["T"] = c.audio_tokens;
  j["D"] = c.width;
  j["D_a"] = c.audio_width;
  j["noise"] = c.noise;
  j["audio_change_prob"] = c.audio_change_prob;
  j["audio_shift"] = c.audio_shift;
  j["visual_shift"] = c.visual_shift;
  j["null_text_scale"] = c.null_text_scale;
  j["audio_scale"] = c.audio_scale;
  j["seed"] = c.seed;
  return j;
}

namespace {

Vec unit_vector(std::size_t d, Rng& rng) {
  std::normal_distribution<Real> n(0.0, 1.0);
  for (;;) {
    Vec v(d);
    for (Real& x : v) x = n(rng);
    const Real len = norm(v);
    if (len > 1e-6) {
      for (Real& x : v) x /= len;
      return v;
    }
  }
}

struct Generator {
  const SynthConfig& cfg;
  Tensor2 audio_proj;  // D×D_a
  Tensor2 null_text;   // 4×D

  Tensor2 frames(const Vec& z, Rng& rng) const {
    std::normal_distribution<Real> n(0.0, 1.0);
    Tensor2 f(cfg.frames, cfg.width);
    for (std::size_t i = 0; i < cfg.frames; ++i)
      for (std::size_t j = 0; j < cfg.width; ++j) f(i, j) = z[j] + cfg.noise * n(rng);
    round_to_f32(f);
    return f;
  }

  Tensor2 audio(const Vec& y, Rng& rng) const {
    std::normal_distribution<Real> n(0.0, 1.0);
    Tensor2 yrow = Tensor2::row_vector(y);
    Tensor2 base = matmul(yrow, audio_proj);
    Tensor2 a(cfg.audio_tokens, cfg.audio_width);
    for (std::size_t i = 0; i < cfg.audio_tokens; ++i)
      for (std::size_t j = 0; j < cfg.audio_width; ++j)
        a(i, j) = cfg.audio_scale * base(0, j) + cfg.noise * n(rng);
    round_to_f32(a);
    return a;
  }

  Tensor2 caption(const Vec& y, Rng& rng) const {
    std::normal_distribution<Real> n(0.0, 1.0);
    Tensor2 c(1, cfg.width);
    for (std::size_t j = 0; j < cfg.width; ++j) c(0, j) = y[j] + cfg.noise * n(rng);
    round_to_f32(c);
    return c;
  }

  Dataset split(const std::string& prefix, std::size_t count, std::size_t extra, Rng& rng,
                std::vector<Vec>& edits, std::vector<ClipSource>* clips) const {
    Dataset d;
    d.dims = {cfg.frames, cfg.audio_tokens, cfg.width, cfg.audio_width};
    std::uniform_real_distribution<Real> u(0.0, 1.0);
    char buf[32];
    for (std::size_t i = 0; i < count; ++i) {
      std::snprintf(buf, sizeof buf, "%05zu", i);
      const Vec z = unit_vector(cfg.width, rng);
      const Vec y = unit_vector(cfg.width, rng);
      GalleryEntry target{prefix + "-v" + buf, frames(z, rng), audio(y, rng)};

      std::array<bool, kTextComponents> active{};
      Tensor2 shares(kTextComponents, cfg.width);
      Vec query_y = y;
      if (u(rng) < cfg.audio_change_prob) {
        active[3] = true;
        const Vec s = unit_vector(cfg.width, rng);
        for (std::size_t j = 0; j < cfg.width; ++j) shares(3, j) = cfg.audio_shift * s[j];
        query_y = unit_vector(cfg.width, rng);
      } else {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
        std::array<std::size_t, 3> idx = {0, 1, 2};
        std::shuffle(idx.begin(), idx.end(), rng);
        const Real each = cfg.visual_shift / std::sqrt(static_cast<Real>(k));
        for (std::size_t c = 0; c < k; ++c) {
          active[idx[c]] = true;
          const Vec s = unit_vector(cfg.width, rng);
          for (std::size_t j = 0; j < cfg.width; ++j) shares(idx[c], j) = each * s[j];
        }
      }
      Vec edit(cfg.width, 0.0);
      for (std::size_t c = 0; c < kTextComponents; ++c)
        for (std::size_t j = 0; j < cfg.width; ++j) edit[j] += shares(c, j);
      Vec zq(cfg.width);
      for (std::size_t j = 0; j < cfg.width; ++j) zq[j] = z[j] - edit[j];

      TripletRecord t;
      t.id = prefix + "-q" + buf;
      t.query_frames = frames(zq, rng);
      t.query_audio = audio(query_y, rng);
      t.text = Tensor2(kTextComponents, cfg.width);
      for (std::size_t c = 0; c < kTextComponents; ++c) {
        const Tensor2& src = active[c] ? shares : null_text;
        for (std::size_t j = 0; j < cfg.width; ++j) t.text(c, j) = src(c, j);
        if (active[c]) t.carriers.emplace_back(kComponentNames[c + 1]);
      }
      round_to_f32(t.text);
      t.target_id = target.id;
      if (clips != nullptr) {
        clips->push_back({t.id, t.query_frames, caption(query_y, rng)});
        clips->push_back({target.id, target.frames, caption(y, rng)});
      }
      edits.push_back(std::move(edit));
      d.triplets.push_back(std::move(t));
      d.gallery.push_back(std::move(target));
    }
    for (std::size_t i = 0; i < extra; ++i) {
      std::snprintf(buf, sizeof buf, "%05zu", i);
      const Vec z = unit_vector(cfg.width, rng);
      const Vec y = unit_vector(cfg.width, rng);
      GalleryEntry g{prefix + "-x" + buf, frames(z, rng), audio(y, rng)};
      if (clips != nullptr) clips->push_back({g.id, g.frames, caption(y, rng)});
      d.gallery.push_back(std::move(g));
    }
    d.resolve_targets();
    return d;
  }
};

}  // namespace

SynthData synth_build(const SynthConfig& config) {
  if (!(config.noise >= 0.0)) throw ConfigError("synth: noise must be >= 0");
  if (config.width < 8) throw ConfigError("synth: D must be >= 8");
  if (config.frames == 0 || config.audio_tokens == 0 || config.audio_width == 0) {
    throw ConfigError("synth: N, T and D_a must be positive");
  }
  if (config.audio_change_prob < 0.0 || config.audio_change_prob > 1.0) {
    throw ConfigError("synth: audio_change_prob must lie in [0, 1]");
  }
  Rng global = make_rng(config.seed, 0);
  Generator gen{config, random_normal(config.width, config.audio_width,
                                      1.0 / std::sqrt(static_cast<Real>(config.audio_width)), global),
                Tensor2(kTextComponents, config.width)};
  for (std::size_t c = 0; c < kTextComponents; ++c) {
    const Vec v = unit_vector(config.width, global);
    for (std::size_t j = 0; j < config.width; ++j) gen.null_text(c, j) = config.null_text_scale * v[j];
  }
  SynthData out;
  Rng train_rng = make_rng(config.seed, 1);
  Rng test_rng = make_rng(config.seed, 2);
  out.train = gen.split("train", config.train_triplets, 0, train_rng, out.train_edits, nullptr);
  out.test = gen.split("test", config.test_triplets, config.gallery_extra, test_rng,
                       out.test_edits, &out.clips);
  out.null_text = gen.null_text;
  round_to_f32(out.null_text);
  return out;
}

void synth_write(const SynthData& data, const SynthConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir / "tensors");
  save_dataset(data.train, out_dir / "train.jsonl");
  save_dataset(data.test, out_dir / "test.jsonl");
  write_tensor(out_dir / "null_text.avct", data.null_text);
  std::ofstream clips(out_dir / "clips.jsonl", std::ios::trunc);
  for (const auto& c : data.clips) {
    nlohmann::ordered_json j;
    j["id"] = c.id;
    const std::string frames = "tensors/" + c.id + ".frames.avct";
    const std::string caption = "tensors/" + c.id + ".caption.avct";
    if (!fs::exists(out_dir / frames)) write_tensor(out_dir / frames, c.frames);
    write_tensor(out_dir / caption, c.caption);
    j["frames"] = frames;
    j["audio_caption"] = caption;
    clips << j.dump() << "\n";
  }
  std::ofstream meta(out_dir / "synth.json", std::ios::trunc);
  meta << to_json(config).dump(2) << "\n";
}

}  // namespace cova
