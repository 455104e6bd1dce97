#include "cova/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "cova/embedding_io.hpp"
#include "cova/errors.hpp"
#include "cova/parallel.hpp"

namespace cova {

Vec clip_embedding(const Tensor2& frames) {
  if (frames.rows() == 0) throw EmptyInputError("clip_embedding: no frames");
  return column_mean(frames);
}

std::vector<ClipRecord> dedup(const std::vector<ClipRecord>& records,
                              const DedupThresholds& thresholds) {
  std::vector<ClipRecord> kept;
  for (const auto& r : records) {
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const ClipRecord& k) {
      return cosine_similarity(k.video, r.video) > thresholds.video &&
             cosine_similarity(k.audio, r.audio) > thresholds.audio;
    });
    if (!duplicate) kept.push_back(r);
  }
  return kept;
}

std::string band_name(Band b) {
  return b == Band::visual_similar_audio_differ ? "visual-similar/audio-differ"
                                                : "visual-differ/audio-similar";
}

std::optional<Band> classify_pair(Real s_v, Real s_a, const BandConfig& bands) {
  auto join = [&](bool v, bool a) { return bands.combinator == Combinator::all ? v && a : v || a; };
  if (join(bands.band1_video.contains(s_v), bands.band1_audio.contains(s_a))) {
    return Band::visual_similar_audio_differ;
  }
  if (join(bands.band2_video.contains(s_v), bands.band2_audio.contains(s_a))) {
    return Band::visual_differ_audio_similar;
  }
  return std::nullopt;
}

std::vector<CandidatePair> mine_pairs(const std::vector<ClipRecord>& records,
                                      const BandConfig& bands, std::size_t threads) {
  const std::size_t n = records.size();
  std::vector<std::vector<CandidatePair>> rows(n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Real s_v = cosine_similarity(records[i].video, records[j].video);
      const Real s_a = cosine_similarity(records[i].audio, records[j].audio);
      auto band = classify_pair(s_v, s_a, bands);
      if (!band) continue;
      const bool swap = records[j].id < records[i].id;
      rows[i].push_back({swap ? records[j].id : records[i].id,
                         swap ? records[i].id : records[j].id, s_v, s_a, *band});
    }
  });
  std::vector<CandidatePair> out;
  for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  std::sort(out.begin(), out.end(), [](const CandidatePair& a, const CandidatePair& b) {
    return std::tie(a.band, a.id_a, a.id_b) < std::tie(b.band, b.id_a, b.id_b);
  });
  return out;
}

std::vector<ClipRecord> load_clips(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw LoadError("cannot open clip manifest " + manifest.string());
  const auto base = manifest.parent_path();
  std::vector<ClipRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line);
    ClipRecord r;
    r.id = j.at("id").get<std::string>();
    r.frames_path = j.at("frames").get<std::string>();
    r.caption_path = j.at("audio_caption").get<std::string>();
    try {
      r.video = clip_embedding(read_tensor(base / r.frames_path));
      Tensor2 cap = read_tensor(base / r.caption_path);
      if (cap.rows() != 1) throw LoadError("audio_caption must be a single vector");
      r.audio.assign(cap.values().begin(), cap.values().end());
    } catch (const Error& e) {
      throw LoadError("record " + r.id + ": " + e.what());
    }
    if (r.audio.size() != r.video.size()) {
      throw LoadError("record " + r.id + ": dim mismatch between frames and audio_caption");
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_clips(const std::vector<ClipRecord>& records, const std::filesystem::path& source_dir,
                 const std::filesystem::path& out) {
  namespace fs = std::filesystem;
  const fs::path out_dir = fs::absolute(out).parent_path();
  fs::create_directories(out_dir);
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw Error("io", "cannot write " + out.string());
  auto rel = [&](const std::string& p) {
    return fs::relative(fs::absolute(source_dir / p), out_dir).generic_string();
  };
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["frames"] = rel(r.frames_path);
    j["audio_caption"] = rel(r.caption_path);
    f << j.dump() << "\n";
  }
}

void write_pairs(const std::vector<CandidatePair>& pairs, const std::filesystem::path& out) {
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw Error("io", "cannot write " + out.string());
  for (const auto& p : pairs) {
    nlohmann::ordered_json j;
    j["id_a"] = p.id_a;
    j["id_b"] = p.id_b;
    j["s_v"] = p.s_v;
    j["s_a"] = p.s_a;
    j["band"] = static_cast<int>(p.band);
    j["band_name"] = band_name(p.band);
    j["caption_a"] = "";
    j["caption_b"] = "";
    j["modification"] = {{"obj", ""}, {"act", ""}, {"att", ""}, {"audm", ""}};
    j["verified"] = nullptr;
    f << j.dump() << "\n";
  }
}

}  // namespace cova
