#include "cova/retrieval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "cova/errors.hpp"
#include "cova/parallel.hpp"

namespace cova {

namespace {

Vec scores(std::span<const Real> query, const Tensor2& gallery) {
  if (gallery.rows() == 0) throw EmptyInputError("rank: empty gallery");
  if (query.size() != gallery.cols()) {
    throw InputError("rank: query width " + std::to_string(query.size()) +
                     " does not match gallery width " + std::to_string(gallery.cols()));
  }
  Vec s(gallery.rows());
  for (std::size_t g = 0; g < gallery.rows(); ++g) s[g] = dot(query, gallery.row(g));
  return s;
}

}  // namespace

RankedResult rank(std::span<const Real> query, const Tensor2& gallery, std::size_t truth,
                  std::string query_id) {
  Vec s = scores(query, gallery);
  if (truth >= s.size()) throw InputError("rank: ground-truth index out of range");
  RankedResult r;
  r.query_id = std::move(query_id);
  r.order.resize(s.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  r.rank = static_cast<std::size_t>(std::find(r.order.begin(), r.order.end(), truth) -
                                    r.order.begin()) + 1;
  return r;
}

std::size_t rank_of(std::span<const Real> query, const Tensor2& gallery, std::size_t truth) {
  Vec s = scores(query, gallery);
  if (truth >= s.size()) throw InputError("rank: ground-truth index out of range");
  std::size_t r = 1;
  for (std::size_t g = 0; g < s.size(); ++g) {
    if (s[g] > s[truth] || (s[g] == s[truth] && g < truth)) ++r;
  }
  return r;
}

Real recall_at_k(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) throw EmptyInputError("recall_at_k: no results");
  if (k == 0) throw InputError("recall_at_k: k must be >= 1");
  const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
  return 100.0 * static_cast<Real>(hits) / static_cast<Real>(ranks.size());
}

Real mean_rank(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw EmptyInputError("mean_rank: no results");
  Real total = 0.0;
  for (std::size_t r : ranks) total += static_cast<Real>(r);
  return total / static_cast<Real>(ranks.size());
}

namespace {

std::vector<std::size_t> ranks_of(std::span<const RankedResult> results) {
  std::vector<std::size_t> out;
  out.reserve(results.size());
  for (const auto& r : results) out.push_back(r.rank);
  return out;
}

}  // namespace

Real recall_at_k(std::span<const RankedResult> results, std::size_t k) {
  return recall_at_k(std::span<const std::size_t>(ranks_of(results)), k);
}

Real mean_rank(std::span<const RankedResult> results) {
  return mean_rank(std::span<const std::size_t>(ranks_of(results)));
}

MetricsTable metrics_from_ranks(std::span<const std::size_t> ranks, std::size_t gallery_size) {
  MetricsTable m;
  m.r1 = recall_at_k(ranks, 1);
  m.r5 = recall_at_k(ranks, 5);
  m.r10 = recall_at_k(ranks, 10);
  m.mean_rank = mean_rank(ranks);
  m.queries = ranks.size();
  m.gallery = gallery_size;
  return m;
}

Tensor2 embed_gallery(const std::vector<GalleryEntry>& gallery, const FusionParams& params,
                      const FusionConfig& config, std::size_t threads) {
  if (gallery.empty()) throw EmptyInputError("evaluate: empty gallery");
  Tensor2 out(gallery.size(), config.width);
  parallel_for(gallery.size(), threads, [&](std::size_t g) {
    Vec e = encode_target(gallery[g], params, config);
    std::copy(e.begin(), e.end(), out.row(g).begin());
  });
  return out;
}

Evaluation evaluate(const std::vector<TripletRecord>& triplets,
                    const std::vector<GalleryEntry>& gallery, const FusionParams& params,
                    const FusionConfig& config, const EvalOptions& options) {
  if (triplets.empty()) throw EmptyInputError("evaluate: no test triplets");
  for (const auto& t : triplets) {
    if (t.target_index >= gallery.size() || gallery[t.target_index].id != t.target_id) {
      throw InputError("evaluate: triplet " + t.id + " target '" + t.target_id +
                       "' is not in the gallery");
    }
  }
  Tensor2 embedded = embed_gallery(gallery, params, config, options.threads);
  Evaluation ev;
  ev.results.resize(triplets.size());
  parallel_for(triplets.size(), options.threads, [&](std::size_t i) {
    const auto& t = triplets[i];
    ComposedQuery q = encode_query(t, params, config, options.keep);
    ev.results[i] = rank(q.f_avt, embedded, t.target_index, t.id);
  });
  std::vector<std::size_t> ranks = ranks_of(ev.results);
  ev.metrics = metrics_from_ranks(ranks, gallery.size());
  return ev;
}

std::string metrics_json(const MetricsTable& m) {
  nlohmann::ordered_json j;
  j["R@1"] = m.r1;
  j["R@5"] = m.r5;
  j["R@10"] = m.r10;
  j["MnR"] = m.mean_rank;
  j["queries"] = m.queries;
  j["gallery"] = m.gallery;
  return j.dump(2) + "\n";
}

void print_metrics_table(std::ostream& out, const std::string& label, const MetricsTable& m) {
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %7s %7s %7s %8s\n", "", "R@1", "R@5", "R@10", "MnR");
  out << line;
  std::snprintf(line, sizeof line, "%-16s %7.1f %7.1f %7.1f %8.1f\n", label.c_str(), m.r1, m.r5,
                m.r10, m.mean_rank);
  out << line;
}

}  // namespace cova
