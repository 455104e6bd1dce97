#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cova/dataset.hpp"
#include "cova/model.hpp"

namespace cova {

struct RankedResult {
  std::string query_id;
  std::vector<std::size_t> order;  // gallery indices, best first
  std::size_t rank = 0;            // 1-based rank of the ground truth
};

struct MetricsTable {
  Real r1 = 0.0;  // percentages
  Real r5 = 0.0;
  Real r10 = 0.0;
  Real mean_rank = 0.0;
  std::size_t queries = 0;
  std::size_t gallery = 0;
};

// Descending dot product; ties go to the lower gallery index.
RankedResult rank(std::span<const Real> query, const Tensor2& gallery, std::size_t truth,
                  std::string query_id = {});

// 1 + #(strictly better) + #(tied with a lower index), without sorting.
std::size_t rank_of(std::span<const Real> query, const Tensor2& gallery, std::size_t truth);

Real recall_at_k(std::span<const std::size_t> ranks, std::size_t k);
Real recall_at_k(std::span<const RankedResult> results, std::size_t k);
Real mean_rank(std::span<const std::size_t> ranks);
Real mean_rank(std::span<const RankedResult> results);

MetricsTable metrics_from_ranks(std::span<const std::size_t> ranks, std::size_t gallery_size);

struct EvalOptions {
  // Components cleared here are dropped from every query.
  ComponentMask keep = kAllComponents;
  std::size_t threads = 1;
};

struct Evaluation {
  MetricsTable metrics;
  std::vector<RankedResult> results;  // in triplet order
};

// Gallery embeddings are computed once; every triplet's target must be in
// the gallery (TripletRecord::target_index resolved).
Evaluation evaluate(const std::vector<TripletRecord>& triplets,
                    const std::vector<GalleryEntry>& gallery, const FusionParams& params,
                    const FusionConfig& config, const EvalOptions& options = {});

// Unit-normalized target embeddings, one row per gallery entry.
Tensor2 embed_gallery(const std::vector<GalleryEntry>& gallery, const FusionParams& params,
                      const FusionConfig& config, std::size_t threads = 1);

std::string metrics_json(const MetricsTable& m);
void print_metrics_table(std::ostream& out, const std::string& label, const MetricsTable& m);

}  // namespace cova
