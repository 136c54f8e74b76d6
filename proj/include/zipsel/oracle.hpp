#pragma once

#include "zipsel/compressor.hpp"
#include "zipsel/corpus.hpp"
#include "zipsel/selector.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zipsel {

/// Recipe for a seeded pool of pseudo-text documents with planted exact
/// and near duplicates. Serializes to ordinary single-mode JSONL.
struct SynthSpec {
    std::uint32_t n_base = 50;
    double dup_fraction = 0.0;
    double near_dup_fraction = 0.0;
    std::uint32_t doc_bytes = 512;
    std::uint32_t vocab = 500;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class SynthKind { base, duplicate, near_duplicate };

struct SynthLabel {
    SynthKind kind = SynthKind::base;
    std::uint32_t base_ordinal = 0;
};

/// Labels are carried in the id ("doc00007", "doc00007.dup",
/// "doc00007.near") so they survive JSONL round trips.
std::optional<SynthLabel> parse_synth_id(std::string_view id);

Pool gen_synthetic_pool(const SynthSpec& spec, const RenderTemplate& tpl = {});

struct SubsetResult {
    std::vector<std::uint32_t> indices; // ascending pool order
    std::vector<std::string> ids;
    RatioScore ratio;
};

/// Enumerates every k-subset (guarded: |pool| <= 18 and C(|pool|, k) <=
/// 2^20), scoring the separator-joined concatenation in pool order.
/// Ties resolve to the lexicographically smallest index tuple.
SubsetResult exhaustive_best_subset(const Pool& pool, std::uint32_t k, const CodecConfig& codec);

/// Ratio of a sample set concatenated in pool order — the measurement
/// exhaustive_best_subset minimizes. Deflate sizes are order sensitive, so
/// subset-versus-subset comparisons must go through this canonical order
/// rather than a selection-order buffer.
RatioScore subset_ratio_in_pool_order(const Pool& pool, std::span<const std::string> ids,
                                      const CodecConfig& codec);

/// Brute-force argmin of the joint ratio against `local_buffer`, computed
/// through the single-shot path so it is independent of the primed-stream
/// scoring the selector uses. Ties by source index.
std::uint32_t greedy_step_oracle(std::string_view local_buffer, const Pool& pool,
                                 std::span<const std::uint32_t> candidates,
                                 const CodecConfig& codec);

/// Seeded uniform shuffle, prefix until the budget is crossed (same
/// stopping rule as the selector).
Selection random_select(const Pool& pool, const BudgetSpec& budget, std::uint64_t seed,
                        const CodecConfig& codec = {});

} // namespace zipsel
