#pragma once

#include "zipsel/compressor.hpp"
#include "zipsel/corpus.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace zipsel {

struct SelectorConfig {
    std::uint32_t k1 = 10000;
    std::uint32_t k2 = 200;
    std::uint32_t k3 = 100;
    BudgetSpec budget;
    CodecConfig codec;
    unsigned threads = 0; // 0 = all hardware threads; no effect on output
    bool fine_with_selected = false;

    void validate() const;
};

struct TrajectoryPoint {
    std::uint32_t iteration = 0;
    double set_ratio = 0.0;
    double wall_seconds = 0.0;
};

struct SpentBudget {
    std::uint64_t samples = 0;
    std::uint64_t bytes = 0;
    std::uint64_t tokens = 0;

    std::uint64_t of(BudgetUnit unit) const;
    void add(const Sample& sample);
};

/// Result of a selection run: ids in pick order, the separator-joined
/// payload buffer, consumed budget and the per-iteration trajectory.
struct Selection {
    std::vector<std::string> ids;
    std::vector<std::uint32_t> indices; // pool indices, selection order
    std::string buffer;
    SpentBudget spent;
    std::vector<TrajectoryPoint> trajectory;
    double set_ratio = 0.0;
    bool pool_exhausted = false; // budget could not be met

    void append(const Sample& sample);
};

/// Per-sample information-redundancy scores. Initialized to standalone
/// compression ratios; the coarse stage refreshes scored candidates with
/// joint ratios against the selected buffer. Scores of never-rescored
/// samples keep their last value.
struct RedundancyState {
    const Pool* pool = nullptr;
    SelectorConfig config;
    std::vector<double> scores;        // by pool index
    std::vector<char> selected_mask;   // by pool index
    std::size_t remaining = 0;
    Selection selection;

    double score_of(std::string_view id) const;
    std::vector<std::uint32_t> remaining_indices() const;
};

/// Emitted just before each fine-stage pick is committed. `context` holds
/// the bytes candidate scores were computed against; `candidates` the
/// not-yet-picked pool indices.
struct FinePickEvent {
    std::string_view context;
    std::span<const std::uint32_t> candidates;
    std::uint32_t picked = 0;
};
using FinePickObserver = std::function<void(const FinePickEvent&)>;

/// Scores every sample standalone (parallel, thread-count independent).
RedundancyState init_state(const Pool& pool, const SelectorConfig& config);

/// The min(k1, |remaining|) remaining indices with lowest score,
/// ascending, ties by source index.
std::vector<std::uint32_t> global_stage(const RedundancyState& state, std::uint32_t k1);

/// Scores each candidate jointly with the selected buffer, writes the new
/// scores back into the state, and returns the min(k2, |candidates|)
/// lowest, ascending, ties by source index.
std::vector<std::uint32_t> coarse_stage(RedundancyState& state,
                                        std::span<const std::uint32_t> candidates,
                                        std::uint32_t k2);

/// Greedy block pick: repeatedly moves the candidate whose union with the
/// block-local set compresses worst (lowest ratio) into the block. Stops at
/// k3 picks, candidate exhaustion, or the pick that crosses the budget.
/// Commits the block to the selection and appends a trajectory point.
std::vector<std::uint32_t> fine_stage(RedundancyState& state,
                                      std::vector<std::uint32_t> candidates,
                                      std::uint32_t k3,
                                      const BudgetSpec& budget,
                                      const FinePickObserver& observer = {});

/// The full iterative global → coarse → fine loop until the budget is
/// spent or the pool is exhausted. Deterministic for a fixed pool and
/// config, for any thread count.
Selection zip_select(const Pool& pool, const SelectorConfig& config,
                     const FinePickObserver& observer = {});

/// Rebuilds a Selection (buffer, spent, set ratio) from pool indices in
/// the given order.
Selection selection_from_indices(const Pool& pool, std::span<const std::uint32_t> indices,
                                 const CodecConfig& codec);

/// Id-based variant; unknown ids are rejected.
Selection selection_from_ids(const Pool& pool, std::span<const std::string> ids,
                             const CodecConfig& codec);

} // namespace zipsel
