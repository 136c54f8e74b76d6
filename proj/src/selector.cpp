#include "zipsel/selector.hpp"

#include "zipsel/errors.hpp"
#include "zipsel/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

namespace zipsel {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Ascending (score, source_index) order; keeps ranking stable and
// thread-count independent.
void sort_by_score(std::vector<std::uint32_t>& indices, const std::vector<double>& scores) {
    std::sort(indices.begin(), indices.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return a < b;
    });
}

} // namespace

void SelectorConfig::validate() const {
    if (k1 < 1 || k2 < 1 || k3 < 1) throw ValidationError("k1, k2 and k3 must be >= 1");
    if (!(k3 <= k2 && k2 <= k1)) {
        throw ValidationError("stage sizes must satisfy k3 <= k2 <= k1");
    }
    budget.validate();
    codec.validate();
}

std::uint64_t SpentBudget::of(BudgetUnit unit) const {
    switch (unit) {
        case BudgetUnit::samples: return samples;
        case BudgetUnit::bytes: return bytes;
        case BudgetUnit::tokens: return tokens;
    }
    return samples;
}

void SpentBudget::add(const Sample& sample) {
    samples += 1;
    bytes += sample.byte_len;
    tokens += sample.token_len;
}

void Selection::append(const Sample& sample) {
    ids.push_back(sample.id);
    indices.push_back(sample.source_index);
    if (!buffer.empty()) buffer += kSampleSeparator;
    buffer += sample.payload;
    spent.add(sample);
}

double RedundancyState::score_of(std::string_view id) const {
    auto idx = pool->index_of(id);
    if (!idx) throw ValidationError("unknown sample id \"" + std::string(id) + "\"");
    return scores[*idx];
}

std::vector<std::uint32_t> RedundancyState::remaining_indices() const {
    std::vector<std::uint32_t> out;
    out.reserve(remaining);
    for (std::uint32_t i = 0; i < selected_mask.size(); ++i) {
        if (!selected_mask[i]) out.push_back(i);
    }
    return out;
}

RedundancyState init_state(const Pool& pool, const SelectorConfig& config) {
    config.validate();
    if (pool.samples.empty()) throw ValidationError("empty pool");
    for (const Sample& s : pool.samples) {
        if (s.payload.empty()) {
            throw ValidationError("sample \"" + s.id + "\" has an empty payload");
        }
    }

    RedundancyState state;
    state.pool = &pool;
    state.config = config;
    state.scores.resize(pool.size());
    state.selected_mask.assign(pool.size(), 0);
    state.remaining = pool.size();

    parallel_for(pool.size(), config.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            state.scores[i] = ratio_of(pool.samples[i].payload, config.codec).ratio;
        }
    });
    return state;
}

std::vector<std::uint32_t> global_stage(const RedundancyState& state, std::uint32_t k1) {
    if (state.remaining == 0) throw InvariantError("pool exhausted");
    std::vector<std::uint32_t> candidates = state.remaining_indices();
    sort_by_score(candidates, state.scores);
    if (candidates.size() > k1) candidates.resize(k1);
    return candidates;
}

std::vector<std::uint32_t> coarse_stage(RedundancyState& state,
                                        std::span<const std::uint32_t> candidates,
                                        std::uint32_t k2) {
    if (candidates.empty()) throw InvariantError("coarse stage got no candidates");
    for (std::uint32_t idx : candidates) {
        if (state.selected_mask[idx]) {
            throw InvariantError("candidate \"" + state.pool->samples[idx].id + "\" is already selected");
        }
    }

    const std::string& buffer = state.selection.buffer;
    std::vector<double> joint(candidates.size());
    parallel_for(candidates.size(), state.config.threads, [&](std::size_t begin, std::size_t end) {
        DeflateContext ctx(buffer, state.config.codec);
        for (std::size_t i = begin; i < end; ++i) {
            joint[i] = ctx.ratio_with(state.pool->samples[candidates[i]].payload).ratio;
        }
    });
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        state.scores[candidates[i]] = joint[i];
    }

    std::vector<std::uint32_t> picked(candidates.begin(), candidates.end());
    sort_by_score(picked, state.scores);
    if (picked.size() > k2) picked.resize(k2);
    return picked;
}

std::vector<std::uint32_t> fine_stage(RedundancyState& state,
                                      std::vector<std::uint32_t> candidates,
                                      std::uint32_t k3,
                                      const BudgetSpec& budget,
                                      const FinePickObserver& observer) {
    if (candidates.empty()) throw InvariantError("fine stage got no candidates");
    auto t0 = Clock::now();

    const Pool& pool = *state.pool;
    // Block-local context; the selected buffer participates only when the
    // fine_with_selected variant is on.
    std::string context;
    if (state.config.fine_with_selected) context = state.selection.buffer;

    std::vector<std::uint32_t> block;
    std::uint64_t spent_now = state.selection.spent.of(budget.unit);
    std::vector<double> score(candidates.size());

    while (block.size() < k3 && !candidates.empty() && spent_now < budget.amount) {
        score.resize(candidates.size());
        parallel_for(candidates.size(), state.config.threads, [&](std::size_t begin, std::size_t end) {
            DeflateContext ctx(context, state.config.codec);
            for (std::size_t i = begin; i < end; ++i) {
                score[i] = ctx.ratio_with(pool.samples[candidates[i]].payload).ratio;
            }
        });

        std::size_t best = 0;
        for (std::size_t i = 1; i < candidates.size(); ++i) {
            if (score[i] < score[best] ||
                (score[i] == score[best] && candidates[i] < candidates[best])) {
                best = i;
            }
        }
        std::uint32_t picked = candidates[best];

        if (observer) {
            observer(FinePickEvent{context, std::span<const std::uint32_t>(candidates), picked});
        }

        const Sample& sample = pool.samples[picked];
        if (!context.empty()) context += kSampleSeparator;
        context += sample.payload;
        block.push_back(picked);
        spent_now += budget_weight(sample, budget.unit);
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(best));
    }

    for (std::uint32_t idx : block) {
        state.selection.append(pool.samples[idx]);
        state.selected_mask[idx] = 1;
    }
    state.remaining -= block.size();

    TrajectoryPoint point;
    point.iteration = static_cast<std::uint32_t>(state.selection.trajectory.size() + 1);
    point.set_ratio = ratio_of(state.selection.buffer, state.config.codec).ratio;
    point.wall_seconds = seconds_since(t0);
    state.selection.trajectory.push_back(point);
    return block;
}

Selection zip_select(const Pool& pool, const SelectorConfig& config,
                     const FinePickObserver& observer) {
    config.validate();
    RedundancyState state = init_state(pool, config);

    while (state.selection.spent.of(config.budget.unit) < config.budget.amount &&
           state.remaining > 0) {
        auto t0 = Clock::now();
        std::vector<std::uint32_t> pool_k1 = global_stage(state, config.k1);
        std::vector<std::uint32_t> pool_k2 = coarse_stage(state, pool_k1, config.k2);
        fine_stage(state, std::move(pool_k2), config.k3, config.budget, observer);
        state.selection.trajectory.back().wall_seconds = seconds_since(t0);
    }

    state.selection.set_ratio = ratio_of(state.selection.buffer, config.codec).ratio;
    if (state.selection.spent.of(config.budget.unit) < config.budget.amount) {
        state.selection.pool_exhausted = true;
    }
    return std::move(state.selection);
}

Selection selection_from_indices(const Pool& pool, std::span<const std::uint32_t> indices,
                                 const CodecConfig& codec) {
    Selection sel;
    for (std::uint32_t idx : indices) {
        if (idx >= pool.size()) throw ValidationError("sample index out of range");
        sel.append(pool.samples[idx]);
    }
    if (!sel.buffer.empty()) sel.set_ratio = ratio_of(sel.buffer, codec).ratio;
    return sel;
}

Selection selection_from_ids(const Pool& pool, std::span<const std::string> ids,
                             const CodecConfig& codec) {
    std::vector<std::uint32_t> indices;
    indices.reserve(ids.size());
    for (const std::string& id : ids) {
        auto idx = pool.index_of(id);
        if (!idx) throw ValidationError("unknown sample id \"" + id + "\"");
        indices.push_back(*idx);
    }
    return selection_from_indices(pool, indices, codec);
}

} // namespace zipsel
