#include "zipsel/oracle.hpp"

#include "zipsel/errors.hpp"
#include "zipsel/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>

namespace zipsel {

namespace {

std::string make_word(rng::Engine& engine) {
    static constexpr char kLetters[] = "abcdefghijklmnopqrstuvwxyz";
    std::size_t len = 3 + rng::bounded(engine, 7);
    std::string word;
    word.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        word.push_back(kLetters[rng::bounded(engine, 26)]);
    }
    return word;
}

std::vector<std::string> make_lexicon(std::uint32_t vocab, rng::Engine& engine) {
    std::vector<std::string> words;
    words.reserve(vocab);
    for (std::uint32_t i = 0; i < vocab; ++i) words.push_back(make_word(engine));
    return words;
}

std::string doc_from_tokens(const std::vector<std::uint32_t>& tokens,
                            const std::vector<std::string>& lexicon,
                            std::uint32_t doc_bytes) {
    std::string doc;
    doc.reserve(doc_bytes + 16);
    for (std::uint32_t t : tokens) {
        if (!doc.empty()) doc += ' ';
        doc += lexicon[t];
        if (doc.size() >= doc_bytes) break;
    }
    doc.resize(doc_bytes, 'x');
    return doc;
}

std::vector<std::uint32_t> draw_tokens(std::uint32_t doc_bytes, std::uint32_t vocab,
                                       const std::vector<std::string>& lexicon,
                                       rng::Engine& engine) {
    std::vector<std::uint32_t> tokens;
    std::size_t bytes = 0;
    while (bytes < doc_bytes + 16u) {
        std::uint32_t t = static_cast<std::uint32_t>(rng::bounded(engine, vocab));
        bytes += lexicon[t].size() + 1;
        tokens.push_back(t);
    }
    return tokens;
}

// Seeded partial shuffle: the first `take` slots are a uniform draw
// without replacement.
std::vector<std::uint32_t> choose(std::uint32_t n, std::uint32_t take, rng::Engine& engine) {
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
    for (std::uint32_t i = 0; i < take && i + 1 < n; ++i) {
        std::uint32_t j = i + static_cast<std::uint32_t>(rng::bounded(engine, n - i));
        std::swap(order[i], order[j]);
    }
    order.resize(std::min(take, n));
    std::sort(order.begin(), order.end());
    return order;
}

std::string synth_record_line(const std::string& id, const std::string& doc) {
    nlohmann::json rec;
    rec["id"] = id;
    rec["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", doc}}});
    return rec.dump();
}

Sample synth_sample(const std::string& id, const std::string& doc,
                    std::uint32_t source_index, const RenderTemplate& tpl) {
    Record record;
    record.id = id;
    record.kind = SampleKind::single;
    Message msg;
    msg.role = Role::user;
    msg.label = "user";
    msg.content = doc;
    record.messages.push_back(std::move(msg));
    return sample_from_record(record, tpl, source_index, synth_record_line(id, doc));
}

std::string base_id(std::uint32_t ordinal) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "doc%05u", ordinal);
    return buf;
}

std::uint64_t binomial_guarded(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t value = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        value = value * (n - k + i) / i;
        if (value > cap) return cap + 1;
    }
    return value;
}

} // namespace

void SynthSpec::validate() const {
    if (n_base < 1) throw ValidationError("n_base must be >= 1");
    if (doc_bytes < 1) throw ValidationError("doc_bytes must be >= 1");
    if (vocab < 1) throw ValidationError("vocab must be >= 1");
    if (dup_fraction < 0.0 || near_dup_fraction < 0.0 ||
        dup_fraction + near_dup_fraction > 1.0) {
        throw ValidationError("duplicate fractions must be non-negative and sum to <= 1");
    }
}

std::optional<SynthLabel> parse_synth_id(std::string_view id) {
    if (id.size() < 8 || id.substr(0, 3) != "doc") return std::nullopt;
    std::uint32_t ordinal = 0;
    auto [ptr, ec] = std::from_chars(id.data() + 3, id.data() + 8, ordinal);
    if (ec != std::errc() || ptr != id.data() + 8) return std::nullopt;
    std::string_view rest = id.substr(8);
    SynthLabel label;
    label.base_ordinal = ordinal;
    if (rest.empty()) {
        label.kind = SynthKind::base;
    } else if (rest == ".dup") {
        label.kind = SynthKind::duplicate;
    } else if (rest == ".near") {
        label.kind = SynthKind::near_duplicate;
    } else {
        return std::nullopt;
    }
    return label;
}

Pool gen_synthetic_pool(const SynthSpec& spec, const RenderTemplate& tpl) {
    spec.validate();
    rng::Engine engine(spec.seed);
    std::vector<std::string> lexicon = make_lexicon(spec.vocab, engine);

    std::vector<std::vector<std::uint32_t>> base_tokens(spec.n_base);
    std::vector<std::string> base_docs(spec.n_base);
    for (std::uint32_t i = 0; i < spec.n_base; ++i) {
        base_tokens[i] = draw_tokens(spec.doc_bytes, spec.vocab, lexicon, engine);
        base_docs[i] = doc_from_tokens(base_tokens[i], lexicon, spec.doc_bytes);
    }

    auto planted_count = [&](double fraction) {
        return static_cast<std::uint32_t>(std::llround(fraction * spec.n_base));
    };
    std::vector<std::uint32_t> dup_of = choose(spec.n_base, planted_count(spec.dup_fraction), engine);
    std::vector<std::uint32_t> near_of = choose(spec.n_base, planted_count(spec.near_dup_fraction), engine);

    std::vector<Sample> samples;
    samples.reserve(spec.n_base + dup_of.size() + near_of.size());
    for (std::uint32_t i = 0; i < spec.n_base; ++i) {
        samples.push_back(synth_sample(base_id(i), base_docs[i],
                                       static_cast<std::uint32_t>(samples.size()), tpl));
    }
    for (std::uint32_t b : dup_of) {
        samples.push_back(synth_sample(base_id(b) + ".dup", base_docs[b],
                                       static_cast<std::uint32_t>(samples.size()), tpl));
    }
    for (std::uint32_t b : near_of) {
        // Resample 10% of the tokens, then rebuild to the same byte size.
        std::vector<std::uint32_t> tokens = base_tokens[b];
        std::uint32_t n_resample = static_cast<std::uint32_t>(tokens.size() / 10);
        std::vector<std::uint32_t> positions =
            choose(static_cast<std::uint32_t>(tokens.size()), n_resample, engine);
        for (std::uint32_t pos : positions) {
            tokens[pos] = static_cast<std::uint32_t>(rng::bounded(engine, spec.vocab));
        }
        while (true) {
            std::size_t bytes = 0;
            for (std::uint32_t t : tokens) bytes += lexicon[t].size() + 1;
            if (bytes >= spec.doc_bytes + 16u) break;
            tokens.push_back(static_cast<std::uint32_t>(rng::bounded(engine, spec.vocab)));
        }
        samples.push_back(synth_sample(base_id(b) + ".near",
                                       doc_from_tokens(tokens, lexicon, spec.doc_bytes),
                                       static_cast<std::uint32_t>(samples.size()), tpl));
    }
    return make_pool(std::move(samples), SampleKind::single);
}

SubsetResult exhaustive_best_subset(const Pool& pool, std::uint32_t k, const CodecConfig& codec) {
    if (pool.size() > 18) {
        throw ValidationError("exhaustive search is limited to pools of <= 18 samples");
    }
    if (k < 1 || k > pool.size()) {
        throw ValidationError("subset size must be in [1, |pool|]");
    }
    constexpr std::uint64_t kMaxSubsets = 1u << 20;
    if (binomial_guarded(pool.size(), k, kMaxSubsets) > kMaxSubsets) {
        throw ValidationError("exhaustive search is limited to 2^20 subsets");
    }

    std::vector<std::uint32_t> pick(k);
    for (std::uint32_t i = 0; i < k; ++i) pick[i] = i;

    SubsetResult best;
    std::string concat;
    bool first = true;
    while (true) {
        concat.clear();
        for (std::uint32_t idx : pick) {
            if (!concat.empty()) concat += kSampleSeparator;
            concat += pool.samples[idx].payload;
        }
        RatioScore score = ratio_of(concat, codec);
        // Lexicographic enumeration order makes strict < keep the
        // lexicographically smallest tie.
        if (first || score.ratio < best.ratio.ratio) {
            first = false;
            best.indices = pick;
            best.ratio = score;
        }

        // next combination
        std::int64_t pos = static_cast<std::int64_t>(k) - 1;
        while (pos >= 0 && pick[pos] == pool.size() - k + pos) --pos;
        if (pos < 0) break;
        ++pick[pos];
        for (std::uint32_t i = static_cast<std::uint32_t>(pos) + 1; i < k; ++i) {
            pick[i] = pick[i - 1] + 1;
        }
    }

    best.ids.reserve(best.indices.size());
    for (std::uint32_t idx : best.indices) best.ids.push_back(pool.samples[idx].id);
    return best;
}

RatioScore subset_ratio_in_pool_order(const Pool& pool, std::span<const std::string> ids,
                                      const CodecConfig& codec) {
    std::vector<std::uint32_t> indices;
    indices.reserve(ids.size());
    for (const std::string& id : ids) {
        auto idx = pool.index_of(id);
        if (!idx) throw ValidationError("unknown sample id \"" + id + "\"");
        indices.push_back(*idx);
    }
    std::sort(indices.begin(), indices.end());
    std::string concat;
    for (std::uint32_t idx : indices) {
        if (!concat.empty()) concat += kSampleSeparator;
        concat += pool.samples[idx].payload;
    }
    return ratio_of(concat, codec);
}

std::uint32_t greedy_step_oracle(std::string_view local_buffer, const Pool& pool,
                                 std::span<const std::uint32_t> candidates,
                                 const CodecConfig& codec) {
    if (candidates.empty()) throw InvariantError("oracle got no candidates");
    bool first = true;
    double best_ratio = 0.0;
    std::uint32_t best_idx = 0;
    std::string concat;
    for (std::uint32_t idx : candidates) {
        concat.assign(local_buffer);
        if (!concat.empty()) concat += kSampleSeparator;
        concat += pool.samples[idx].payload;
        double r = ratio_of(concat, codec).ratio;
        if (first || r < best_ratio || (r == best_ratio && idx < best_idx)) {
            first = false;
            best_ratio = r;
            best_idx = idx;
        }
    }
    return best_idx;
}

Selection random_select(const Pool& pool, const BudgetSpec& budget, std::uint64_t seed,
                        const CodecConfig& codec) {
    if (pool.samples.empty()) throw ValidationError("empty pool");
    budget.validate();

    std::vector<std::uint32_t> order(pool.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    rng::Engine engine(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::size_t j = rng::bounded(engine, i + 1);
        std::swap(order[i], order[j]);
    }

    std::vector<std::uint32_t> taken;
    std::uint64_t spent = 0;
    for (std::uint32_t idx : order) {
        taken.push_back(idx);
        spent += budget_weight(pool.samples[idx], budget.unit);
        if (spent >= budget.amount) break;
    }

    Selection sel = selection_from_indices(pool, taken, codec);
    if (spent < budget.amount) sel.pool_exhausted = true;
    return sel;
}

} // namespace zipsel
