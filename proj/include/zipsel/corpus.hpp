#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace zipsel {

enum class Role { system, user, assistant, other };

/// One conversation turn. `label` is the on-the-wire role string and is
/// what rendering emits, so unknown roles pass through unchanged.
struct Message {
    Role role = Role::other;
    std::string label;
    std::string content;
};

Role role_from_label(std::string_view label);

enum class SampleKind { single, pair };

enum class BudgetUnit { samples, bytes, tokens };

struct BudgetSpec {
    BudgetUnit unit = BudgetUnit::samples;
    std::uint64_t amount = 1;

    void validate() const;
};

const char* to_string(BudgetUnit unit);
BudgetUnit budget_unit_from_string(std::string_view name);

/// Byte-serialization rules for turning records into compressible payloads.
struct RenderTemplate {
    std::string role_suffix = ": ";
    std::string turn_end = "\n";
    std::string pair_separator = "\n\n";
};

/// One selectable unit. In pair mode a chosen-rejected pair is a single
/// atomic sample whose payload and weights cover both texts.
struct Sample {
    std::string id;
    std::string payload;
    std::uint64_t byte_len = 0;
    std::uint64_t token_len = 0;
    std::uint32_t source_index = 0;
    SampleKind kind = SampleKind::single;
    std::string raw; // original JSONL line, re-emitted on output
};

/// Immutable ordered sample collection. Safe to share across threads once
/// constructed.
struct Pool {
    std::vector<Sample> samples;
    SampleKind mode = SampleKind::single;
    std::uint64_t total_bytes = 0;
    std::uint64_t total_tokens = 0;

    std::size_t size() const { return samples.size(); }
    std::optional<std::uint32_t> index_of(std::string_view id) const;
    const Sample& by_id(std::string_view id) const;

private:
    std::unordered_map<std::string, std::uint32_t> id_index_;
    friend Pool make_pool(std::vector<Sample> samples, SampleKind mode);
};

/// Parsed JSONL record prior to rendering.
struct Record {
    std::optional<std::string> id;
    std::vector<Message> messages;          // single mode
    std::vector<Message> chosen, rejected;  // pair mode
    std::optional<std::uint64_t> tokens;
    SampleKind kind = SampleKind::single;
};

/// `<role>: <content>\n` per message, concatenated in order.
std::string render_messages(std::span<const Message> messages, const RenderTemplate& tpl);

/// Deterministic payload bytes for a record. Pair records join the chosen
/// and rejected renders with the template's pair separator.
std::string render_record(const Record& record, const RenderTemplate& tpl);

/// Whitespace-delimited token count, clamped to 1 for non-empty text.
std::uint64_t whitespace_token_count(std::string_view text);

std::uint64_t budget_weight(const Sample& sample, BudgetUnit unit);

/// Builds a validated Pool: recomputes byte lengths, fills token fallbacks,
/// computes totals, and indexes ids (duplicates rejected).
Pool make_pool(std::vector<Sample> samples, SampleKind mode);

/// Parses one JSONL line into a Record. Throws ValidationError with the
/// 1-based line number on malformed input.
Record parse_record_line(std::string_view line, SampleKind mode, std::size_t line_no);

Sample sample_from_record(const Record& record, const RenderTemplate& tpl,
                          std::uint32_t source_index, std::string raw_line);

/// Loads a JSONL pool. One Sample per record, ingestion order preserved,
/// nothing skipped silently.
Pool load_pool(const std::filesystem::path& path, SampleKind mode, const RenderTemplate& tpl = {});

} // namespace zipsel
