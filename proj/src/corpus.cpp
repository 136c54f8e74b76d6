#include "zipsel/corpus.hpp"

#include "zipsel/errors.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>

namespace zipsel {

namespace {

std::string line_prefix(std::size_t line_no) {
    return "line " + std::to_string(line_no) + ": ";
}

std::vector<Message> parse_messages(const nlohmann::json& arr, std::size_t line_no, const char* field) {
    if (!arr.is_array() || arr.empty()) {
        throw ValidationError(line_prefix(line_no) + "field \"" + field + "\" must be a non-empty array");
    }
    std::vector<Message> out;
    out.reserve(arr.size());
    for (const auto& m : arr) {
        if (!m.is_object() || !m.contains("role") || !m.contains("content") ||
            !m["role"].is_string() || !m["content"].is_string()) {
            throw ValidationError(line_prefix(line_no) + "malformed message in \"" + field + "\"");
        }
        Message msg;
        msg.label = m["role"].get<std::string>();
        if (msg.label.empty()) {
            throw ValidationError(line_prefix(line_no) + "empty role label");
        }
        msg.role = role_from_label(msg.label);
        msg.content = m["content"].get<std::string>();
        out.push_back(std::move(msg));
    }
    return out;
}

} // namespace

Role role_from_label(std::string_view label) {
    if (label == "system") return Role::system;
    if (label == "user") return Role::user;
    if (label == "assistant") return Role::assistant;
    return Role::other;
}

void BudgetSpec::validate() const {
    if (amount < 1) throw ValidationError("budget amount must be >= 1");
}

const char* to_string(BudgetUnit unit) {
    switch (unit) {
        case BudgetUnit::samples: return "samples";
        case BudgetUnit::bytes: return "bytes";
        case BudgetUnit::tokens: return "tokens";
    }
    return "samples";
}

BudgetUnit budget_unit_from_string(std::string_view name) {
    if (name == "samples") return BudgetUnit::samples;
    if (name == "bytes") return BudgetUnit::bytes;
    if (name == "tokens") return BudgetUnit::tokens;
    throw ValidationError("unknown budget unit \"" + std::string(name) + "\" (expected samples|bytes|tokens)");
}

std::optional<std::uint32_t> Pool::index_of(std::string_view id) const {
    auto it = id_index_.find(std::string(id));
    if (it == id_index_.end()) return std::nullopt;
    return it->second;
}

const Sample& Pool::by_id(std::string_view id) const {
    auto idx = index_of(id);
    if (!idx) throw ValidationError("unknown sample id \"" + std::string(id) + "\"");
    return samples[*idx];
}

std::string render_messages(std::span<const Message> messages, const RenderTemplate& tpl) {
    std::string out;
    for (const auto& m : messages) {
        out += m.label;
        out += tpl.role_suffix;
        out += m.content;
        out += tpl.turn_end;
    }
    return out;
}

std::string render_record(const Record& record, const RenderTemplate& tpl) {
    if (record.kind == SampleKind::single) {
        if (record.messages.empty()) throw ValidationError("record has no messages");
        return render_messages(record.messages, tpl);
    }
    if (record.chosen.empty() || record.rejected.empty()) {
        throw ValidationError("pair record needs non-empty chosen and rejected message lists");
    }
    return render_messages(record.chosen, tpl) + tpl.pair_separator + render_messages(record.rejected, tpl);
}

std::uint64_t whitespace_token_count(std::string_view text) {
    std::uint64_t count = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    if (count == 0 && !text.empty()) count = 1;
    return count;
}

std::uint64_t budget_weight(const Sample& sample, BudgetUnit unit) {
    switch (unit) {
        case BudgetUnit::samples: return 1;
        case BudgetUnit::bytes: return sample.byte_len;
        case BudgetUnit::tokens: return sample.token_len;
    }
    return 1;
}

Pool make_pool(std::vector<Sample> samples, SampleKind mode) {
    Pool pool;
    pool.mode = mode;
    pool.samples = std::move(samples);
    pool.id_index_.reserve(pool.samples.size());
    for (std::uint32_t i = 0; i < pool.samples.size(); ++i) {
        Sample& s = pool.samples[i];
        s.source_index = i;
        s.byte_len = s.payload.size();
        if (s.token_len == 0) s.token_len = whitespace_token_count(s.payload);
        auto [it, inserted] = pool.id_index_.emplace(s.id, i);
        (void)it;
        if (!inserted) {
            throw ValidationError("duplicate id \"" + s.id + "\"");
        }
        pool.total_bytes += s.byte_len;
        pool.total_tokens += s.token_len;
    }
    return pool;
}

Record parse_record_line(std::string_view line, SampleKind mode, std::size_t line_no) {
    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
        throw ValidationError(line_prefix(line_no) + "malformed record");
    }

    Record record;
    record.kind = mode;
    if (rec.contains("id")) {
        if (!rec["id"].is_string() || rec["id"].get<std::string>().empty()) {
            throw ValidationError(line_prefix(line_no) + "id must be a non-empty string");
        }
        record.id = rec["id"].get<std::string>();
    }
    if (rec.contains("tokens")) {
        if (!rec["tokens"].is_number_integer() || rec["tokens"].get<std::int64_t>() < 1) {
            throw ValidationError(line_prefix(line_no) + "tokens must be a positive integer");
        }
        record.tokens = rec["tokens"].get<std::uint64_t>();
    }
    if (mode == SampleKind::single) {
        if (!rec.contains("messages")) {
            throw ValidationError(line_prefix(line_no) + "single-mode record needs a \"messages\" field");
        }
        record.messages = parse_messages(rec["messages"], line_no, "messages");
    } else {
        if (!rec.contains("chosen") || !rec.contains("rejected")) {
            throw ValidationError(line_prefix(line_no) + "pair-mode record needs \"chosen\" and \"rejected\" fields");
        }
        record.chosen = parse_messages(rec["chosen"], line_no, "chosen");
        record.rejected = parse_messages(rec["rejected"], line_no, "rejected");
    }
    return record;
}

Sample sample_from_record(const Record& record, const RenderTemplate& tpl,
                          std::uint32_t source_index, std::string raw_line) {
    Sample s;
    s.id = record.id.value_or(std::to_string(source_index));
    s.payload = render_record(record, tpl);
    s.byte_len = s.payload.size();
    s.token_len = record.tokens.value_or(whitespace_token_count(s.payload));
    s.source_index = source_index;
    s.kind = record.kind;
    s.raw = std::move(raw_line);
    return s;
}

Pool load_pool(const std::filesystem::path& path, SampleKind mode, const RenderTemplate& tpl) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open \"" + path.string() + "\"");
    }

    std::vector<Sample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            throw ValidationError(line_prefix(line_no) + "malformed record");
        }
        Record record = parse_record_line(line, mode, line_no);
        try {
            samples.push_back(sample_from_record(record, tpl, static_cast<std::uint32_t>(samples.size()), line));
        } catch (const ValidationError& e) {
            throw ValidationError(line_prefix(line_no) + e.what());
        }
    }
    if (samples.empty()) {
        throw ValidationError("empty pool file \"" + path.string() + "\"");
    }
    try {
        return make_pool(std::move(samples), mode);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(e.what()) + " in \"" + path.string() + "\"");
    }
}

} // namespace zipsel
