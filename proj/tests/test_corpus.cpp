#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "zipsel/corpus.hpp"
#include "zipsel/errors.hpp"

#include "support.hpp"

#include <string>

using namespace zipsel;

namespace {

const RenderTemplate kTpl{};

Message msg(const std::string& role, const std::string& content) {
    Message m;
    m.label = role;
    m.role = role_from_label(role);
    m.content = content;
    return m;
}

} // namespace

TEST_CASE("render_messages applies the role template") {
    std::vector<Message> turns{msg("user", "hi"), msg("assistant", "hello")};
    CHECK(render_messages(turns, kTpl) == "user: hi\nassistant: hello\n");

    std::vector<Message> empty_content{msg("user", "")};
    CHECK(render_messages(empty_content, kTpl) == "user: \n");

    std::vector<Message> custom{msg("tool", "ok")};
    CHECK(render_messages(custom, kTpl) == "tool: ok\n");
    CHECK(custom[0].role == Role::other);
}

TEST_CASE("render_record joins pair halves with the pair separator") {
    Record record;
    record.kind = SampleKind::pair;
    record.chosen = {msg("assistant", "a")};
    record.rejected = {msg("assistant", "b")};
    CHECK(render_record(record, kTpl) == "assistant: a\n\n\nassistant: b\n");
}

TEST_CASE("render_record rejects empty message lists") {
    Record record;
    record.kind = SampleKind::single;
    CHECK_THROWS_AS(render_record(record, kTpl), ValidationError);

    Record pair;
    pair.kind = SampleKind::pair;
    pair.chosen = {msg("assistant", "a")};
    CHECK_THROWS_AS(render_record(pair, kTpl), ValidationError);
}

TEST_CASE("rendering is pure") {
    Record record;
    record.kind = SampleKind::single;
    record.messages = {msg("user", "once"), msg("assistant", "twice")};
    CHECK(render_record(record, kTpl) == render_record(record, kTpl));
}

TEST_CASE("whitespace token fallback") {
    CHECK(whitespace_token_count("user: hi\nassistant: hello\n") == 4);
    CHECK(whitespace_token_count("") == 0);
    CHECK(whitespace_token_count("   ") == 1); // non-empty clamps to 1
    CHECK(whitespace_token_count("one") == 1);
    CHECK(whitespace_token_count("a\tb\nc d") == 4);
}

TEST_CASE("budget_weight per unit") {
    Sample s = testsup::plain_sample("x", "user: hi\nassistant: hello\n");
    Pool pool = make_pool({s}, SampleKind::single);
    const Sample& stored = pool.samples[0];
    CHECK(budget_weight(stored, BudgetUnit::samples) == 1);
    CHECK(budget_weight(stored, BudgetUnit::bytes) == stored.payload.size());
    CHECK(budget_weight(stored, BudgetUnit::tokens) == 4);
}

TEST_CASE("explicit tokens field wins over the fallback") {
    testsup::TempDir tmp;
    testsup::write_file(tmp.file("p.jsonl"),
                        R"({"id":"a","messages":[{"role":"user","content":"hi"}],"tokens":137})"
                        "\n");
    Pool pool = load_pool(tmp.file("p.jsonl"), SampleKind::single);
    CHECK(pool.samples[0].token_len == 137);
    CHECK(budget_weight(pool.samples[0], BudgetUnit::tokens) == 137);
}

TEST_CASE("load_pool ingests single-mode records in order") {
    testsup::TempDir tmp;
    std::string jsonl =
        R"({"id":"a","messages":[{"role":"user","content":"hi"}]})" "\n"
        R"({"id":"b","messages":[{"role":"user","content":"there"},{"role":"assistant","content":"yes"}]})" "\n"
        R"({"id":"c","messages":[{"role":"system","content":"x"}],"ignored_key":42})" "\n";
    testsup::write_file(tmp.file("p.jsonl"), jsonl);

    Pool pool = load_pool(tmp.file("p.jsonl"), SampleKind::single);
    REQUIRE(pool.size() == 3);
    CHECK(pool.mode == SampleKind::single);
    CHECK(pool.samples[0].id == "a");
    CHECK(pool.samples[1].id == "b");
    CHECK(pool.samples[2].id == "c");
    CHECK(pool.samples[0].source_index == 0);
    CHECK(pool.samples[2].source_index == 2);
    CHECK(pool.samples[0].payload == "user: hi\n");

    std::uint64_t bytes = 0, tokens = 0;
    for (const Sample& s : pool.samples) {
        CHECK(s.byte_len == s.payload.size());
        bytes += s.byte_len;
        tokens += s.token_len;
    }
    CHECK(pool.total_bytes == bytes);
    CHECK(pool.total_tokens == tokens);
}

TEST_CASE("load_pool ingests pair-mode records") {
    testsup::TempDir tmp;
    std::string line =
        R"({"chosen":[{"role":"assistant","content":"good"}],"rejected":[{"role":"assistant","content":"bad"}]})";
    std::string jsonl;
    for (int i = 0; i < 5; ++i) jsonl += line + "\n";
    testsup::write_file(tmp.file("pairs.jsonl"), jsonl);

    Pool pool = load_pool(tmp.file("pairs.jsonl"), SampleKind::pair);
    REQUIRE(pool.size() == 5);
    for (const Sample& s : pool.samples) {
        CHECK(s.kind == SampleKind::pair);
        CHECK(s.payload == "assistant: good\n\n\nassistant: bad\n");
    }
    // ids synthesized from the source index when absent
    CHECK(pool.samples[0].id == "0");
    CHECK(pool.samples[4].id == "4");
}

TEST_CASE("load_pool error cases") {
    testsup::TempDir tmp;

    testsup::write_file(tmp.file("broken.jsonl"), "{\n");
    CHECK_THROWS_WITH_AS(load_pool(tmp.file("broken.jsonl"), SampleKind::single),
                         doctest::Contains("line 1: malformed record"), ValidationError);

    testsup::write_file(tmp.file("dup.jsonl"),
                        R"({"id":"a","messages":[{"role":"user","content":"1"}]})" "\n"
                        R"({"id":"a","messages":[{"role":"user","content":"2"}]})" "\n");
    CHECK_THROWS_WITH_AS(load_pool(tmp.file("dup.jsonl"), SampleKind::single),
                         doctest::Contains("duplicate id"), ValidationError);

    testsup::write_file(tmp.file("empty.jsonl"), "");
    CHECK_THROWS_AS(load_pool(tmp.file("empty.jsonl"), SampleKind::single), ValidationError);

    testsup::write_file(tmp.file("blank.jsonl"),
                        R"({"id":"a","messages":[{"role":"user","content":"1"}]})" "\n\n");
    CHECK_THROWS_WITH_AS(load_pool(tmp.file("blank.jsonl"), SampleKind::single),
                         doctest::Contains("line 2"), ValidationError);

    testsup::write_file(tmp.file("nomsg.jsonl"), R"({"id":"a","messages":[]})" "\n");
    CHECK_THROWS_AS(load_pool(tmp.file("nomsg.jsonl"), SampleKind::single), ValidationError);

    testsup::write_file(tmp.file("role.jsonl"),
                        R"({"id":"a","messages":[{"role":"","content":"x"}]})" "\n");
    CHECK_THROWS_AS(load_pool(tmp.file("role.jsonl"), SampleKind::single), ValidationError);

    testsup::write_file(tmp.file("tok.jsonl"),
                        R"({"id":"a","messages":[{"role":"user","content":"x"}],"tokens":0})" "\n");
    CHECK_THROWS_AS(load_pool(tmp.file("tok.jsonl"), SampleKind::single), ValidationError);

    testsup::write_file(tmp.file("pairless.jsonl"),
                        R"({"chosen":[{"role":"assistant","content":"a"}]})" "\n");
    CHECK_THROWS_AS(load_pool(tmp.file("pairless.jsonl"), SampleKind::pair), ValidationError);

    CHECK_THROWS_AS(load_pool(tmp.file("missing.jsonl"), SampleKind::single), ValidationError);
}

TEST_CASE("load_pool tolerates CRLF line endings") {
    testsup::TempDir tmp;
    testsup::write_file(tmp.file("crlf.jsonl"),
                        R"({"id":"a","messages":[{"role":"user","content":"hi"}]})" "\r\n");
    Pool pool = load_pool(tmp.file("crlf.jsonl"), SampleKind::single);
    CHECK(pool.samples[0].payload == "user: hi\n");
}

TEST_CASE("loading twice yields byte-identical pools") {
    testsup::TempDir tmp;
    SynthSpec spec;
    spec.n_base = 20;
    spec.dup_fraction = 0.2;
    spec.doc_bytes = 128;
    spec.vocab = 100;
    spec.seed = 3;
    Pool synth = gen_synthetic_pool(spec);
    testsup::write_pool_jsonl(synth, tmp.file("p.jsonl"));

    Pool first = load_pool(tmp.file("p.jsonl"), SampleKind::single);
    Pool second = load_pool(tmp.file("p.jsonl"), SampleKind::single);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first.samples[i].id == second.samples[i].id);
        CHECK(first.samples[i].payload == second.samples[i].payload);
        CHECK(first.samples[i].raw == second.samples[i].raw);
    }
    CHECK(first.total_bytes == second.total_bytes);
    CHECK(first.total_tokens == second.total_tokens);
}

TEST_CASE("pool id lookup") {
    Pool pool = testsup::pool_of({{"a", "one two"}, {"b", "three"}});
    CHECK(pool.index_of("b") == 1);
    CHECK_FALSE(pool.index_of("zzz").has_value());
    CHECK(pool.by_id("a").payload == "one two");
    CHECK_THROWS_AS(pool.by_id("zzz"), ValidationError);
}

TEST_CASE("budget spec validation") {
    BudgetSpec bad;
    bad.amount = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK(budget_unit_from_string("tokens") == BudgetUnit::tokens);
    CHECK_THROWS_AS(budget_unit_from_string("words"), ValidationError);
}
