// zipsel — compression-ratio-driven data selection for alignment corpora.
//
// Subcommands: select, score, stats, analyze, sweep, synth, oracle.
// Exit codes: 0 success, 1 usage, 2 input validation, 3 internal error.

#include "zipsel/analysis.hpp"
#include "zipsel/compressor.hpp"
#include "zipsel/corpus.hpp"
#include "zipsel/errors.hpp"
#include "zipsel/manifest.hpp"
#include "zipsel/oracle.hpp"
#include "zipsel/selector.hpp"
#include "zipsel/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace zipsel;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

BudgetSpec parse_budget(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw ValidationError("budget must be UNIT:AMOUNT, e.g. samples:100");
    }
    BudgetSpec budget;
    budget.unit = budget_unit_from_string(text.substr(0, colon));
    try {
        budget.amount = std::stoull(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw ValidationError("budget amount must be a positive integer");
    }
    budget.validate();
    return budget;
}

unsigned threads_from_env_or(unsigned flag_value, bool flag_given) {
    if (flag_given) return flag_value;
    if (const char* env = std::getenv("ZIPSEL_THREADS")) {
        try {
            return static_cast<unsigned>(std::stoul(env));
        } catch (const std::exception&) {
            throw ValidationError("ZIPSEL_THREADS must be a non-negative integer");
        }
    }
    return 0;
}

std::vector<std::uint32_t> parse_grid(const std::string& text) {
    std::vector<std::uint32_t> values;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            values.push_back(static_cast<std::uint32_t>(std::stoul(cell)));
        } catch (const std::exception&) {
            throw ValidationError("grid values must be positive integers: \"" + text + "\"");
        }
    }
    if (values.empty()) throw ValidationError("empty grid \"" + text + "\"");
    return values;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write \"" + path.string() + "\"");
    out << text;
    if (!out) throw ValidationError("failed writing \"" + path.string() + "\"");
}

json fit_to_json(const CurveFit& fit, CurveAxis axis) {
    json j;
    j["family"] = to_string(fit.family);
    j["x"] = axis == CurveAxis::ratio ? "ratio" : "loss";
    j["params"] = fit.params;
    j["r_squared"] = fit.r_squared;
    j["direction"] = to_string(fit.direction);
    return j;
}

json histogram_to_json(const Histogram& h) {
    return json{{"edges", h.edges}, {"counts", h.counts}};
}

std::string histogram_csv(const Histogram& selection, const Histogram* reference) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,count";
    if (reference) out << ",reference_count";
    out << '\n';
    for (std::size_t i = 0; i < selection.counts.size(); ++i) {
        out << selection.edges[i] << ',' << selection.edges[i + 1] << ',' << selection.counts[i];
        if (reference) out << ',' << reference->counts[i];
        out << '\n';
    }
    return out.str();
}

struct SelectFlags {
    std::string input;
    std::string mode = "single";
    std::string strategy = "zip";
    std::string budget = "samples:1";
    SelectorConfig config;
    bool threads_given = false;
    std::uint64_t seed = 0;
    std::string out;
    std::string manifest;
    bool keep_input_order = false;
};

void add_codec_flags(CLI::App* cmd, std::string& codec_name, SelectorConfig& config) {
    cmd->add_option("--codec", codec_name, "Compression codec")
        ->check(CLI::IsMember({"deflate"}))
        ->capture_default_str();
    cmd->add_option("--level", config.codec.level, "Deflate level (0-9)")->capture_default_str();
    cmd->add_option("--context-cap", config.codec.context_cap_bytes,
                    "Approximate mode: cap the joint-scoring context to the trailing BYTES");
}

RunManifest run_selection(const SelectFlags& flags, const Pool& pool, double load_seconds) {
    SelectorConfig config = flags.config;
    config.validate();

    RunManifest manifest;
    manifest.version = kToolVersion;
    manifest.strategy = flags.strategy;
    manifest.input_path = flags.input;
    manifest.input_crc32 = file_crc32(flags.input);
    manifest.mode = pool.mode;
    manifest.pool_samples = pool.size();
    manifest.config = config;

    auto t0 = Clock::now();
    Selection selection;
    if (flags.strategy == "random") {
        manifest.seed = flags.seed;
        selection = random_select(pool, config.budget, flags.seed, config.codec);
    } else {
        selection = zip_select(pool, config);
    }
    double select_seconds = seconds_since(t0);

    manifest.selected_ids = selection.ids;
    manifest.final_ratio = ratio_of(selection.buffer, config.codec);
    manifest.spent = selection.spent;
    manifest.trajectory = selection.trajectory;
    manifest.total_wall_seconds = load_seconds + select_seconds;
    if (selection.pool_exhausted) {
        manifest.warnings.push_back(
            "budget not satisfied: pool exhausted at " +
            std::to_string(selection.spent.of(config.budget.unit)) + " of " +
            std::to_string(config.budget.amount) + " " + to_string(config.budget.unit));
    }

    // Output records: selection order by default, source order on request.
    std::vector<std::uint32_t> order = selection.indices;
    if (flags.keep_input_order) std::sort(order.begin(), order.end());
    std::ostringstream lines;
    for (std::uint32_t idx : order) lines << pool.samples[idx].raw << '\n';
    write_text(flags.out, lines.str());

    std::filesystem::path manifest_path =
        flags.manifest.empty() ? std::filesystem::path(flags.out + ".manifest.json")
                               : std::filesystem::path(flags.manifest);
    save_manifest(manifest, manifest_path);
    return manifest;
}

int cmd_select(const SelectFlags& flags_in) {
    SelectFlags flags = flags_in;
    flags.config.budget = parse_budget(flags.budget);
    flags.config.threads = threads_from_env_or(flags.config.threads, flags.threads_given);

    auto t0 = Clock::now();
    Pool pool = load_pool(flags.input, flags.mode == "pair" ? SampleKind::pair : SampleKind::single);
    double load_seconds = seconds_since(t0);

    RunManifest manifest = run_selection(flags, pool, load_seconds);
    std::cerr << "selected " << manifest.selected_ids.size() << " of " << pool.size()
              << " samples, set ratio " << manifest.final_ratio.ratio << "\n";
    for (const std::string& w : manifest.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_score(const std::string& input, const std::string& mode, const CodecConfig& codec,
              const std::string& out) {
    Pool pool = load_pool(input, mode == "pair" ? SampleKind::pair : SampleKind::single);
    std::ostringstream csv;
    csv << "id,bytes,compressed_bytes,ratio\n";
    for (const Sample& s : pool.samples) {
        RatioScore score = ratio_of(s.payload, codec);
        csv << s.id << ',' << score.original_bytes << ',' << score.compressed_bytes << ','
            << score.ratio << '\n';
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        write_text(out, csv.str());
    }
    return 0;
}

int cmd_stats(const std::string& input, const std::string& manifest_path,
              const std::string& reference_path, const std::string& out,
              const std::string& hist_csv) {
    RunManifest manifest = load_manifest(manifest_path);
    Pool pool = load_pool(input, manifest.mode);

    Selection selection = selection_from_ids(pool, manifest.selected_ids, manifest.config.codec);
    selection.trajectory = manifest.trajectory;

    Selection reference;
    const Selection* reference_ptr = nullptr;
    if (!reference_path.empty()) {
        RunManifest ref_manifest = load_manifest(reference_path);
        reference = selection_from_ids(pool, ref_manifest.selected_ids, manifest.config.codec);
        reference_ptr = &reference;
    }

    StatsReport report = selection_stats(selection, pool, manifest.config.codec, reference_ptr);

    json j;
    j["samples"] = report.sample_count;
    j["set_ratio"] = {{"ratio", report.set_ratio.ratio},
                      {"original_bytes", report.set_ratio.original_bytes},
                      {"compressed_bytes", report.set_ratio.compressed_bytes}};
    j["bytes"] = {{"mean", report.mean_bytes}, {"median", report.median_bytes}};
    j["tokens"] = {{"mean", report.mean_tokens}, {"median", report.median_tokens}};
    j["token_histogram"] = histogram_to_json(report.token_histogram);
    if (report.reference_histogram) {
        j["reference_histogram"] = histogram_to_json(*report.reference_histogram);
    }
    json traj = json::array();
    for (const TrajectoryPoint& p : report.trajectory) {
        traj.push_back({{"iteration", p.iteration},
                        {"set_ratio", p.set_ratio},
                        {"wall_seconds", p.wall_seconds}});
    }
    j["trajectory"] = traj;
    j["total_wall_seconds"] = report.total_wall_seconds;

    if (out.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        write_text(out, j.dump(2) + "\n");
    }
    if (!hist_csv.empty()) {
        const Histogram* ref = report.reference_histogram ? &*report.reference_histogram : nullptr;
        write_text(hist_csv, histogram_csv(report.token_histogram, ref));
    }
    return 0;
}

int cmd_analyze(const std::string& points_path, const std::vector<std::string>& fit_families,
                const std::string& x_axis, bool anomaly, const std::string& out) {
    if (fit_families.empty() && !anomaly) {
        throw ValidationError("nothing to do: pass --fit and/or --anomaly");
    }
    std::vector<VersionPoint> points = load_version_points(points_path);
    CurveAxis axis = x_axis == "loss" ? CurveAxis::loss : CurveAxis::ratio;

    json j;
    if (!fit_families.empty()) {
        json fits = json::array();
        for (const std::string& name : fit_families) {
            CurveFit fit = fit_entropy_curve(points, axis, curve_family_from_string(name));
            fits.push_back(fit_to_json(fit, axis));
        }
        j["fits"] = fits;
    }
    if (anomaly) {
        j["anomalies"] = detect_anomaly(points);
    }

    if (out.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        write_text(out, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_sweep(const SelectFlags& base, const std::string& k1_grid, const std::string& k2_grid,
              const std::string& k3_grid, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);

    SelectFlags flags = base;
    flags.config.budget = parse_budget(flags.budget);
    flags.config.threads = threads_from_env_or(flags.config.threads, flags.threads_given);

    auto t0 = Clock::now();
    Pool pool = load_pool(flags.input, flags.mode == "pair" ? SampleKind::pair : SampleKind::single);
    double load_seconds = seconds_since(t0);

    std::ostringstream summary;
    summary << "k1,k2,k3,selected,final_ratio,spent,wall_seconds\n";
    for (std::uint32_t k1 : parse_grid(k1_grid)) {
        for (std::uint32_t k2 : parse_grid(k2_grid)) {
            for (std::uint32_t k3 : parse_grid(k3_grid)) {
                if (!(k3 <= k2 && k2 <= k1)) {
                    std::cerr << "skipping invalid cell k1=" << k1 << " k2=" << k2
                              << " k3=" << k3 << " (needs k3 <= k2 <= k1)\n";
                    continue;
                }
                SelectFlags cell = flags;
                cell.config.k1 = k1;
                cell.config.k2 = k2;
                cell.config.k3 = k3;
                std::string stem = "sweep_k1-" + std::to_string(k1) + "_k2-" + std::to_string(k2) +
                                   "_k3-" + std::to_string(k3);
                cell.out = (std::filesystem::path(out_dir) / (stem + ".jsonl")).string();
                cell.manifest = (std::filesystem::path(out_dir) / (stem + ".manifest.json")).string();

                RunManifest manifest = run_selection(cell, pool, load_seconds);
                summary << k1 << ',' << k2 << ',' << k3 << ',' << manifest.selected_ids.size()
                        << ',' << manifest.final_ratio.ratio << ','
                        << manifest.spent.of(manifest.config.budget.unit) << ','
                        << manifest.total_wall_seconds << '\n';
                std::cerr << stem << ": ratio " << manifest.final_ratio.ratio << "\n";
            }
        }
    }
    write_text(std::filesystem::path(out_dir) / "summary.csv", summary.str());
    return 0;
}

int cmd_synth(const SynthSpec& spec, const std::string& out) {
    Pool pool = gen_synthetic_pool(spec);
    std::ostringstream lines;
    for (const Sample& s : pool.samples) lines << s.raw << '\n';
    write_text(out, lines.str());
    std::cerr << "wrote " << pool.size() << " samples to " << out << "\n";
    return 0;
}

int cmd_oracle(const std::string& input, const std::string& mode, std::uint32_t k,
               const CodecConfig& codec, const std::string& out) {
    Pool pool = load_pool(input, mode == "pair" ? SampleKind::pair : SampleKind::single);

    SubsetResult best = exhaustive_best_subset(pool, k, codec);

    SelectorConfig config;
    config.k1 = static_cast<std::uint32_t>(pool.size());
    config.k2 = static_cast<std::uint32_t>(pool.size());
    config.k3 = k;
    config.budget = {BudgetUnit::samples, k};
    config.codec = codec;
    config.threads = 1;

    bool all_steps_match = true;
    Selection greedy = zip_select(pool, config, [&](const FinePickEvent& event) {
        std::uint32_t oracle_pick = greedy_step_oracle(event.context, pool, event.candidates, codec);
        if (oracle_pick != event.picked) all_steps_match = false;
    });

    RatioScore greedy_pool_order = subset_ratio_in_pool_order(pool, greedy.ids, codec);

    json j;
    j["pool"] = input;
    j["samples"] = pool.size();
    j["k"] = k;
    j["exhaustive"] = {{"ids", best.ids}, {"ratio", best.ratio.ratio}};
    j["greedy"] = {{"ids", greedy.ids},
                   {"ratio", greedy.set_ratio},
                   {"pool_order_ratio", greedy_pool_order.ratio}};
    j["greedy_over_best_pct"] = 100.0 * (greedy_pool_order.ratio / best.ratio.ratio - 1.0);
    j["fine_picks_match_oracle"] = all_steps_match;

    if (out.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        write_text(out, j.dump(2) + "\n");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compression-ratio-driven data selection toolkit"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);

    // ---- select ----
    SelectFlags sel;
    auto* select = app.add_subcommand("select", "Select a subset minimizing the set compression ratio");
    select->add_option("--input", sel.input, "JSONL pool")->required();
    select->add_option("--mode", sel.mode, "Record mode")->check(CLI::IsMember({"single", "pair"}));
    select->add_option("--strategy", sel.strategy, "Selection strategy")
        ->check(CLI::IsMember({"zip", "random"}));
    select->add_option("--budget", sel.budget, "UNIT:AMOUNT with UNIT in samples|bytes|tokens")
        ->required();
    select->add_option("--k1", sel.config.k1, "Global stage width")->capture_default_str();
    select->add_option("--k2", sel.config.k2, "Coarse stage width")->capture_default_str();
    select->add_option("--k3", sel.config.k3, "Fine stage block size")->capture_default_str();
    std::string sel_codec = "deflate";
    add_codec_flags(select, sel_codec, sel.config);
    select->add_flag("--fine-with-selected", sel.config.fine_with_selected,
                     "Fine stage also scores against the already selected buffer");
    auto* sel_threads = select->add_option("--threads", sel.config.threads,
                                           "Worker threads (0 = all cores; ZIPSEL_THREADS fallback)");
    select->add_option("--seed", sel.seed, "Seed for --strategy random")->capture_default_str();
    select->add_option("--out", sel.out, "Selected records JSONL")->required();
    select->add_option("--manifest", sel.manifest, "Manifest path (default: <out>.manifest.json)");
    select->add_flag("--keep-input-order", sel.keep_input_order,
                     "Write output in source order instead of selection order");

    // ---- score ----
    std::string score_input, score_mode = "single", score_out;
    SelectorConfig score_cfg;
    auto* score = app.add_subcommand("score", "Per-sample standalone compression ratios (CSV)");
    score->add_option("--input", score_input, "JSONL pool")->required();
    score->add_option("--mode", score_mode, "Record mode")->check(CLI::IsMember({"single", "pair"}));
    std::string score_codec = "deflate";
    add_codec_flags(score, score_codec, score_cfg);
    score->add_option("--out", score_out, "CSV path (default: stdout)");

    // ---- stats ----
    std::string stats_input, stats_manifest, stats_reference, stats_out, stats_hist;
    auto* stats = app.add_subcommand("stats", "Length/ratio statistics for a selection manifest");
    stats->add_option("--input", stats_input, "JSONL pool the manifest was produced from")->required();
    stats->add_option("--manifest", stats_manifest, "Selection manifest")->required();
    stats->add_option("--reference", stats_reference, "Reference manifest for overlaid histograms");
    stats->add_option("--out", stats_out, "Report JSON path (default: stdout)");
    stats->add_option("--hist-csv", stats_hist, "Token-length histogram CSV path");

    // ---- analyze ----
    std::string an_points, an_x = "ratio", an_out;
    std::vector<std::string> an_fits;
    bool an_anomaly = false;
    auto* analyze = app.add_subcommand("analyze", "Fit trend curves / monitor version anomalies");
    analyze->add_option("--points", an_points, "CSV of label,compression_ratio,training_loss,performance")
        ->required();
    analyze->add_option("--fit", an_fits, "Curve family (repeatable)")
        ->check(CLI::IsMember({"linear", "exponential", "isotonic", "isotonic-decreasing"}));
    analyze->add_option("--x", an_x, "X axis for fits")->check(CLI::IsMember({"ratio", "loss"}));
    analyze->add_flag("--anomaly", an_anomaly, "Flag versions whose ratio (and loss) rose");
    analyze->add_option("--out", an_out, "Report JSON path (default: stdout)");

    // ---- sweep ----
    SelectFlags sweep_flags;
    std::string sweep_k1 = "10000", sweep_k2 = "200", sweep_k3 = "100", sweep_dir;
    auto* sweep = app.add_subcommand("sweep", "Run select over a K1/K2/K3 grid");
    sweep->add_option("--input", sweep_flags.input, "JSONL pool")->required();
    sweep->add_option("--mode", sweep_flags.mode, "Record mode")
        ->check(CLI::IsMember({"single", "pair"}));
    sweep->add_option("--budget", sweep_flags.budget, "UNIT:AMOUNT")->required();
    sweep->add_option("--k1", sweep_k1, "Comma-separated K1 grid")->capture_default_str();
    sweep->add_option("--k2", sweep_k2, "Comma-separated K2 grid")->capture_default_str();
    sweep->add_option("--k3", sweep_k3, "Comma-separated K3 grid")->capture_default_str();
    std::string sweep_codec = "deflate";
    add_codec_flags(sweep, sweep_codec, sweep_flags.config);
    sweep->add_flag("--fine-with-selected", sweep_flags.config.fine_with_selected,
                    "Fine stage also scores against the already selected buffer");
    auto* sweep_threads = sweep->add_option("--threads", sweep_flags.config.threads, "Worker threads");
    sweep->add_option("--out-dir", sweep_dir, "Output directory")->required();

    // ---- synth ----
    SynthSpec synth_spec;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic pool with planted duplicates");
    synth->add_option("--n-base", synth_spec.n_base, "Base document count")->capture_default_str();
    synth->add_option("--dup-fraction", synth_spec.dup_fraction, "Exact-duplicate fraction")
        ->capture_default_str();
    synth->add_option("--near-dup-fraction", synth_spec.near_dup_fraction, "Near-duplicate fraction")
        ->capture_default_str();
    synth->add_option("--doc-bytes", synth_spec.doc_bytes, "Bytes per document")->capture_default_str();
    synth->add_option("--vocab", synth_spec.vocab, "Lexicon size")->capture_default_str();
    synth->add_option("--seed", synth_spec.seed, "Generator seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Output JSONL")->required();

    // ---- oracle ----
    std::string or_input, or_mode = "single", or_out;
    std::uint32_t or_k = 4;
    SelectorConfig or_cfg;
    auto* oracle = app.add_subcommand("oracle", "Exhaustive-vs-greedy comparison on a tiny pool");
    oracle->add_option("--input", or_input, "JSONL pool (<= 18 samples)")->required();
    oracle->add_option("--mode", or_mode, "Record mode")->check(CLI::IsMember({"single", "pair"}));
    oracle->add_option("--k", or_k, "Subset size")->capture_default_str();
    std::string or_codec = "deflate";
    add_codec_flags(oracle, or_codec, or_cfg);
    oracle->add_option("--out", or_out, "Report JSON path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (select->parsed()) {
            sel.threads_given = sel_threads->count() > 0;
            return cmd_select(sel);
        }
        if (score->parsed()) return cmd_score(score_input, score_mode, score_cfg.codec, score_out);
        if (stats->parsed()) {
            return cmd_stats(stats_input, stats_manifest, stats_reference, stats_out, stats_hist);
        }
        if (analyze->parsed()) return cmd_analyze(an_points, an_fits, an_x, an_anomaly, an_out);
        if (sweep->parsed()) {
            sweep_flags.threads_given = sweep_threads->count() > 0;
            return cmd_sweep(sweep_flags, sweep_k1, sweep_k2, sweep_k3, sweep_dir);
        }
        if (synth->parsed()) return cmd_synth(synth_spec, synth_out);
        if (oracle->parsed()) return cmd_oracle(or_input, or_mode, or_k, or_cfg.codec, or_out);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvariantError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
