#pragma once

#include "zipsel/compressor.hpp"
#include "zipsel/corpus.hpp"
#include "zipsel/selector.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zipsel {

/// One dataset version / selection strategy measurement.
struct VersionPoint {
    std::string label;
    double compression_ratio = 0.0;
    std::optional<double> training_loss;
    std::optional<double> performance;
};

/// Loads `label,compression_ratio,training_loss,performance` CSV rows.
/// Empty cells turn into absent fields.
std::vector<VersionPoint> load_version_points(const std::filesystem::path& path);

enum class CurveFamily { linear, exponential, isotonic_decreasing };
enum class TrendDirection { increasing, decreasing };

const char* to_string(CurveFamily family);
const char* to_string(TrendDirection direction);
CurveFamily curve_family_from_string(std::string_view name);

enum class CurveAxis { ratio, loss };

/// Fitted trend of performance against ratio or loss.
/// params: linear {a, b} for y = a*x + b; exponential {a, b, c} for
/// y = a*e^(b*x) + c; isotonic: fitted values per point in input order.
struct CurveFit {
    CurveFamily family = CurveFamily::linear;
    std::vector<double> params;
    double r_squared = 0.0;
    TrendDirection direction = TrendDirection::decreasing;
};

CurveFit fit_entropy_curve(std::span<const VersionPoint> points, CurveAxis x_axis,
                           CurveFamily family);

/// Flags a version when its compression ratio rose versus the previous
/// version and the loss signal does not contradict it (loss also rose, or
/// loss is unavailable for the comparison). Early indicator of a bad
/// incremental data update.
std::vector<std::string> detect_anomaly(std::span<const VersionPoint> versions);

struct Histogram {
    std::vector<double> edges;         // bin count + 1 boundaries
    std::vector<std::uint64_t> counts; // one per bin
};

struct StatsReport {
    RatioScore set_ratio;
    std::uint64_t sample_count = 0;
    double mean_bytes = 0.0;
    double median_bytes = 0.0;
    double mean_tokens = 0.0;
    double median_tokens = 0.0;
    Histogram token_histogram;
    std::optional<Histogram> reference_histogram; // same edges as token_histogram
    std::vector<TrajectoryPoint> trajectory;
    double total_wall_seconds = 0.0;
};

/// Length/ratio statistics for a selection. When a reference selection is
/// given, both histograms share the same 30 bins so they overlay.
StatsReport selection_stats(const Selection& selection, const Pool& pool,
                            const CodecConfig& codec, const Selection* reference = nullptr);

/// Variables of the two question-answer pairs.
enum class Var : int { q1 = 0, q2 = 1, a1 = 2, a2 = 3 };

/// Probability table over the 4-way product space (q1, q2, a1, a2),
/// flattened with a2 fastest.
struct JointDistribution {
    std::array<std::size_t, 4> dims{};
    std::vector<double> p;

    std::size_t cells() const { return dims[0] * dims[1] * dims[2] * dims[3]; }
    void validate() const;
};

/// Entropy of the marginal over `vars`, in bits.
double entropy(const JointDistribution& joint, std::span<const Var> vars);

/// H(x | given), in bits.
double conditional_entropy(const JointDistribution& joint, std::span<const Var> x,
                           std::span<const Var> given);

/// I(left; right) in bits, by direct summation with 0 log 0 := 0.
double mutual_information(const JointDistribution& joint, std::span<const Var> left,
                          std::span<const Var> right);

struct SubadditivityReport {
    double lhs = 0.0;   // I(q1 q2 ; a1 a2)
    double rhs = 0.0;   // I(q1; a1) + I(q2; a2)
    double slack = 0.0; // rhs - lhs
    bool holds = false;
};

/// Verifies I(q1 q2; a1 a2) <= I(q1; a1) + I(q2; a2). The bound is only
/// derived under H(a1|q1 q2) = H(a1|q1) and H(a2|a1 q1 q2) = H(a2|q2);
/// joints violating either condition (beyond `tolerance`) are rejected
/// with the measured gap.
SubadditivityReport mi_subadditivity_check(const JointDistribution& joint,
                                           double tolerance = 1e-9);

} // namespace zipsel
