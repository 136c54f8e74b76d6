#include "zipsel/analysis.hpp"

#include "zipsel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace zipsel {

namespace {

struct XY {
    std::vector<double> x, y;
};

XY extract_xy(std::span<const VersionPoint> points, CurveAxis axis) {
    XY xy;
    for (const VersionPoint& p : points) {
        if (!p.performance) continue;
        if (axis == CurveAxis::ratio) {
            xy.x.push_back(p.compression_ratio);
        } else {
            if (!p.training_loss) continue;
            xy.x.push_back(*p.training_loss);
        }
        xy.y.push_back(*p.performance);
    }
    if (xy.x.size() < 3) {
        throw ValidationError("curve fitting needs at least 3 points with both coordinates");
    }
    auto [lo, hi] = std::minmax_element(xy.x.begin(), xy.x.end());
    if (*lo == *hi) {
        throw ValidationError("curve fitting needs a non-degenerate x range");
    }
    return xy;
}

double sse_of(const std::vector<double>& y, const std::vector<double>& fit) {
    double sse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double d = y[i] - fit[i];
        sse += d * d;
    }
    return sse;
}

double r_squared_of(const std::vector<double>& y, const std::vector<double>& fit) {
    double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sst = 0.0;
    for (double v : y) sst += (v - mean) * (v - mean);
    double sse = sse_of(y, fit);
    if (sst == 0.0) {
        return sse == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
    }
    return 1.0 - sse / sst;
}

TrendDirection endpoint_direction(const XY& xy, const std::vector<double>& fit) {
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 1; i < xy.x.size(); ++i) {
        if (xy.x[i] < xy.x[lo]) lo = i;
        if (xy.x[i] > xy.x[hi]) hi = i;
    }
    return fit[hi] < fit[lo] ? TrendDirection::decreasing : TrendDirection::increasing;
}

CurveFit fit_linear(const XY& xy) {
    double n = static_cast<double>(xy.x.size());
    double sx = std::accumulate(xy.x.begin(), xy.x.end(), 0.0);
    double sy = std::accumulate(xy.y.begin(), xy.y.end(), 0.0);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xy.x.size(); ++i) {
        sxx += xy.x[i] * xy.x[i];
        sxy += xy.x[i] * xy.y[i];
    }
    double denom = n * sxx - sx * sx;
    double a = (n * sxy - sx * sy) / denom;
    double b = (sy - a * sx) / n;

    std::vector<double> fit(xy.x.size());
    for (std::size_t i = 0; i < xy.x.size(); ++i) fit[i] = a * xy.x[i] + b;

    CurveFit out;
    out.family = CurveFamily::linear;
    out.params = {a, b};
    out.r_squared = r_squared_of(xy.y, fit);
    out.direction = endpoint_direction(xy, fit);
    return out;
}

// Least squares for y = a*u + c given u = e^(b*t); returns false when the
// normal equations are singular (constant u).
bool solve_amplitude_offset(const std::vector<double>& u, const std::vector<double>& y,
                            double& a, double& c) {
    double n = static_cast<double>(u.size());
    double su = std::accumulate(u.begin(), u.end(), 0.0);
    double suu = 0.0, suy = 0.0;
    double sy = std::accumulate(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        suu += u[i] * u[i];
        suy += u[i] * y[i];
    }
    double denom = n * suu - su * su;
    if (std::abs(denom) < 1e-12 * std::max(1.0, suu)) return false;
    a = (n * suy - su * sy) / denom;
    c = (sy - a * su) / n;
    return true;
}

CurveFit fit_exponential(const XY& xy) {
    double xmin = *std::min_element(xy.x.begin(), xy.x.end());
    double xmax = *std::max_element(xy.x.begin(), xy.x.end());
    double span = xmax - xmin;

    // Fit y = a'*e^(b'*t) + c on t = (x - xmin)/span, scanning b' on a
    // coarse grid then refining around the best cell.
    std::vector<double> t(xy.x.size());
    for (std::size_t i = 0; i < xy.x.size(); ++i) t[i] = (xy.x[i] - xmin) / span;

    double best_b = 0.0, best_a = 0.0, best_c = 0.0;
    double best_sse = std::numeric_limits<double>::infinity();
    std::vector<double> u(t.size()), fit(t.size());

    auto try_b = [&](double b) {
        if (b == 0.0) return;
        for (std::size_t i = 0; i < t.size(); ++i) u[i] = std::exp(b * t[i]);
        double a, c;
        if (!solve_amplitude_offset(u, xy.y, a, c)) return;
        for (std::size_t i = 0; i < t.size(); ++i) fit[i] = a * u[i] + c;
        double sse = sse_of(xy.y, fit);
        if (sse < best_sse) {
            best_sse = sse;
            best_b = b;
            best_a = a;
            best_c = c;
        }
    };

    for (double b = -30.0; b <= 30.0 + 1e-12; b += 0.05) try_b(b);
    double center = best_b;
    for (double b = center - 0.05; b <= center + 0.05 + 1e-12; b += 0.001) try_b(b);

    if (!std::isfinite(best_sse)) {
        throw ValidationError("exponential fit failed on the given points");
    }

    // Back to x space: a*e^(b*x) + c.
    double b = best_b / span;
    double a = best_a * std::exp(-best_b * xmin / span);
    double c = best_c;

    for (std::size_t i = 0; i < t.size(); ++i) fit[i] = best_a * std::exp(best_b * t[i]) + best_c;

    CurveFit out;
    out.family = CurveFamily::exponential;
    out.params = {a, b, c};
    out.r_squared = r_squared_of(xy.y, fit);
    out.direction = endpoint_direction(xy, fit);
    return out;
}

// Pool-adjacent-violators for a non-increasing fit over x-ascending order.
CurveFit fit_isotonic_decreasing(const XY& xy) {
    std::size_t n = xy.x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xy.x[a] < xy.x[b]; });

    // PAV on negated values gives the non-increasing fit.
    struct Block {
        double sum;
        std::size_t count;
    };
    std::vector<Block> blocks;
    blocks.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        blocks.push_back({-xy.y[order[k]], 1});
        while (blocks.size() > 1) {
            Block& prev = blocks[blocks.size() - 2];
            Block& last = blocks.back();
            if (prev.sum / static_cast<double>(prev.count) <=
                last.sum / static_cast<double>(last.count)) {
                break;
            }
            prev.sum += last.sum;
            prev.count += last.count;
            blocks.pop_back();
        }
    }

    std::vector<double> fit(n);
    std::size_t pos = 0;
    for (const Block& blk : blocks) {
        double level = -blk.sum / static_cast<double>(blk.count);
        for (std::size_t i = 0; i < blk.count; ++i) fit[order[pos++]] = level;
    }

    CurveFit out;
    out.family = CurveFamily::isotonic_decreasing;
    out.params = fit;
    out.r_squared = r_squared_of(xy.y, fit);
    out.direction = TrendDirection::decreasing;
    return out;
}

std::size_t stride_of(const JointDistribution& joint, int var) {
    std::size_t stride = 1;
    for (int v = 3; v > var; --v) stride *= joint.dims[static_cast<std::size_t>(v)];
    return stride;
}

// Marginal over `vars`: probabilities indexed by the mixed-radix key of
// the listed variables, in the given order.
std::vector<double> marginal(const JointDistribution& joint, std::span<const Var> vars) {
    std::size_t size = 1;
    for (Var v : vars) size *= joint.dims[static_cast<std::size_t>(v)];
    std::vector<double> out(size, 0.0);

    std::array<std::size_t, 4> strides{};
    for (int v = 0; v < 4; ++v) strides[static_cast<std::size_t>(v)] = stride_of(joint, v);

    for (std::size_t cell = 0; cell < joint.p.size(); ++cell) {
        std::size_t key = 0;
        for (Var v : vars) {
            auto vi = static_cast<std::size_t>(v);
            std::size_t digit = (cell / strides[vi]) % joint.dims[vi];
            key = key * joint.dims[vi] + digit;
        }
        out[key] += joint.p[cell];
    }
    return out;
}

double entropy_of(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

std::vector<Var> joined(std::span<const Var> a, std::span<const Var> b) {
    std::vector<Var> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

void check_disjoint(std::span<const Var> left, std::span<const Var> right) {
    if (left.empty() || right.empty()) {
        throw ValidationError("variable sets must be non-empty");
    }
    for (Var l : left) {
        for (Var r : right) {
            if (l == r) throw ValidationError("variable sets must be disjoint");
        }
    }
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t at = 0;
    while (at < s.size() && (s[at] == ' ' || s[at] == '\t')) ++at;
    return s.substr(at);
}

} // namespace

std::vector<VersionPoint> load_version_points(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open \"" + path.string() + "\"");

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty version file");
    if (trim(line) != "label,compression_ratio,training_loss,performance") {
        throw ValidationError("unexpected CSV header \"" + trim(line) + "\"");
    }

    std::vector<VersionPoint> points;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        while (cells.size() < 4) cells.emplace_back();
        if (cells.size() != 4) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 4 CSV cells");
        }

        VersionPoint p;
        p.label = cells[0];
        try {
            if (cells[1].empty()) throw std::invalid_argument("missing");
            p.compression_ratio = std::stod(cells[1]);
            if (!cells[2].empty()) p.training_loss = std::stod(cells[2]);
            if (!cells[3].empty()) p.performance = std::stod(cells[3]);
        } catch (const std::exception&) {
            throw ValidationError("line " + std::to_string(line_no) + ": bad numeric cell");
        }
        if (p.compression_ratio <= 0.0) {
            throw ValidationError("line " + std::to_string(line_no) + ": compression_ratio must be > 0");
        }
        points.push_back(std::move(p));
    }
    return points;
}

const char* to_string(CurveFamily family) {
    switch (family) {
        case CurveFamily::linear: return "linear";
        case CurveFamily::exponential: return "exponential";
        case CurveFamily::isotonic_decreasing: return "isotonic-decreasing";
    }
    return "linear";
}

const char* to_string(TrendDirection direction) {
    return direction == TrendDirection::increasing ? "increasing" : "decreasing";
}

CurveFamily curve_family_from_string(std::string_view name) {
    if (name == "linear") return CurveFamily::linear;
    if (name == "exponential") return CurveFamily::exponential;
    if (name == "isotonic" || name == "isotonic-decreasing") return CurveFamily::isotonic_decreasing;
    throw ValidationError("unknown curve family \"" + std::string(name) + "\"");
}

CurveFit fit_entropy_curve(std::span<const VersionPoint> points, CurveAxis x_axis,
                           CurveFamily family) {
    XY xy = extract_xy(points, x_axis);
    switch (family) {
        case CurveFamily::linear: return fit_linear(xy);
        case CurveFamily::exponential: return fit_exponential(xy);
        case CurveFamily::isotonic_decreasing: return fit_isotonic_decreasing(xy);
    }
    throw ValidationError("unknown curve family");
}

std::vector<std::string> detect_anomaly(std::span<const VersionPoint> versions) {
    if (versions.size() < 2) {
        throw ValidationError("anomaly detection needs at least 2 versions");
    }
    std::vector<std::string> flagged;
    for (std::size_t i = 1; i < versions.size(); ++i) {
        const VersionPoint& prev = versions[i - 1];
        const VersionPoint& cur = versions[i];
        bool ratio_rose = cur.compression_ratio > prev.compression_ratio;
        bool loss_comparable = prev.training_loss && cur.training_loss;
        bool loss_rose = loss_comparable && *cur.training_loss > *prev.training_loss;
        if (ratio_rose && (!loss_comparable || loss_rose)) {
            flagged.push_back(cur.label);
        }
    }
    return flagged;
}

namespace {

Histogram histogram_of(std::span<const std::uint64_t> values, double lo, double width,
                       std::size_t bins) {
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
    h.counts.assign(bins, 0);
    for (std::uint64_t v : values) {
        auto bin = static_cast<std::size_t>((static_cast<double>(v) - lo) / width);
        if (bin >= bins) bin = bins - 1;
        ++h.counts[bin];
    }
    return h;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

} // namespace

StatsReport selection_stats(const Selection& selection, const Pool& pool,
                            const CodecConfig& codec, const Selection* reference) {
    if (selection.ids.empty()) throw ValidationError("empty selection");

    auto token_lengths = [&](const Selection& sel) {
        std::vector<std::uint64_t> lens;
        lens.reserve(sel.ids.size());
        for (const std::string& id : sel.ids) lens.push_back(pool.by_id(id).token_len);
        return lens;
    };

    std::vector<std::uint64_t> tokens = token_lengths(selection);
    std::vector<double> token_d(tokens.begin(), tokens.end());
    std::vector<double> bytes_d;
    bytes_d.reserve(selection.ids.size());
    for (const std::string& id : selection.ids) {
        bytes_d.push_back(static_cast<double>(pool.by_id(id).byte_len));
    }

    StatsReport report;
    report.sample_count = selection.ids.size();
    report.set_ratio = ratio_of(selection.buffer, codec);
    report.mean_bytes = std::accumulate(bytes_d.begin(), bytes_d.end(), 0.0) / bytes_d.size();
    report.median_bytes = median_of(bytes_d);
    report.mean_tokens = std::accumulate(token_d.begin(), token_d.end(), 0.0) / token_d.size();
    report.median_tokens = median_of(token_d);
    report.trajectory = selection.trajectory;
    for (const TrajectoryPoint& tp : selection.trajectory) {
        report.total_wall_seconds += tp.wall_seconds;
    }

    constexpr std::size_t kBins = 30;
    std::vector<std::uint64_t> ref_tokens;
    if (reference) ref_tokens = token_lengths(*reference);

    std::uint64_t lo = *std::min_element(tokens.begin(), tokens.end());
    std::uint64_t hi = *std::max_element(tokens.begin(), tokens.end());
    if (!ref_tokens.empty()) {
        lo = std::min(lo, *std::min_element(ref_tokens.begin(), ref_tokens.end()));
        hi = std::max(hi, *std::max_element(ref_tokens.begin(), ref_tokens.end()));
    }
    double width = (static_cast<double>(hi) + 1.0 - static_cast<double>(lo)) / kBins;

    report.token_histogram = histogram_of(tokens, static_cast<double>(lo), width, kBins);
    if (reference) {
        report.reference_histogram = histogram_of(ref_tokens, static_cast<double>(lo), width, kBins);
    }
    return report;
}

void JointDistribution::validate() const {
    for (std::size_t d : dims) {
        if (d == 0) throw ValidationError("joint distribution has an empty dimension");
    }
    if (p.size() != cells()) {
        throw ValidationError("joint distribution cell count does not match its dimensions");
    }
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0) throw ValidationError("joint distribution has a negative probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw ValidationError("joint distribution probabilities sum to " + std::to_string(sum));
    }
}

double entropy(const JointDistribution& joint, std::span<const Var> vars) {
    joint.validate();
    return entropy_of(marginal(joint, vars));
}

double conditional_entropy(const JointDistribution& joint, std::span<const Var> x,
                           std::span<const Var> given) {
    check_disjoint(x, given);
    std::vector<Var> both = joined(x, given);
    joint.validate();
    return entropy_of(marginal(joint, both)) - entropy_of(marginal(joint, given));
}

double mutual_information(const JointDistribution& joint, std::span<const Var> left,
                          std::span<const Var> right) {
    joint.validate();
    check_disjoint(left, right);

    std::vector<double> p_l = marginal(joint, left);
    std::vector<double> p_r = marginal(joint, right);
    std::vector<Var> both = joined(left, right);
    std::vector<double> p_lr = marginal(joint, both);

    double info = 0.0;
    for (std::size_t l = 0; l < p_l.size(); ++l) {
        for (std::size_t r = 0; r < p_r.size(); ++r) {
            double plr = p_lr[l * p_r.size() + r];
            if (plr > 0.0) {
                info += plr * std::log2(plr / (p_l[l] * p_r[r]));
            }
        }
    }
    return info;
}

SubadditivityReport mi_subadditivity_check(const JointDistribution& joint, double tolerance) {
    joint.validate();

    constexpr std::array<Var, 1> a1{Var::a1};
    constexpr std::array<Var, 1> a2{Var::a2};
    constexpr std::array<Var, 1> q1{Var::q1};
    constexpr std::array<Var, 1> q2{Var::q2};
    constexpr std::array<Var, 2> q1q2{Var::q1, Var::q2};
    constexpr std::array<Var, 2> a1a2{Var::a1, Var::a2};
    constexpr std::array<Var, 3> a1q1q2{Var::a1, Var::q1, Var::q2};

    double gap1 = conditional_entropy(joint, a1, q1) - conditional_entropy(joint, a1, q1q2);
    if (gap1 > tolerance) {
        throw ValidationError("Markov condition H(a1|q1,q2) = H(a1|q1) violated; gap = " +
                              std::to_string(gap1));
    }
    double gap2 = conditional_entropy(joint, a2, q2) - conditional_entropy(joint, a2, a1q1q2);
    if (gap2 > tolerance) {
        throw ValidationError("Markov condition H(a2|a1,q1,q2) = H(a2|q2) violated; gap = " +
                              std::to_string(gap2));
    }

    SubadditivityReport report;
    report.lhs = mutual_information(joint, q1q2, a1a2);
    report.rhs = mutual_information(joint, q1, a1) + mutual_information(joint, q2, a2);
    report.slack = report.rhs - report.lhs;
    report.holds = report.lhs <= report.rhs + tolerance;
    return report;
}

} // namespace zipsel
