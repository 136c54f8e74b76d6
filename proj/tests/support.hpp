#pragma once

#include "zipsel/analysis.hpp"
#include "zipsel/corpus.hpp"
#include "zipsel/oracle.hpp"
#include "zipsel/rng.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace testsup {

inline std::string random_bytes(std::uint64_t seed, std::size_t n) {
    zipsel::rng::Engine engine(seed);
    std::string s(n, '\0');
    for (auto& c : s) c = static_cast<char>(engine() & 0xFF);
    return s;
}

/// Word-like pseudo text of exactly `bytes` bytes.
inline std::string natural_text(std::uint64_t seed, std::size_t bytes) {
    zipsel::rng::Engine engine(seed);
    static constexpr char kLetters[] = "abcdefghijklmnopqrstuvwxyz";
    std::string s;
    s.reserve(bytes + 12);
    while (s.size() < bytes) {
        std::size_t len = 3 + zipsel::rng::bounded(engine, 7);
        if (!s.empty()) s += ' ';
        for (std::size_t i = 0; i < len; ++i) {
            s += kLetters[zipsel::rng::bounded(engine, 26)];
        }
    }
    s.resize(bytes);
    return s;
}

inline zipsel::Sample plain_sample(const std::string& id, const std::string& payload) {
    zipsel::Sample s;
    s.id = id;
    s.payload = payload;
    return s;
}

inline zipsel::Pool pool_of(std::vector<std::pair<std::string, std::string>> id_payloads) {
    std::vector<zipsel::Sample> samples;
    samples.reserve(id_payloads.size());
    for (auto& [id, payload] : id_payloads) samples.push_back(plain_sample(id, payload));
    return zipsel::make_pool(std::move(samples), zipsel::SampleKind::single);
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("zipsel_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_pool_jsonl(const zipsel::Pool& pool, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    for (const zipsel::Sample& s : pool.samples) out << s.raw << '\n';
}

/// p(q1,q2,a1,a2) = p(q1,q2) * W1(a1|q1) * W2(a2|q2). Satisfies the Markov
/// premises of the subadditivity bound by construction; q1 and q2 may be
/// correlated through p(q1,q2).
inline zipsel::JointDistribution product_channel_joint(
    const std::vector<std::vector<double>>& pq,       // [q1][q2]
    const std::vector<std::vector<double>>& w1,       // [q1][a1]
    const std::vector<std::vector<double>>& w2) {     // [q2][a2]
    zipsel::JointDistribution joint;
    std::size_t dq1 = pq.size();
    std::size_t dq2 = pq[0].size();
    std::size_t da1 = w1[0].size();
    std::size_t da2 = w2[0].size();
    joint.dims = {dq1, dq2, da1, da2};
    joint.p.assign(dq1 * dq2 * da1 * da2, 0.0);
    std::size_t at = 0;
    for (std::size_t i = 0; i < dq1; ++i) {
        for (std::size_t j = 0; j < dq2; ++j) {
            for (std::size_t k = 0; k < da1; ++k) {
                for (std::size_t l = 0; l < da2; ++l) {
                    joint.p[at++] = pq[i][j] * w1[i][k] * w2[j][l];
                }
            }
        }
    }
    return joint;
}

/// Random stochastic row vector.
inline std::vector<double> random_simplex(zipsel::rng::Engine& engine, std::size_t n) {
    std::vector<double> v(n);
    double sum = 0.0;
    for (double& x : v) {
        x = zipsel::rng::unit(engine) + 1e-3;
        sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
}

/// Random premise-satisfying joint: channel product over an optionally
/// correlated question pair.
inline zipsel::JointDistribution random_markov_joint(std::uint64_t seed, bool couple_sources) {
    zipsel::rng::Engine engine(seed);
    std::size_t dq1 = 2 + zipsel::rng::bounded(engine, 2);
    std::size_t dq2 = 2 + zipsel::rng::bounded(engine, 2);
    std::size_t da1 = 2 + zipsel::rng::bounded(engine, 2);
    std::size_t da2 = 2 + zipsel::rng::bounded(engine, 2);

    std::vector<std::vector<double>> pq(dq1, std::vector<double>(dq2));
    if (couple_sources) {
        std::vector<double> flat = random_simplex(engine, dq1 * dq2);
        for (std::size_t i = 0; i < dq1; ++i) {
            for (std::size_t j = 0; j < dq2; ++j) pq[i][j] = flat[i * dq2 + j];
        }
    } else {
        std::vector<double> p1 = random_simplex(engine, dq1);
        std::vector<double> p2 = random_simplex(engine, dq2);
        for (std::size_t i = 0; i < dq1; ++i) {
            for (std::size_t j = 0; j < dq2; ++j) pq[i][j] = p1[i] * p2[j];
        }
    }

    std::vector<std::vector<double>> w1(dq1), w2(dq2);
    for (auto& row : w1) row = random_simplex(engine, da1);
    for (auto& row : w2) row = random_simplex(engine, da2);
    return product_channel_joint(pq, w1, w2);
}

} // namespace testsup
