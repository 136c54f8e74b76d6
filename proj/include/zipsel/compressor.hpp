#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zipsel {

/// Separator inserted between concatenated sample payloads.
inline constexpr char kSampleSeparator = '\n';

enum class Codec { deflate };

struct CodecConfig {
    Codec codec = Codec::deflate;
    int level = 6;
    /// When set, joint scoring keeps only the trailing cap bytes of the
    /// context buffer (approximate mode). Absent = exact mode.
    std::optional<std::uint64_t> context_cap_bytes;

    void validate() const;
};

/// Compression-ratio measurement: ratio = original / compressed.
/// Lower ratio = less compressible = higher information density.
struct RatioScore {
    std::uint64_t original_bytes = 0;
    std::uint64_t compressed_bytes = 0;
    double ratio = 0.0;

    static RatioScore from_sizes(std::uint64_t original, std::uint64_t compressed);
};

/// Size in bytes of the raw-deflate stream for `data`. Deterministic for a
/// fixed config and codec build. Rejects empty input.
std::uint64_t compressed_size(std::string_view data, const CodecConfig& config);

/// Full compressed stream, for round-trip checks.
std::vector<unsigned char> compress_bytes(std::string_view data, const CodecConfig& config);

/// Inverse of compress_bytes. Used to enforce the losslessness contract.
std::string decompress_bytes(const std::vector<unsigned char>& stream, const CodecConfig& config);

RatioScore ratio_of(std::string_view data, const CodecConfig& config);

/// Ratio of `buffer ∥ '\n' ∥ candidate` (separator omitted for an empty
/// buffer). With context_cap_bytes set, only the trailing cap bytes of the
/// buffer participate; original_bytes counts the bytes actually compressed.
/// In exact mode this equals ratio_of of the full concatenation, bit for bit.
RatioScore joint_ratio(std::string_view buffer, std::string_view candidate, const CodecConfig& config);

/// A deflate stream primed with a fixed context, able to report the size of
/// compress(context ∥ sep ∥ candidate) for many candidates without
/// recompressing the context. The reported sizes are bit-identical to a
/// single-shot compression of the concatenation because deflate output does
/// not depend on input chunking when no intermediate flushes occur.
class DeflateContext {
public:
    DeflateContext(std::string_view context, const CodecConfig& config);
    ~DeflateContext();

    DeflateContext(const DeflateContext&) = delete;
    DeflateContext& operator=(const DeflateContext&) = delete;

    /// Size of the compressed stream for context ∥ sep ∥ candidate.
    std::uint64_t size_with(std::string_view candidate) const;

    /// Ratio for a candidate; original_bytes = context + sep + candidate.
    RatioScore ratio_with(std::string_view candidate) const;

    /// Context bytes actually primed (after the cap was applied).
    std::uint64_t context_bytes() const { return context_len_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::uint64_t context_len_ = 0;
};

} // namespace zipsel
