#include "zipsel/compressor.hpp"

#include "zipsel/errors.hpp"

#include <zlib.h>

#include <array>
#include <cstring>
#include <limits>

namespace zipsel {

namespace {

// Raw deflate: no zlib/gzip wrapper, so sizes carry no container variance.
constexpr int kWindowBits = -15;
constexpr int kMemLevel = 8;

[[noreturn]] void zlib_fail(const char* where, int rc) {
    throw InvariantError(std::string("zlib ") + where + " failed, rc=" + std::to_string(rc));
}

class DeflateStream {
public:
    DeflateStream(int level) {
        std::memset(&strm_, 0, sizeof(strm_));
        int rc = deflateInit2(&strm_, level, Z_DEFLATED, kWindowBits, kMemLevel, Z_DEFAULT_STRATEGY);
        if (rc != Z_OK) zlib_fail("deflateInit2", rc);
    }

    explicit DeflateStream(const DeflateStream& other) {
        std::memset(&strm_, 0, sizeof(strm_));
        int rc = deflateCopy(&strm_, const_cast<z_stream*>(&other.strm_));
        if (rc != Z_OK) zlib_fail("deflateCopy", rc);
    }

    ~DeflateStream() { deflateEnd(&strm_); }

    DeflateStream& operator=(const DeflateStream&) = delete;

    // Feeds data without flushing; emitted bytes are discarded but counted
    // by total_out.
    void feed(std::string_view data) {
        if (data.empty()) return;
        strm_.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
        strm_.avail_in = static_cast<uInt>(data.size());
        std::array<unsigned char, 1 << 16> sink;
        while (strm_.avail_in > 0) {
            strm_.next_out = sink.data();
            strm_.avail_out = static_cast<uInt>(sink.size());
            int rc = deflate(&strm_, Z_NO_FLUSH);
            if (rc != Z_OK) zlib_fail("deflate", rc);
        }
    }

    // Finishes the stream, returning the total stream size in bytes.
    std::uint64_t finish() {
        std::array<unsigned char, 1 << 16> sink;
        int rc;
        do {
            strm_.next_out = sink.data();
            strm_.avail_out = static_cast<uInt>(sink.size());
            rc = deflate(&strm_, Z_FINISH);
            if (rc != Z_OK && rc != Z_STREAM_END) zlib_fail("deflate(finish)", rc);
        } while (rc != Z_STREAM_END);
        return strm_.total_out;
    }

    std::uint64_t finish_into(std::vector<unsigned char>& out) {
        std::array<unsigned char, 1 << 16> sink;
        int rc;
        do {
            strm_.next_out = sink.data();
            strm_.avail_out = static_cast<uInt>(sink.size());
            rc = deflate(&strm_, Z_FINISH);
            if (rc != Z_OK && rc != Z_STREAM_END) zlib_fail("deflate(finish)", rc);
            out.insert(out.end(), sink.data(), sink.data() + (sink.size() - strm_.avail_out));
        } while (rc != Z_STREAM_END);
        return strm_.total_out;
    }

private:
    z_stream strm_;
};

std::string_view capped_context(std::string_view buffer, const CodecConfig& config) {
    if (config.context_cap_bytes && buffer.size() > *config.context_cap_bytes) {
        return buffer.substr(buffer.size() - *config.context_cap_bytes);
    }
    return buffer;
}

} // namespace

void CodecConfig::validate() const {
    if (codec != Codec::deflate) {
        throw ValidationError("unsupported codec");
    }
    if (level < 0 || level > 9) {
        throw ValidationError("deflate level must be in [0, 9], got " + std::to_string(level));
    }
    if (context_cap_bytes && *context_cap_bytes == 0) {
        throw ValidationError("context cap must be a positive byte count");
    }
}

RatioScore RatioScore::from_sizes(std::uint64_t original, std::uint64_t compressed) {
    RatioScore s;
    s.original_bytes = original;
    s.compressed_bytes = compressed;
    s.ratio = static_cast<double>(original) / static_cast<double>(compressed);
    return s;
}

std::uint64_t compressed_size(std::string_view data, const CodecConfig& config) {
    config.validate();
    if (data.empty()) throw ValidationError("empty input");
    DeflateStream strm(config.level);
    strm.feed(data);
    return strm.finish();
}

std::vector<unsigned char> compress_bytes(std::string_view data, const CodecConfig& config) {
    config.validate();
    if (data.empty()) throw ValidationError("empty input");
    DeflateStream strm(config.level);
    strm.feed(data);
    std::vector<unsigned char> out;
    strm.finish_into(out);
    return out;
}

std::string decompress_bytes(const std::vector<unsigned char>& stream, const CodecConfig& config) {
    config.validate();
    z_stream strm;
    std::memset(&strm, 0, sizeof(strm));
    int rc = inflateInit2(&strm, kWindowBits);
    if (rc != Z_OK) zlib_fail("inflateInit2", rc);

    std::string out;
    strm.next_in = const_cast<Bytef*>(stream.data());
    strm.avail_in = static_cast<uInt>(stream.size());
    std::array<unsigned char, 1 << 16> sink;
    do {
        strm.next_out = sink.data();
        strm.avail_out = static_cast<uInt>(sink.size());
        rc = inflate(&strm, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&strm);
            throw ValidationError("corrupt deflate stream, rc=" + std::to_string(rc));
        }
        out.append(reinterpret_cast<char*>(sink.data()), sink.size() - strm.avail_out);
    } while (rc != Z_STREAM_END);
    inflateEnd(&strm);
    return out;
}

RatioScore ratio_of(std::string_view data, const CodecConfig& config) {
    return RatioScore::from_sizes(data.size(), compressed_size(data, config));
}

RatioScore joint_ratio(std::string_view buffer, std::string_view candidate, const CodecConfig& config) {
    DeflateContext ctx(buffer, config);
    return ctx.ratio_with(candidate);
}

struct DeflateContext::Impl {
    Impl(int level) : stream(level) {}
    DeflateStream stream;
};

DeflateContext::DeflateContext(std::string_view context, const CodecConfig& config) {
    config.validate();
    std::string_view used = capped_context(context, config);
    context_len_ = used.size();
    impl_ = std::make_unique<Impl>(config.level);
    impl_->stream.feed(used);
}

DeflateContext::~DeflateContext() = default;

std::uint64_t DeflateContext::size_with(std::string_view candidate) const {
    if (candidate.empty()) throw ValidationError("empty candidate");
    DeflateStream fork(impl_->stream);
    if (context_len_ > 0) fork.feed(std::string_view(&kSampleSeparator, 1));
    fork.feed(candidate);
    return fork.finish();
}

RatioScore DeflateContext::ratio_with(std::string_view candidate) const {
    std::uint64_t original = context_len_ + (context_len_ > 0 ? 1 : 0) + candidate.size();
    return RatioScore::from_sizes(original, size_with(candidate));
}

} // namespace zipsel
