#pragma once

#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"

namespace dentgan {

/// Serialized training state: named float tensors plus counters and the
/// resolved config text the run was started with.
struct Checkpoint {
    std::uint64_t step = 0;
    std::uint64_t epoch = 0;
    std::uint64_t seed = 0;
    std::uint64_t adam_steps_g = 0;
    std::uint64_t adam_steps_d = 0;
    std::string config;
    std::map<std::string, std::vector<float>> tensors;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::array<char, 8> kCheckpointMagic = {'D', 'G', 'C', 'K', 'P', 'T', '\0', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace ckpt_detail {

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    void f32(float f) {
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        u32(u);
    }
    std::vector<unsigned char>& buffer() { return buf_; }

private:
    std::vector<unsigned char> buf_;
};

class Reader {
public:
    Reader(const unsigned char* p, std::size_t n) : p_(p), n_(n) {}
    void need(std::size_t k) const {
        if (k > n_ - pos_) throw CorruptChecksum("checkpoint payload ends early");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(p_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(p_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::string str() {
        const auto len = u64();
        need(len);
        std::string s(reinterpret_cast<const char*>(p_ + pos_), len);
        pos_ += len;
        return s;
    }
    float f32() {
        const std::uint32_t u = u32();
        float f;
        std::memcpy(&f, &u, 4);
        return f;
    }
    void skip(std::size_t k) {
        need(k);
        pos_ += k;
    }
    bool done() const { return pos_ == n_; }

private:
    const unsigned char* p_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

inline std::uint32_t crc(const unsigned char* p, std::size_t n) {
    return static_cast<std::uint32_t>(::crc32(::crc32(0L, Z_NULL, 0), p, static_cast<uInt>(n)));
}

}  // namespace ckpt_detail

/// Layout: magic[8] | u32 version | payload | u32 crc32(everything before).
/// All integers little-endian; floats as IEEE-754 bit patterns.
inline std::vector<unsigned char> encode_checkpoint(const Checkpoint& c) {
    ckpt_detail::Writer w;
    w.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
    w.u32(kCheckpointVersion);
    w.u64(c.step);
    w.u64(c.epoch);
    w.u64(c.seed);
    w.u64(c.adam_steps_g);
    w.u64(c.adam_steps_d);
    w.str(c.config);
    w.u64(c.tensors.size());
    for (const auto& [name, values] : c.tensors) {
        w.str(name);
        w.u64(values.size());
        for (float f : values) w.f32(f);
    }
    auto& buf = w.buffer();
    const auto sum = ckpt_detail::crc(buf.data(), buf.size());
    w.u32(sum);
    return std::move(buf);
}

inline Checkpoint decode_checkpoint(const std::vector<unsigned char>& buf) {
    constexpr std::size_t header = kCheckpointMagic.size() + 4;
    if (buf.size() < header + 4) throw CorruptChecksum("checkpoint too short (" + std::to_string(buf.size()) + " bytes)");
    const std::size_t body = buf.size() - 4;
    ckpt_detail::Reader tail(buf.data() + body, 4);
    if (tail.u32() != ckpt_detail::crc(buf.data(), body)) throw CorruptChecksum("checksum mismatch");
    if (std::memcmp(buf.data(), kCheckpointMagic.data(), kCheckpointMagic.size()) != 0) {
        throw VersionMismatch("not a checkpoint file");
    }
    ckpt_detail::Reader r(buf.data() + kCheckpointMagic.size(), body - kCheckpointMagic.size());
    const auto version = r.u32();
    if (version != kCheckpointVersion) {
        throw VersionMismatch("checkpoint version " + std::to_string(version) + ", expected " +
                              std::to_string(kCheckpointVersion));
    }
    Checkpoint c;
    c.step = r.u64();
    c.epoch = r.u64();
    c.seed = r.u64();
    c.adam_steps_g = r.u64();
    c.adam_steps_d = r.u64();
    c.config = r.str();
    const auto count = r.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        auto name = r.str();
        const auto n = r.u64();
        r.need(n * 4);
        std::vector<float> v(n);
        for (auto& f : v) f = r.f32();
        c.tensors.emplace(std::move(name), std::move(v));
    }
    if (!r.done()) throw CorruptChecksum("trailing bytes in checkpoint");
    return c;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    const auto bytes = encode_checkpoint(c);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace dentgan
