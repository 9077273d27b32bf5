// wav.hpp
// Audio buffers and IEEE-float WAV files.
//
// Header layout written by write_wav (58 bytes, all little-endian):
//   0  "RIFF"  u32 file size - 8  "WAVE"
//   12 "fmt "  u32 18  u16 3 (IEEE float)  u16 channels  u32 sample rate
//              u32 byte rate  u16 block align  u16 32  u16 0 (cbSize)
//   38 "fact"  u32 4  u32 frames
//   50 "data"  u32 data bytes
//   58 interleaved float32 samples

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vqh::audio {

struct AudioBuffer {
    int sample_rate = 44100;
    int channels = 1;
    std::vector<float> samples;  // interleaved, frames * channels

    AudioBuffer() = default;
    AudioBuffer(int rate, int ch, std::size_t frames)
        : sample_rate(rate), channels(ch), samples(frames * static_cast<std::size_t>(ch), 0.0f) {
        if (rate <= 0) throw std::invalid_argument("sample rate must be positive");
        if (ch < 1) throw std::invalid_argument("channel count must be at least 1");
    }

    [[nodiscard]] std::size_t frames() const noexcept {
        return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0;
    }
    float& at(std::size_t frame, int ch) { return samples[frame * static_cast<std::size_t>(channels) + static_cast<std::size_t>(ch)]; }
    [[nodiscard]] float at(std::size_t frame, int ch) const {
        return samples[frame * static_cast<std::size_t>(channels) + static_cast<std::size_t>(ch)];
    }
    [[nodiscard]] double duration() const noexcept {
        return static_cast<double>(frames()) / static_cast<double>(sample_rate);
    }
    [[nodiscard]] float peak() const noexcept {
        float p = 0.0f;
        for (float s : samples) p = std::max(p, std::abs(s));
        return p;
    }
    bool operator==(const AudioBuffer&) const = default;
};

inline constexpr std::size_t kWavHeaderBytes = 58;

static_assert(std::endian::native == std::endian::little, "WAV writer assumes a little-endian host");

namespace detail {

inline void put_u16(std::vector<char>& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

inline void put_u32(std::vector<char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_tag(std::vector<char>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

inline std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

}  // namespace detail

inline std::vector<char> encode_wav(const AudioBuffer& buf) {
    const std::uint64_t data_bytes = buf.samples.size() * 4ULL;
    if (data_bytes + kWavHeaderBytes - 8 > 0xffffffffULL) throw std::length_error("buffer too large for WAV");
    const auto ch = static_cast<std::uint16_t>(buf.channels);
    std::vector<char> out;
    out.reserve(kWavHeaderBytes + data_bytes);
    detail::put_tag(out, "RIFF");
    detail::put_u32(out, static_cast<std::uint32_t>(kWavHeaderBytes - 8 + data_bytes));
    detail::put_tag(out, "WAVE");
    detail::put_tag(out, "fmt ");
    detail::put_u32(out, 18);
    detail::put_u16(out, 3);
    detail::put_u16(out, ch);
    detail::put_u32(out, static_cast<std::uint32_t>(buf.sample_rate));
    detail::put_u32(out, static_cast<std::uint32_t>(buf.sample_rate) * ch * 4U);
    detail::put_u16(out, static_cast<std::uint16_t>(ch * 4U));
    detail::put_u16(out, 32);
    detail::put_u16(out, 0);
    detail::put_tag(out, "fact");
    detail::put_u32(out, 4);
    detail::put_u32(out, static_cast<std::uint32_t>(buf.frames()));
    detail::put_tag(out, "data");
    detail::put_u32(out, static_cast<std::uint32_t>(data_bytes));
    const auto* raw = reinterpret_cast<const char*>(buf.samples.data());
    out.insert(out.end(), raw, raw + data_bytes);
    return out;
}

inline void write_wav(const AudioBuffer& buf, const std::string& path) {
    const std::vector<char> bytes = encode_wav(buf);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("failed writing " + path);
}

/// Accepts any chunk order; requires IEEE float, 32 bits per sample.
inline AudioBuffer decode_wav(std::span<const unsigned char> bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw std::runtime_error("not a RIFF/WAVE file");
    }
    AudioBuffer buf;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::uint32_t size = detail::get_u32(chunk + 4);
        if (pos + 8 + size > bytes.size()) throw std::runtime_error("truncated WAV chunk");
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16) throw std::runtime_error("short fmt chunk");
            if (detail::get_u16(chunk + 8) != 3) throw std::runtime_error("WAV is not IEEE float");
            buf.channels = detail::get_u16(chunk + 10);
            buf.sample_rate = static_cast<int>(detail::get_u32(chunk + 12));
            if (detail::get_u16(chunk + 22) != 32) throw std::runtime_error("WAV is not 32-bit float");
            if (buf.channels < 1) throw std::runtime_error("WAV has no channels");
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            if (!have_fmt) throw std::runtime_error("data chunk before fmt chunk");
            buf.samples.resize(size / 4);
            std::memcpy(buf.samples.data(), chunk + 8, buf.samples.size() * 4);
            return buf;
        }
        pos += 8 + size + (size & 1U);
    }
    throw std::runtime_error("WAV has no data chunk");
}

inline AudioBuffer read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_wav(bytes);
}

}  // namespace vqh::audio
