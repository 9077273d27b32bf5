// sonify.hpp
// Basis-protocol control streams and the mapping catalog that turns them into
// audio.
//
// Time base: iteration i sits at t = i / iteration_rate; control values are
// linearly interpolated between iterations and the last one is held, so a
// T-iteration stream lasts T / iteration_rate seconds.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vqh/vqe.hpp"
#include "vqh/wav.hpp"

namespace vqh::sonify {

using audio::AudioBuffer;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct ControlStreams {
    std::size_t n = 0;
    std::vector<std::vector<double>> c;  // [T][n] marginal coefficients
    std::vector<double> e;               // [T] energies
    std::vector<std::string> states;     // [T] most probable bitstrings
    double c_min = 0.0, c_max = 0.0, e_min = 0.0, e_max = 0.0;

    [[nodiscard]] std::size_t length() const noexcept { return c.size(); }

    /// (v - lo) / (hi - lo), or 0.5 when the range is degenerate.
    [[nodiscard]] static double normalize(double v, double lo, double hi) noexcept {
        return hi > lo ? (v - lo) / (hi - lo) : 0.5;
    }
    [[nodiscard]] double norm_c(double v) const noexcept { return normalize(v, c_min, c_max); }
    [[nodiscard]] double norm_e(double v) const noexcept { return normalize(v, e_min, e_max); }
};

inline ControlStreams basis_protocol(std::span<const vqe::IterationRecord> records) {
    if (records.empty()) throw std::invalid_argument("no records to sonify");
    ControlStreams s;
    s.n = records.front().marginals.size();
    s.c_min = s.e_min = std::numeric_limits<double>::infinity();
    s.c_max = s.e_max = -std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        if (r.marginals.size() != s.n) throw std::invalid_argument("records disagree on qubit count");
        s.c.push_back(r.marginals);
        s.e.push_back(r.energy);
        s.states.push_back(r.argmax);
        for (double v : r.marginals) {
            s.c_min = std::min(s.c_min, v);
            s.c_max = std::max(s.c_max, v);
        }
        s.e_min = std::min(s.e_min, r.energy);
        s.e_max = std::max(s.e_max, r.energy);
    }
    return s;
}

inline ControlStreams basis_protocol(const vqe::ExperimentResult& ex) { return basis_protocol(ex.records); }

// ---------------------------------------------------------------------------
// Mapping configuration
// ---------------------------------------------------------------------------

enum class Mapping { additive, fm_linear, fm_log, fm_inharmonic, subtractive, rotary, arpeggio, pan };

struct MappingName {
    Mapping mapping;
    std::string_view flag;
};

inline constexpr std::array<MappingName, 8> kMappingNames{{{Mapping::additive, "additive"},
                                                            {Mapping::fm_linear, "fmlin"},
                                                            {Mapping::fm_log, "fmlog"},
                                                            {Mapping::fm_inharmonic, "inharm"},
                                                            {Mapping::subtractive, "sub"},
                                                            {Mapping::rotary, "rotary"},
                                                            {Mapping::arpeggio, "arp"},
                                                            {Mapping::pan, "pan"}}};

inline std::string to_string(Mapping m) {
    for (const auto& [mapping, flag] : kMappingNames)
        if (mapping == m) return std::string(flag);
    return "unknown";
}

inline Mapping mapping_from_string(std::string_view s) {
    for (const auto& [mapping, flag] : kMappingNames)
        if (flag == s) return mapping;
    throw std::invalid_argument("unknown mapping type: " + std::string(s));
}

inline constexpr double kDefaultBasePitch = 261.63;  // C4

/// Equal-tempered chromatic table starting at `base` Hz.
inline std::vector<double> tet_frequencies(std::size_t n, double base = kDefaultBasePitch) {
    std::vector<double> f(n);
    for (std::size_t k = 0; k < n; ++k) f[k] = base * std::pow(2.0, static_cast<double>(k) / 12.0);
    return f;
}

struct MappingConfig {
    Mapping mapping = Mapping::additive;
    std::vector<double> freqs;  // empty: 12-TET table sized to the stream
    double f_min = 110.0;
    double f_max = 1760.0;
    double f0 = 110.0;
    double iteration_rate = 10.0;
    int sample_rate = 44100;
    int channels = 2;
    double q_min = 1.0;
    double q_max = 200.0;
    std::uint64_t noise_seed = 0;
    double arp_decay = 0.15;     // seconds to fall 60 dB
    double arp_base_gap = -1.0;  // seconds; negative: one iteration period spread over n notes
    bool pan_diffusion = false;  // pan band-passed noise bands instead of sine voices

    void validate() const {
        if (!(f_min > 0.0) || !(f_min < f_max)) throw std::invalid_argument("need 0 < f_min < f_max");
        if (!(f0 > 0.0)) throw std::invalid_argument("f0 must be positive");
        if (!(iteration_rate > 0.0)) throw std::invalid_argument("iteration_rate must be positive");
        if (sample_rate <= 0) throw std::invalid_argument("sample_rate must be positive");
        if (channels < 1) throw std::invalid_argument("channels must be at least 1");
        if (!(q_min > 0.0) || !(q_min <= q_max)) throw std::invalid_argument("need 0 < q_min <= q_max");
        if (!(arp_decay > 0.0)) throw std::invalid_argument("arp_decay must be positive");
        for (double f : freqs)
            if (!(f > 0.0)) throw std::invalid_argument("note frequencies must be positive");
    }

    [[nodiscard]] std::vector<double> note_table(std::size_t n) const {
        if (freqs.empty()) return tet_frequencies(n);
        if (freqs.size() != n) {
            throw std::invalid_argument("note table has " + std::to_string(freqs.size()) +
                                        " entries for " + std::to_string(n) + " streams");
        }
        return freqs;
    }
};

// ---------------------------------------------------------------------------
// Closed-form control mappings
// ---------------------------------------------------------------------------

/// Linear frequency mapping of a coefficient.
inline double freq_linear(double c, double c_min, double c_max, double f_min, double f_max) {
    return (f_max - f_min) * ControlStreams::normalize(c, c_min, c_max) + f_min;
}

/// Logarithmic (exponential in c) frequency mapping of a coefficient.
inline double freq_log(double c, double c_min, double c_max, double f_min, double f_max) {
    return f_min * std::pow(f_max / f_min, ControlStreams::normalize(c, c_min, c_max));
}

/// Frequency of partial k (1-indexed) shifted down by up to one f0.
inline double inharmonic_frequency(std::size_t k, double c, double c_min, double c_max, double f0) {
    return (static_cast<double>(k) - ControlStreams::normalize(c, c_min, c_max)) * f0;
}

inline constexpr double kMinPartialHz = 1.0;

/// Azimuth in radians; c_min faces channel 0 and the midpoint faces opposite.
inline double azimuth(double c, double c_min, double c_max) {
    return kTwoPi * ControlStreams::normalize(c, c_min, c_max);
}

/// Constant-power gains for a source at `phi` over `channels` speakers equally
/// spaced on a ring, channel m at angle 2πm/channels.
inline std::vector<double> pan_gains(double phi, int channels) {
    if (channels < 1) throw std::invalid_argument("channels must be at least 1");
    std::vector<double> g(static_cast<std::size_t>(channels), 0.0);
    if (channels == 1) {
        g[0] = 1.0;
        return g;
    }
    double wrapped = std::fmod(phi, kTwoPi);
    if (wrapped < 0.0) wrapped += kTwoPi;
    const double pos = wrapped / (kTwoPi / channels);
    double base = std::floor(pos);
    double frac = pos - base;
    auto m0 = static_cast<int>(base) % channels;
    if (frac >= 1.0) {
        frac = 0.0;
        m0 = (m0 + 1) % channels;
    }
    const int m1 = (m0 + 1) % channels;
    g[static_cast<std::size_t>(m0)] = std::cos(frac * std::numbers::pi / 2.0);
    g[static_cast<std::size_t>(m1)] += std::sin(frac * std::numbers::pi / 2.0);
    return g;
}

/// Q for normalized energy: q_max at the lowest energy, q_min at the highest,
/// geometric in between.
inline double energy_to_q(double e_norm, double q_min, double q_max) {
    return q_max * std::pow(q_min / q_max, e_norm);
}

/// Rotary center-frequency factor, 2^-1 at the lowest energy to 2^+1 at the
/// highest.
inline double rotary_factor(double e_norm) { return std::pow(2.0, 2.0 * e_norm - 1.0); }

// ---------------------------------------------------------------------------
// Rendering helpers
// ---------------------------------------------------------------------------

/// Interpolated read of per-iteration data at sample index s.
class Timeline {
public:
    Timeline(std::size_t iterations, double rate, int sample_rate)
        : iterations_(iterations), rate_(rate), sample_rate_(sample_rate) {}

    [[nodiscard]] std::size_t frames() const {
        return static_cast<std::size_t>(
            std::llround(static_cast<double>(iterations_) * sample_rate_ / rate_));
    }

    struct Position {
        std::size_t i;
        std::size_t j;
        double frac;
    };

    [[nodiscard]] Position at(std::size_t sample) const {
        const double u = static_cast<double>(sample) * rate_ / sample_rate_;
        auto i = static_cast<std::size_t>(u);
        if (i + 1 >= iterations_) return {iterations_ - 1, iterations_ - 1, 0.0};
        return {i, i + 1, u - static_cast<double>(i)};
    }

private:
    std::size_t iterations_;
    double rate_;
    int sample_rate_;
};

inline double lerp(double a, double b, double t) { return a + t * (b - a); }

/// Scales to a -1 dBFS peak; buffers with peak below 1e-9 are left untouched.
inline void master_normalize(std::vector<double>& raw) {
    double peak = 0.0;
    for (double v : raw) peak = std::max(peak, std::abs(v));
    if (peak < 1e-9) return;
    const double scale = std::pow(10.0, -1.0 / 20.0) / peak;
    for (double& v : raw) v *= scale;
}

/// Mono raw samples to an AudioBuffer with the mono signal on every channel.
inline AudioBuffer to_buffer(const std::vector<double>& mono, int sample_rate, int channels) {
    AudioBuffer buf(sample_rate, channels, mono.size());
    for (std::size_t s = 0; s < mono.size(); ++s)
        for (int ch = 0; ch < channels; ++ch) buf.at(s, ch) = static_cast<float>(mono[s]);
    return buf;
}

/// RBJ band-pass biquad (constant 0 dB peak gain), direct form I.
class Bandpass {
public:
    void set(double fc, double q, int sample_rate) {
        const double nyquist_guard = 0.45 * sample_rate;
        fc = std::clamp(fc, 1.0, nyquist_guard);
        const double w0 = kTwoPi * fc / sample_rate;
        const double alpha = std::sin(w0) / (2.0 * q);
        const double a0 = 1.0 + alpha;
        b0_ = alpha / a0;
        b2_ = -alpha / a0;
        a1_ = -2.0 * std::cos(w0) / a0;
        a2_ = (1.0 - alpha) / a0;
    }

    double process(double x) {
        const double y = b0_ * x + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
        x2_ = x1_;
        x1_ = x;
        y2_ = y1_;
        y1_ = y;
        return y;
    }

private:
    double b0_ = 0.0, b2_ = 0.0, a1_ = 0.0, a2_ = 0.0;
    double x1_ = 0.0, x2_ = 0.0, y1_ = 0.0, y2_ = 0.0;
};

/// Filter coefficients are refreshed every this many samples.
inline constexpr std::size_t kControlBlock = 64;

inline std::vector<double> white_noise(std::size_t frames, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> w(frames);
    for (double& v : w) v = u(rng);
    return w;
}

// ---------------------------------------------------------------------------
// Additive synthesis, offline and streaming
// ---------------------------------------------------------------------------

inline double additive_sample(std::span<const double> freqs, std::span<const double> ci,
                              std::span<const double> cj, double frac, std::size_t s,
                              int sample_rate) {
    const double t = static_cast<double>(s) / sample_rate;
    double acc = 0.0;
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        const double amp = lerp(ci[k], cj[k], frac);
        if (amp != 0.0) acc += amp * std::sin(kTwoPi * freqs[k] * t);
    }
    return acc;
}

/// Unnormalized additive signal: Σ_k c_k(t) sin(2π f_k t).
inline std::vector<double> render_additive_raw(const ControlStreams& s, const MappingConfig& cfg) {
    const std::vector<double> freqs = cfg.note_table(s.n);
    const Timeline tl(s.length(), cfg.iteration_rate, cfg.sample_rate);
    std::vector<double> out(tl.frames());
    for (std::size_t smp = 0; smp < out.size(); ++smp) {
        const auto p = tl.at(smp);
        out[smp] = additive_sample(freqs, s.c[p.i], s.c[p.j], p.frac, smp, cfg.sample_rate);
    }
    return out;
}

/// Incremental additive renderer fed one marginal vector at a time. The raw
/// samples it emits are identical to render_additive_raw over the same rows.
class AdditiveStream {
public:
    AdditiveStream(std::vector<double> freqs, double iteration_rate, int sample_rate)
        : freqs_(std::move(freqs)), rate_(iteration_rate), sample_rate_(sample_rate) {}

    /// Appends one iteration and returns every sample that became final.
    std::vector<double> push(std::vector<double> marginals) {
        if (marginals.size() != freqs_.size()) throw std::invalid_argument("marginal size mismatch");
        rows_.push_back(std::move(marginals));
        std::vector<double> out;
        emit_until(std::numeric_limits<std::size_t>::max(), out, false);
        return out;
    }

    /// Emits the held tail so the total length matches the offline render.
    std::vector<double> finish() {
        std::vector<double> out;
        if (rows_.empty()) return out;
        const std::size_t total = static_cast<std::size_t>(
            std::llround(static_cast<double>(rows_.size()) * sample_rate_ / rate_));
        emit_until(total, out, true);
        return out;
    }

    [[nodiscard]] std::size_t samples_emitted() const noexcept { return next_; }

private:
    void emit_until(std::size_t end, std::vector<double>& out, bool final_rows) {
        const std::size_t known = rows_.size();
        for (; next_ < end; ++next_) {
            const double u = static_cast<double>(next_) * rate_ / sample_rate_;
            auto i = static_cast<std::size_t>(u);
            std::size_t j = i + 1;
            double frac = u - static_cast<double>(i);
            if (j >= known) {
                if (!final_rows) break;
                i = j = known - 1;
                frac = 0.0;
            }
            out.push_back(additive_sample(freqs_, rows_[i], rows_[j], frac, next_, sample_rate_));
        }
    }

    std::vector<double> freqs_;
    double rate_;
    int sample_rate_;
    std::vector<std::vector<double>> rows_;
    std::size_t next_ = 0;
};

// ---------------------------------------------------------------------------
// Frequency-modulated voices
// ---------------------------------------------------------------------------

enum class FmCurve { linear, log };

inline std::vector<double> render_fm_raw(const ControlStreams& s, const MappingConfig& cfg, FmCurve curve) {
    const Timeline tl(s.length(), cfg.iteration_rate, cfg.sample_rate);
    std::vector<double> out(tl.frames());
    std::vector<double> phase(s.n, 0.0);
    for (std::size_t smp = 0; smp < out.size(); ++smp) {
        const auto p = tl.at(smp);
        double acc = 0.0;
        for (std::size_t k = 0; k < s.n; ++k) {
            const double c = lerp(s.c[p.i][k], s.c[p.j][k], p.frac);
            const double f = curve == FmCurve::linear ? freq_linear(c, s.c_min, s.c_max, cfg.f_min, cfg.f_max)
                                                      : freq_log(c, s.c_min, s.c_max, cfg.f_min, cfg.f_max);
            acc += std::sin(phase[k]);
            phase[k] = std::fmod(phase[k] + kTwoPi * f / cfg.sample_rate, kTwoPi);
        }
        out[smp] = acc;
    }
    return out;
}

/// Partials k = 1..n at (k - ĉ_k) f0 with amplitude 1/k, clamped to >= 1 Hz.
inline std::vector<double> render_inharmonic_raw(const ControlStreams& s, const MappingConfig& cfg) {
    const Timeline tl(s.length(), cfg.iteration_rate, cfg.sample_rate);
    std::vector<double> out(tl.frames());
    std::vector<double> phase(s.n, 0.0);
    for (std::size_t smp = 0; smp < out.size(); ++smp) {
        const auto p = tl.at(smp);
        double acc = 0.0;
        for (std::size_t k = 0; k < s.n; ++k) {
            const double c = lerp(s.c[p.i][k], s.c[p.j][k], p.frac);
            const double f = std::max(kMinPartialHz, inharmonic_frequency(k + 1, c, s.c_min, s.c_max, cfg.f0));
            acc += std::sin(phase[k]) / static_cast<double>(k + 1);
            phase[k] = std::fmod(phase[k] + kTwoPi * f / cfg.sample_rate, kTwoPi);
        }
        out[smp] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Subtractive (resonant filter bank over noise)
// ---------------------------------------------------------------------------

inline std::vector<double> render_subtractive_raw(const ControlStreams& s, const MappingConfig& cfg, bool rotary) {
    const std::vector<double> centers = cfg.note_table(s.n);
    const Timeline tl(s.length(), cfg.iteration_rate, cfg.sample_rate);
    const std::vector<double> noise = white_noise(tl.frames(), cfg.noise_seed);
    std::vector<Bandpass> filters(s.n);
    const double fixed_q = std::sqrt(cfg.q_min * cfg.q_max);
    std::vector<double> out(tl.frames());
    for (std::size_t smp = 0; smp < out.size(); ++smp) {
        const auto p = tl.at(smp);
        if (smp % kControlBlock == 0) {
            const double e_norm = s.norm_e(lerp(s.e[p.i], s.e[p.j], p.frac));
            const double q = rotary ? fixed_q : energy_to_q(e_norm, cfg.q_min, cfg.q_max);
            const double factor = rotary ? rotary_factor(e_norm) : 1.0;
            for (std::size_t k = 0; k < s.n; ++k) filters[k].set(centers[k] * factor, q, cfg.sample_rate);
        }
        double acc = 0.0;
        for (std::size_t k = 0; k < s.n; ++k) {
            const double gain = lerp(s.c[p.i][k], s.c[p.j][k], p.frac);
            const double y = filters[k].process(noise[smp]);
            acc += gain * y;
        }
        out[smp] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Arpeggio
// ---------------------------------------------------------------------------

struct ArpNote {
    std::size_t iteration;
    std::size_t note;
    double onset;  // seconds
    double amplitude;
};

inline double arp_base_gap(const MappingConfig& cfg, std::size_t n) {
    if (cfg.arp_base_gap >= 0.0) return cfg.arp_base_gap;
    return 1.0 / (cfg.iteration_rate * static_cast<double>(std::max<std::size_t>(n, 1)));
}

/// Onsets for every iteration: notes ascending by amplitude (ties by note
/// index), spaced by base_gap times the normalized energy.
inline std::vector<ArpNote> arpeggio_onsets(const ControlStreams& s, const MappingConfig& cfg) {
    std::vector<ArpNote> notes;
    const double gap = arp_base_gap(cfg, s.n);
    std::vector<std::size_t> order(s.n);
    for (std::size_t i = 0; i < s.length(); ++i) {
        for (std::size_t k = 0; k < s.n; ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return s.c[i][a] < s.c[i][b]; });
        const double start = static_cast<double>(i) / cfg.iteration_rate;
        const double step = gap * s.norm_e(s.e[i]);
        for (std::size_t r = 0; r < s.n; ++r) {
            notes.push_back({i, order[r], start + static_cast<double>(r) * step, s.c[i][order[r]]});
        }
    }
    return notes;
}

inline std::vector<double> render_arpeggio_raw(const ControlStreams& s, const MappingConfig& cfg) {
    const std::vector<double> freqs = cfg.note_table(s.n);
    const double tau = cfg.arp_decay / std::log(1000.0);
    const double tail = 2.0 * cfg.arp_decay;  // amplitude is down 120 dB here
    const auto tail_frames = static_cast<std::size_t>(std::ceil(tail * cfg.sample_rate));
    const Timeline tl(s.length(), cfg.iteration_rate, cfg.sample_rate);
    const auto onsets = arpeggio_onsets(s, cfg);
    std::size_t frames = tl.frames();
    for (const auto& n : onsets) {
        if (n.amplitude == 0.0) continue;
        const auto start = static_cast<std::size_t>(std::llround(n.onset * cfg.sample_rate));
        frames = std::max(frames, start + tail_frames);
    }
    std::vector<double> out(frames, 0.0);
    for (const auto& n : onsets) {
        if (n.amplitude == 0.0) continue;
        const auto start = static_cast<std::size_t>(std::llround(n.onset * cfg.sample_rate));
        for (std::size_t d = 0; d < tail_frames && start + d < frames; ++d) {
            const double t = static_cast<double>(d) / cfg.sample_rate;
            out[start + d] += n.amplitude * std::exp(-t / tau) * std::sin(kTwoPi * freqs[n.note] * t);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spatialization
// ---------------------------------------------------------------------------

/// Channel-interleaved raw output; each stream k is a sine voice at freqs[k]
/// (or, with pan_diffusion, noise band-passed at freqs[k]) placed at φ_k(t).
inline std::vector<double> render_pan_raw(const ControlStreams& s, const MappingConfig& cfg,
                                          const std::vector<double>* source = nullptr) {
    const std::vector<double> freqs = cfg.note_table(s.n);
    const Timeline tl(s.length(), cfg.iteration_rate, cfg.sample_rate);
    const std::size_t frames = tl.frames();
    const auto ch = static_cast<std::size_t>(cfg.channels);
    std::vector<double> out(frames * ch, 0.0);
    std::vector<double> noise;
    if (cfg.pan_diffusion && source == nullptr) noise = white_noise(frames, cfg.noise_seed);
    const std::vector<double>& src = source != nullptr ? *source : noise;
    if (cfg.pan_diffusion && src.size() < frames) throw std::invalid_argument("diffusion source too short");
    std::vector<Bandpass> bands(s.n);
    const double q = std::sqrt(cfg.q_min * cfg.q_max);
    for (std::size_t k = 0; k < s.n; ++k) bands[k].set(freqs[k], q, cfg.sample_rate);
    for (std::size_t smp = 0; smp < frames; ++smp) {
        const auto p = tl.at(smp);
        const double t = static_cast<double>(smp) / cfg.sample_rate;
        for (std::size_t k = 0; k < s.n; ++k) {
            const double c = lerp(s.c[p.i][k], s.c[p.j][k], p.frac);
            const double voice = cfg.pan_diffusion ? bands[k].process(src[smp]) : std::sin(kTwoPi * freqs[k] * t);
            const std::vector<double> g = pan_gains(azimuth(c, s.c_min, s.c_max), cfg.channels);
            for (std::size_t m = 0; m < ch; ++m) out[smp * ch + m] += g[m] * voice;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Renders the configured mapping and normalizes to -1 dBFS.
inline AudioBuffer render(const ControlStreams& s, const MappingConfig& cfg) {
    cfg.validate();
    if (s.length() == 0) throw std::invalid_argument("empty control streams");
    std::vector<double> raw;
    switch (cfg.mapping) {
        case Mapping::additive: raw = render_additive_raw(s, cfg); break;
        case Mapping::fm_linear: raw = render_fm_raw(s, cfg, FmCurve::linear); break;
        case Mapping::fm_log: raw = render_fm_raw(s, cfg, FmCurve::log); break;
        case Mapping::fm_inharmonic: raw = render_inharmonic_raw(s, cfg); break;
        case Mapping::subtractive: raw = render_subtractive_raw(s, cfg, false); break;
        case Mapping::rotary: raw = render_subtractive_raw(s, cfg, true); break;
        case Mapping::arpeggio: raw = render_arpeggio_raw(s, cfg); break;
        case Mapping::pan: {
            if (cfg.channels < 2) throw std::invalid_argument("pan needs at least 2 channels");
            raw = render_pan_raw(s, cfg);
            master_normalize(raw);
            AudioBuffer buf(cfg.sample_rate, cfg.channels, raw.size() / static_cast<std::size_t>(cfg.channels));
            for (std::size_t i = 0; i < raw.size(); ++i) buf.samples[i] = static_cast<float>(raw[i]);
            return buf;
        }
    }
    master_normalize(raw);
    return to_buffer(raw, cfg.sample_rate, cfg.channels);
}

}  // namespace vqh::sonify
