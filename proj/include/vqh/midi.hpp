// midi.hpp
// Three-message MIDI clock codec and control-change to QUBO coefficient
// mapping.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "vqh/qubo.hpp"

namespace vqh::midi {

struct ControlChange {
    std::uint8_t controller = 0;
    std::uint8_t value = 0;

    bool operator==(const ControlChange&) const = default;
};

/// Controllers carrying the high, middle and low 7-bit fields of a step.
struct ClockControllers {
    std::uint8_t high = 20;
    std::uint8_t mid = 21;
    std::uint8_t low = 22;
};

inline constexpr std::uint32_t kClockLimit = 1U << 21;

inline std::array<ControlChange, 3> clock_encode(std::uint32_t step, const ClockControllers& cc = {}) {
    if (step >= kClockLimit) throw std::out_of_range("clock step " + std::to_string(step) + " exceeds 21 bits");
    return {{{cc.high, static_cast<std::uint8_t>((step >> 14) & 0x7f)},
             {cc.mid, static_cast<std::uint8_t>((step >> 7) & 0x7f)},
             {cc.low, static_cast<std::uint8_t>(step & 0x7f)}}};
}

inline std::uint32_t clock_decode(std::span<const ControlChange> msgs, const ClockControllers& cc = {}) {
    if (msgs.size() != 3) throw std::invalid_argument("clock code needs exactly 3 messages");
    const std::array<std::uint8_t, 3> expected{cc.high, cc.mid, cc.low};
    std::uint32_t step = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        if (msgs[i].controller != expected[i]) {
            throw std::invalid_argument("clock message " + std::to_string(i) + " on controller " +
                                        std::to_string(msgs[i].controller) + ", expected " +
                                        std::to_string(expected[i]));
        }
        if (msgs[i].value > 127) throw std::invalid_argument("MIDI value above 127");
        step = (step << 7) | msgs[i].value;
    }
    return step;
}

/// Affine map of a 0..127 controller value onto [lo, hi].
inline double cc_to_coefficient(int value, double lo, double hi) {
    if (value < 0 || value > 127) throw std::out_of_range("MIDI value " + std::to_string(value) + " outside 0..127");
    if (!(lo < hi)) throw std::invalid_argument("cc range needs lo < hi");
    return lo + static_cast<double>(value) / 127.0 * (hi - lo);
}

/// Sets cell (i, j) of a QUBO from a controller value: the linear term when
/// i == j, otherwise the coupling on both sides of the diagonal.
inline void apply_cc(qubo::QuboProblem& q, std::size_t i, std::size_t j, int value, double lo, double hi) {
    const double v = cc_to_coefficient(value, lo, hi);
    if (i >= q.size() || j >= q.size()) throw std::out_of_range("QUBO cell outside the matrix");
    if (i == j) {
        q.a[i] = v;
    } else {
        q.set_coupling(i, j, v);
    }
}

}  // namespace vqh::midi
