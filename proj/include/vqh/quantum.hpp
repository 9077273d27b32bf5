// quantum.hpp
// Minimal n-qubit statevector simulator used by the VQE loop.
//
// Bit ordering is big-endian throughout: qubit 0 is the leftmost character of
// every bitstring and the most significant bit of a basis-state index.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vqh::quantum {

using complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 20;

/// Renders basis index `index` as an n-character bitstring, qubit 0 first.
inline std::string index_to_bitstring(std::uint64_t index, std::size_t n_qubits) {
    std::string bits(n_qubits, '0');
    for (std::size_t q = 0; q < n_qubits; ++q) {
        if ((index >> (n_qubits - 1 - q)) & 1u) bits[q] = '1';
    }
    return bits;
}

inline std::uint64_t bitstring_to_index(std::string_view bits) {
    if (bits.size() > 63) throw std::invalid_argument("bitstring too long");
    std::uint64_t index = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("bitstring contains characters other than 0/1: " +
                                        std::string(bits));
        }
        index = (index << 1) | static_cast<std::uint64_t>(c == '1');
    }
    return index;
}

class StateVector {
public:
    /// |0...0>
    explicit StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
        check_size(n_qubits);
        amplitudes_.assign(std::size_t{1} << n_qubits, complex{0.0, 0.0});
        amplitudes_[0] = 1.0;
    }

    /// Takes ownership of raw amplitudes; they are normalized on entry.
    StateVector(std::size_t n_qubits, std::vector<complex> amplitudes)
        : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
        check_size(n_qubits);
        if (amplitudes_.size() != (std::size_t{1} << n_qubits)) {
            throw std::invalid_argument("amplitude count must be 2^n_qubits");
        }
        double norm2 = 0.0;
        for (const auto& a : amplitudes_) norm2 += std::norm(a);
        if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
            throw std::invalid_argument("state vector has zero or non-finite norm");
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& a : amplitudes_) a *= inv;
    }

    static StateVector basis(std::string_view bits) {
        StateVector s(bits.size());
        s.amplitudes_[0] = 0.0;
        s.amplitudes_[bitstring_to_index(bits)] = 1.0;
        return s;
    }

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t dim() const noexcept { return amplitudes_.size(); }
    [[nodiscard]] std::span<const complex> amplitudes() const noexcept { return amplitudes_; }
    [[nodiscard]] const complex& operator[](std::size_t i) const { return amplitudes_[i]; }

    [[nodiscard]] double norm_squared() const noexcept {
        double s = 0.0;
        for (const auto& a : amplitudes_) s += std::norm(a);
        return s;
    }

    [[nodiscard]] std::vector<double> probabilities() const {
        std::vector<double> p(amplitudes_.size());
        std::transform(amplitudes_.begin(), amplitudes_.end(), p.begin(),
                       [](const complex& a) { return std::norm(a); });
        return p;
    }

    void apply_ry(std::size_t qubit, double theta) {
        const double c = std::cos(theta / 2.0);
        const double s = std::sin(theta / 2.0);
        for_each_pair(qubit, [c, s](complex& a0, complex& a1) {
            const complex t0 = a0;
            a0 = c * t0 - s * a1;
            a1 = s * t0 + c * a1;
        });
    }

    void apply_rz(std::size_t qubit, double theta) {
        const complex p0 = std::polar(1.0, -theta / 2.0);
        const complex p1 = std::polar(1.0, theta / 2.0);
        for_each_pair(qubit, [p0, p1](complex& a0, complex& a1) {
            a0 *= p0;
            a1 *= p1;
        });
    }

    void apply_x(std::size_t qubit) {
        for_each_pair(qubit, [](complex& a0, complex& a1) { std::swap(a0, a1); });
    }

    void apply_z(std::size_t qubit) {
        for_each_pair(qubit, [](complex&, complex& a1) { a1 = -a1; });
    }

    void apply_cx(std::size_t control, std::size_t target) {
        if (control == target) throw std::invalid_argument("CX control equals target");
        check_qubit(control);
        check_qubit(target);
        const std::uint64_t cmask = mask(control);
        const std::uint64_t tmask = mask(target);
        for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
            if ((i & cmask) && !(i & tmask)) std::swap(amplitudes_[i], amplitudes_[i | tmask]);
        }
    }

    [[nodiscard]] std::uint64_t mask(std::size_t qubit) const noexcept {
        return std::uint64_t{1} << (n_qubits_ - 1 - qubit);
    }

private:
    static void check_size(std::size_t n) {
        if (n == 0 || n > kMaxQubits) {
            throw std::invalid_argument("qubit count must be in [1, " +
                                        std::to_string(kMaxQubits) + "]");
        }
    }

    void check_qubit(std::size_t q) const {
        if (q >= n_qubits_) throw std::out_of_range("qubit index out of range");
    }

    template <typename F>
    void for_each_pair(std::size_t qubit, F&& f) {
        check_qubit(qubit);
        const std::uint64_t m = mask(qubit);
        for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
            if (!(i & m)) f(amplitudes_[i], amplitudes_[i | m]);
        }
    }

    std::size_t n_qubits_;
    std::vector<complex> amplitudes_;
};

// ---------------------------------------------------------------------------
// Ansatz
// ---------------------------------------------------------------------------

enum class Entanglement { linear, circular, full };

inline std::string to_string(Entanglement e) {
    switch (e) {
        case Entanglement::linear: return "linear";
        case Entanglement::circular: return "circular";
        case Entanglement::full: return "full";
    }
    return "linear";
}

inline Entanglement entanglement_from_string(std::string_view s) {
    if (s == "linear") return Entanglement::linear;
    if (s == "circular") return Entanglement::circular;
    if (s == "full") return Entanglement::full;
    throw std::invalid_argument("unknown entanglement: " + std::string(s));
}

/// Hardware-efficient ansatz: reps+1 rotation layers (RY then RZ on every
/// qubit) separated by CX entangling blocks.
///
/// Parameter layout is layer-major, then gate (all RY before all RZ), then
/// qubit: index = layer * 2n + gate * n + qubit. Chained runs reuse parameter
/// vectors, so this layout must not change.
struct AnsatzSpec {
    std::size_t n_qubits = 1;
    std::size_t reps = 1;
    Entanglement entanglement = Entanglement::linear;

    [[nodiscard]] std::size_t parameter_count() const noexcept {
        return 2 * n_qubits * (reps + 1);
    }

    [[nodiscard]] std::size_t ry_index(std::size_t layer, std::size_t qubit) const noexcept {
        return layer * 2 * n_qubits + qubit;
    }
    [[nodiscard]] std::size_t rz_index(std::size_t layer, std::size_t qubit) const noexcept {
        return layer * 2 * n_qubits + n_qubits + qubit;
    }

    /// Ordered (control, target) pairs applied between rotation layers.
    [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> entangler_pairs() const {
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        if (n_qubits < 2) return pairs;
        if (entanglement == Entanglement::full) {
            for (std::size_t i = 0; i < n_qubits; ++i)
                for (std::size_t j = i + 1; j < n_qubits; ++j) pairs.emplace_back(i, j);
            return pairs;
        }
        for (std::size_t i = 0; i + 1 < n_qubits; ++i) pairs.emplace_back(i, i + 1);
        if (entanglement == Entanglement::circular && n_qubits > 2) {
            pairs.emplace_back(n_qubits - 1, 0);
        }
        return pairs;
    }
};

inline StateVector evaluate_ansatz(const AnsatzSpec& spec, std::span<const double> params) {
    if (params.size() != spec.parameter_count()) {
        throw std::invalid_argument("ansatz expects " + std::to_string(spec.parameter_count()) +
                                    " parameters, got " + std::to_string(params.size()));
    }
    StateVector state(spec.n_qubits);
    const auto pairs = spec.entangler_pairs();
    for (std::size_t layer = 0; layer <= spec.reps; ++layer) {
        if (layer > 0) {
            for (const auto& [c, t] : pairs) state.apply_cx(c, t);
        }
        for (std::size_t q = 0; q < spec.n_qubits; ++q) {
            state.apply_ry(q, params[spec.ry_index(layer, q)]);
            state.apply_rz(q, params[spec.rz_index(layer, q)]);
        }
    }
    return state;
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// Weighted Pauli string over {I, Z, X}; axes[0] acts on qubit 0.
struct PauliTerm {
    double coefficient = 0.0;
    std::string axes;

    [[nodiscard]] bool is_diagonal() const noexcept {
        return axes.find('X') == std::string::npos;
    }
};

class Observable {
public:
    explicit Observable(std::size_t n_qubits) : n_qubits_(n_qubits) {}
    Observable(std::size_t n_qubits, std::vector<PauliTerm> terms) : n_qubits_(n_qubits) {
        for (auto& t : terms) add(std::move(t));
    }

    Observable& add(PauliTerm term) {
        if (term.axes.size() != n_qubits_) {
            throw std::invalid_argument("Pauli term '" + term.axes + "' does not act on " +
                                        std::to_string(n_qubits_) + " qubits");
        }
        for (char c : term.axes) {
            if (c != 'I' && c != 'Z' && c != 'X') {
                throw std::invalid_argument("unsupported Pauli axis '" + std::string(1, c) + "'");
            }
        }
        terms_.push_back(std::move(term));
        return *this;
    }

    Observable& add(double coefficient, std::string axes) {
        return add(PauliTerm{coefficient, std::move(axes)});
    }

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] const std::vector<PauliTerm>& terms() const noexcept { return terms_; }

    [[nodiscard]] bool is_diagonal() const noexcept {
        return std::all_of(terms_.begin(), terms_.end(),
                           [](const PauliTerm& t) { return t.is_diagonal(); });
    }

    /// Eigenvalue of the Z/I part on a basis state. X terms contribute nothing.
    [[nodiscard]] double diagonal_energy(std::uint64_t basis_index) const {
        double e = 0.0;
        for (const auto& t : terms_) {
            if (!t.is_diagonal()) continue;
            e += t.coefficient * z_sign(t.axes, basis_index);
        }
        return e;
    }

    /// Diagonal energies of every basis state, indexed like the amplitudes.
    [[nodiscard]] std::vector<double> diagonal() const {
        std::vector<double> d(std::size_t{1} << n_qubits_, 0.0);
        for (const auto& t : terms_) {
            if (!t.is_diagonal()) continue;
            const std::uint64_t zmask = masks(t.axes, 'Z');
            for (std::uint64_t i = 0; i < d.size(); ++i) {
                d[i] += (std::popcount(i & zmask) & 1) ? -t.coefficient : t.coefficient;
            }
        }
        return d;
    }

    /// Bitmask of the qubits carrying `axis` in a Pauli string.
    [[nodiscard]] static std::uint64_t masks(std::string_view axes, char axis) {
        std::uint64_t m = 0;
        const std::size_t n = axes.size();
        for (std::size_t q = 0; q < n; ++q) {
            if (axes[q] == axis) m |= std::uint64_t{1} << (n - 1 - q);
        }
        return m;
    }

private:
    static double z_sign(std::string_view axes, std::uint64_t index) {
        return (std::popcount(index & masks(axes, 'Z')) & 1) ? -1.0 : 1.0;
    }

    std::size_t n_qubits_;
    std::vector<PauliTerm> terms_;
};

/// <psi|H|psi>. X-containing terms are applied to a copy of the amplitude
/// index space (bit flip plus Z sign) and contracted against psi.
inline double expectation(const StateVector& state, const Observable& obs) {
    if (state.n_qubits() != obs.n_qubits()) {
        throw std::invalid_argument("observable acts on " + std::to_string(obs.n_qubits()) +
                                    " qubits but state has " + std::to_string(state.n_qubits()));
    }
    const auto amps = state.amplitudes();
    complex total{0.0, 0.0};
    for (const auto& term : obs.terms()) {
        const std::uint64_t xmask = Observable::masks(term.axes, 'X');
        const std::uint64_t zmask = Observable::masks(term.axes, 'Z');
        complex acc{0.0, 0.0};
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            const double sign = (std::popcount(i & zmask) & 1) ? -1.0 : 1.0;
            acc += std::conj(amps[i ^ xmask]) * (sign * amps[i]);
        }
        total += term.coefficient * acc;
    }
    return total.real();
}

// ---------------------------------------------------------------------------
// Sampling and the basis protocol
// ---------------------------------------------------------------------------

struct SampleDistribution {
    std::size_t n_qubits = 0;
    std::size_t shots = 0;  // 0 = exact |amplitude|^2
    std::map<std::string, double> probabilities;

    void validate() const {
        double total = 0.0;
        for (const auto& [bits, p] : probabilities) {
            if (bits.size() != n_qubits) throw std::invalid_argument("bitstring length mismatch");
            (void)bitstring_to_index(bits);
            if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0,1]");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw std::invalid_argument("probabilities sum to " + std::to_string(total));
        }
    }
};

/// Exact probabilities below this are dropped from the sparse map.
inline constexpr double kProbabilityFloor = 1e-15;

/// Multinomial draw of `shots` measurements; shots == 0 returns the exact
/// distribution. Deterministic for a fixed seed.
inline SampleDistribution sample(const StateVector& state, long long shots, std::uint64_t seed) {
    if (shots < 0) throw std::invalid_argument("shots must be non-negative");
    SampleDistribution dist;
    dist.n_qubits = state.n_qubits();
    dist.shots = static_cast<std::size_t>(shots);
    const auto probs = state.probabilities();
    if (shots == 0) {
        for (std::uint64_t i = 0; i < probs.size(); ++i) {
            if (probs[i] > kProbabilityFloor) {
                dist.probabilities.emplace(index_to_bitstring(i, state.n_qubits()), probs[i]);
            }
        }
        return dist;
    }
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::uint64_t> pick(probs.begin(), probs.end());
    std::map<std::uint64_t, long long> counts;
    for (long long s = 0; s < shots; ++s) ++counts[pick(rng)];
    for (const auto& [idx, count] : counts) {
        dist.probabilities.emplace(index_to_bitstring(idx, state.n_qubits()),
                                   static_cast<double>(count) / static_cast<double>(shots));
    }
    return dist;
}

/// Element i is the probability that qubit i reads 1.
inline std::vector<double> marginals(const SampleDistribution& dist) {
    std::vector<double> m(dist.n_qubits, 0.0);
    for (const auto& [bits, p] : dist.probabilities) {
        for (std::size_t q = 0; q < dist.n_qubits && q < bits.size(); ++q) {
            if (bits[q] == '1') m[q] += p;
        }
    }
    return m;
}

/// Most probable bitstring; ties go to the lexicographically smallest key.
inline std::string argmax_state(const SampleDistribution& dist) {
    if (dist.probabilities.empty()) throw std::invalid_argument("empty distribution");
    const std::string* best = nullptr;
    double best_p = -1.0;
    for (const auto& [bits, p] : dist.probabilities) {
        if (p > best_p) {  // map iterates in lexicographic order
            best = &bits;
            best_p = p;
        }
    }
    return *best;
}

/// Expectation of a diagonal observable estimated from sampled frequencies.
inline double sampled_expectation(const SampleDistribution& dist, const Observable& obs) {
    if (!obs.is_diagonal()) {
        throw std::invalid_argument("sampled energy estimation needs a Z-only observable");
    }
    double e = 0.0;
    for (const auto& [bits, p] : dist.probabilities) {
        e += p * obs.diagonal_energy(bitstring_to_index(bits));
    }
    return e;
}

}  // namespace vqh::quantum
