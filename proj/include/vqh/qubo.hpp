// qubo.hpp
// QUBO problems, their Ising image, chord/degeneracy/adiabatic builders and
// the h_setup CSV format.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "vqh/quantum.hpp"

namespace vqh::qubo {

using Matrix = std::vector<std::vector<double>>;

inline Matrix zeros(std::size_t n) { return Matrix(n, std::vector<double>(n, 0.0)); }

/// Q(n) = sum_i a_i n_i + sum_{i<j} b_ij n_i n_j. Each unordered pair is
/// counted once with coefficient b_ij; b is stored as a full symmetric matrix.
struct QuboProblem {
    std::vector<std::string> labels;
    std::vector<double> a;
    Matrix b;

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }

    void validate() const {
        const std::size_t n = labels.size();
        if (n == 0) throw std::invalid_argument("QUBO has no variables");
        if (a.size() != n || b.size() != n) throw std::invalid_argument("QUBO dimension mismatch");
        std::set<std::string> seen;
        for (const auto& l : labels) {
            if (!seen.insert(l).second) throw std::invalid_argument("duplicate label '" + l + "'");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (b[i].size() != n) throw std::invalid_argument("QUBO dimension mismatch");
            if (b[i][i] != 0.0) throw std::invalid_argument("QUBO quadratic diagonal must be zero");
            for (std::size_t j = 0; j < i; ++j) {
                if (b[i][j] != b[j][i]) throw std::invalid_argument("QUBO matrix is not symmetric");
            }
        }
    }

    /// Sets b_ij and b_ji together.
    void set_coupling(std::size_t i, std::size_t j, double value) {
        if (i == j) throw std::invalid_argument("coupling needs two distinct variables");
        b.at(i).at(j) = value;
        b.at(j).at(i) = value;
    }

    bool operator==(const QuboProblem&) const = default;
};

inline QuboProblem make_qubo(std::vector<std::string> labels) {
    QuboProblem q;
    const std::size_t n = labels.size();
    q.labels = std::move(labels);
    q.a.assign(n, 0.0);
    q.b = zeros(n);
    return q;
}

inline double qubo_value(const QuboProblem& q, std::string_view assignment) {
    const std::size_t n = q.size();
    if (assignment.size() != n) {
        throw std::invalid_argument("assignment length " + std::to_string(assignment.size()) +
                                    " does not match QUBO size " + std::to_string(n));
    }
    (void)quantum::bitstring_to_index(assignment);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] != '1') continue;
        v += q.a[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            if (assignment[j] == '1') v += q.b[i][j];
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Ising image
// ---------------------------------------------------------------------------

/// H = sum_i alpha_i Z_i + sum_{i<j} beta_ij Z_i Z_j - h_x sum_i X_i + offset.
/// Only the strict upper triangle of beta is read.
struct IsingModel {
    std::vector<double> alpha;
    Matrix beta;
    double h_x = 0.0;
    double offset = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return alpha.size(); }
};

/// Scale between the Ising energy produced by qubo_to_ising and the QUBO value:
/// energy(spin(n)) == kIsingScale * Q(n) for every assignment n.
inline constexpr double kIsingScale = 4.0;

/// Diagonal (classical) energy of a basis assignment, with z_i = 1 - 2 n_i.
inline double ising_energy(const IsingModel& m, std::string_view assignment) {
    const std::size_t n = m.size();
    if (assignment.size() != n) throw std::invalid_argument("assignment length mismatch");
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] != '0' && assignment[i] != '1') {
            throw std::invalid_argument("assignment must be a bitstring");
        }
        z[i] = assignment[i] == '1' ? -1.0 : 1.0;
    }
    double e = m.offset;
    for (std::size_t i = 0; i < n; ++i) {
        e += m.alpha[i] * z[i];
        for (std::size_t j = i + 1; j < n; ++j) e += m.beta[i][j] * z[i] * z[j];
    }
    return e;
}

/// Substituting n_i = (1 - z_i)/2 into 4Q gives
///   alpha_i = -2 a_i - sum_{j!=i} b_ij,  beta_ij = b_ij,
///   offset  = 2 sum_i a_i + sum_{i<j} b_ij,
/// so the Ising energy equals 4Q exactly on every basis state.
inline IsingModel qubo_to_ising(const QuboProblem& q, double h_x = 0.0) {
    q.validate();
    if (h_x < 0.0) throw std::invalid_argument("transverse field magnitude must be >= 0");
    const std::size_t n = q.size();
    IsingModel m;
    m.alpha.assign(n, 0.0);
    m.beta = zeros(n);
    m.h_x = h_x;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) row += q.b[i][j];
        }
        m.alpha[i] = -2.0 * q.a[i] - row;
        m.offset += 2.0 * q.a[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            m.beta[i][j] = q.b[i][j];
            m.offset += q.b[i][j];
        }
    }
    return m;
}

inline quantum::Observable ising_to_observable(const IsingModel& m) {
    const std::size_t n = m.size();
    quantum::Observable obs(n);
    const std::string identity(n, 'I');
    for (std::size_t i = 0; i < n; ++i) {
        if (m.alpha[i] == 0.0) continue;
        std::string axes = identity;
        axes[i] = 'Z';
        obs.add(m.alpha[i], std::move(axes));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (m.beta[i][j] == 0.0) continue;
            std::string axes = identity;
            axes[i] = 'Z';
            axes[j] = 'Z';
            obs.add(m.beta[i][j], std::move(axes));
        }
    }
    if (m.h_x != 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            std::string axes = identity;
            axes[i] = 'X';
            obs.add(-m.h_x, std::move(axes));
        }
    }
    if (m.offset != 0.0) obs.add(m.offset, identity);
    return obs;
}

/// Human-readable operator list, e.g. "+2 ZIIIIIIIIIII".
inline std::vector<std::string> describe_operators(const quantum::Observable& obs) {
    std::vector<std::string> out;
    out.reserve(obs.terms().size());
    for (const auto& t : obs.terms()) {
        std::ostringstream os;
        os.precision(std::numeric_limits<double>::max_digits10);
        os << (t.coefficient < 0 ? "-" : "+") << std::abs(t.coefficient) << ' ' << t.axes;
        out.push_back(os.str());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

struct GroundStates {
    double energy = 0.0;
    std::set<std::string> minimizers;
};

inline constexpr std::size_t kBruteForceMaxVariables = 20;

namespace detail {

template <typename EnergyFn>
GroundStates enumerate_ground(std::size_t n, EnergyFn&& energy_of) {
    if (n == 0) throw std::invalid_argument("nothing to enumerate");
    if (n > kBruteForceMaxVariables) {
        throw std::invalid_argument("brute force limited to " +
                                    std::to_string(kBruteForceMaxVariables) + " variables");
    }
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<double> energies(count);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < count; ++i) {
        energies[i] = energy_of(quantum::index_to_bitstring(i, n));
        best = std::min(best, energies[i]);
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(best));
    GroundStates g;
    g.energy = best;
    for (std::uint64_t i = 0; i < count; ++i) {
        if (energies[i] - best <= tol) g.minimizers.insert(quantum::index_to_bitstring(i, n));
    }
    return g;
}

}  // namespace detail

inline GroundStates brute_force_ground(const QuboProblem& q) {
    q.validate();
    return detail::enumerate_ground(q.size(), [&](const std::string& s) { return qubo_value(q, s); });
}

/// Enumerates the classical (Z-diagonal) spectrum. A transverse field makes the
/// ground state non-classical, so it is rejected.
inline GroundStates brute_force_ground(const IsingModel& m) {
    if (m.h_x != 0.0) {
        throw std::invalid_argument("brute force covers diagonal models only (h_x must be 0)");
    }
    return detail::enumerate_ground(m.size(),
                                    [&](const std::string& s) { return ising_energy(m, s); });
}

// ---------------------------------------------------------------------------
// Notes and chords
// ---------------------------------------------------------------------------

inline const std::array<std::string, 12>& chromatic_labels() {
    static const std::array<std::string, 12> names{"C",  "C#", "D",  "D#", "E",  "F",
                                                   "F#", "G",  "G#", "A",  "A#", "B"};
    return names;
}

inline std::vector<std::string> chromatic_scale() {
    const auto& n = chromatic_labels();
    return {n.begin(), n.end()};
}

inline std::size_t label_index(const std::vector<std::string>& labels, std::string_view name) {
    const auto it = std::find(labels.begin(), labels.end(), name);
    if (it == labels.end()) throw std::invalid_argument("unknown note '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - labels.begin());
}

inline std::set<std::size_t> chord_indices(const std::vector<std::string>& labels,
                                           const std::vector<std::string>& notes) {
    std::set<std::size_t> idx;
    for (const auto& n : notes) idx.insert(label_index(labels, n));
    return idx;
}

/// Bitstring with '1' at every chord position.
inline std::string indicator(std::size_t n, const std::set<std::size_t>& chord) {
    std::string s(n, '0');
    for (auto i : chord) s.at(i) = '1';
    return s;
}

inline std::string complement(std::string_view bits) {
    std::string out(bits);
    for (auto& c : out) c = (c == '1') ? '0' : '1';
    return out;
}

enum class ChordMode { linear, coupled };

/// linear:  a_i = -1 on chord notes, +1 elsewhere, no couplings.
/// coupled: nearest-neighbour ring couplings, +1 across a chord boundary and -1
///          otherwise, with a_k = -1/2 sum_l b_kl + abar. At abar = 0 the chord
///          and its bit complement are degenerate ground states.
inline QuboProblem chord_qubo(std::vector<std::string> labels, const std::set<std::size_t>& chord,
                              ChordMode mode, double abar = 0.0) {
    if (labels.empty()) throw std::invalid_argument("chord QUBO needs at least one label");
    const std::size_t n = labels.size();
    for (auto i : chord) {
        if (i >= n) throw std::invalid_argument("chord index out of range");
    }
    QuboProblem q = make_qubo(std::move(labels));
    if (mode == ChordMode::linear) {
        for (std::size_t i = 0; i < n; ++i) q.a[i] = chord.contains(i) ? -1.0 : 1.0;
        return q;
    }
    if (n >= 2) {
        const std::size_t bonds = (n == 2) ? 1 : n;
        for (std::size_t k = 0; k < bonds; ++k) {
            const std::size_t l = (k + 1) % n;
            const bool crosses = chord.contains(k) != chord.contains(l);
            q.set_coupling(k, l, crosses ? 1.0 : -1.0);
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        double row = 0.0;
        for (std::size_t l = 0; l < n; ++l) row += q.b[k][l];
        q.a[k] = -0.5 * row + abar;
    }
    return q;
}

/// Major triad (root, +4, +7 semitones) on a 12-note chromatic layout.
inline std::set<std::size_t> major_triad(std::size_t root) {
    return {root % 12, (root + 4) % 12, (root + 7) % 12};
}

/// Dominant seventh (root, +4, +7, +10 semitones).
inline std::set<std::size_t> dominant_seventh(std::size_t root) {
    return {root % 12, (root + 4) % 12, (root + 7) % 12, (root + 10) % 12};
}

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

struct HamiltonianSequence {
    std::vector<QuboProblem> entries;
    std::vector<int> budgets;  // evaluations per entry

    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }

    void validate() const {
        if (entries.empty()) throw std::invalid_argument("empty Hamiltonian sequence");
        if (budgets.size() != entries.size()) {
            throw std::invalid_argument("sequence has " + std::to_string(entries.size()) +
                                        " Hamiltonians but " + std::to_string(budgets.size()) +
                                        " iteration budgets");
        }
        for (const auto& e : entries) {
            e.validate();
            if (e.labels != entries.front().labels) {
                throw std::invalid_argument("sequence entries use different labels");
            }
        }
    }
};

/// H(t) = (1-t) H_init + t H_final at t = k/(steps-1).
inline HamiltonianSequence adiabatic_sequence(const QuboProblem& init, const QuboProblem& final_,
                                              int steps, int budget_per_step = 1) {
    init.validate();
    final_.validate();
    if (init.size() != final_.size()) throw std::invalid_argument("adiabatic endpoints differ in size");
    if (init.labels != final_.labels) throw std::invalid_argument("adiabatic endpoints differ in labels");
    if (steps < 2) throw std::invalid_argument("adiabatic sequence needs at least 2 steps");
    const std::size_t n = init.size();
    HamiltonianSequence seq;
    for (int k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(steps - 1);
        QuboProblem q = make_qubo(init.labels);
        for (std::size_t i = 0; i < n; ++i) {
            q.a[i] = (1.0 - t) * init.a[i] + t * final_.a[i];
            for (std::size_t j = 0; j < n; ++j) {
                q.b[i][j] = (1.0 - t) * init.b[i][j] + t * final_.b[i][j];
            }
        }
        seq.entries.push_back(std::move(q));
        seq.budgets.push_back(budget_per_step);
    }
    return seq;
}

// ---------------------------------------------------------------------------
// h_setup CSV
//
//   h<k>,<label_1>,...,<label_n>
//   <label_1>,v_11,...,v_1n
//   ...
//   <label_n>,v_n1,...,v_nn
//
// Blocks follow each other directly (blank lines are ignored). The matrix is
// symmetrized as (V + V^T)/2; the diagonal holds the linear terms a_i and the
// off-diagonal the couplings b_ij.
// ---------------------------------------------------------------------------

class HSetupError : public std::runtime_error {
public:
    HSetupError(std::size_t line, const std::string& what)
        : std::runtime_error("h_setup line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

inline bool parse_double(std::string_view cell, double& out) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

inline bool is_block_header(std::string_view first_cell) {
    if (first_cell.size() < 2 || (first_cell[0] != 'h' && first_cell[0] != 'H')) return false;
    return std::all_of(first_cell.begin() + 1, first_cell.end(),
                       [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace detail

inline std::string format_number(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf.data(), ptr);
}

inline HamiltonianSequence parse_h_setup(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    {
        std::size_t lineno = 0, start = 0;
        while (start <= text.size()) {
            const auto nl = text.find('\n', start);
            const auto raw = text.substr(start, nl == std::string_view::npos ? text.size() - start
                                                                             : nl - start);
            ++lineno;
            if (!detail::trim(raw).empty()) lines.emplace_back(lineno, raw);
            if (nl == std::string_view::npos) break;
            start = nl + 1;
        }
    }
    if (lines.empty()) throw HSetupError(0, "no data");

    HamiltonianSequence seq;
    std::size_t pos = 0;
    while (pos < lines.size()) {
        const auto [hline, htext] = lines[pos];
        const auto header = detail::split_cells(htext);
        if (!detail::is_block_header(header[0])) {
            throw HSetupError(hline, "expected a block header 'h<k>,<labels...>', got '" +
                                         std::string(header[0]) + "'");
        }
        const std::size_t n = header.size() - 1;
        if (n == 0) throw HSetupError(hline, "block header lists no labels");
        std::vector<std::string> labels;
        for (std::size_t i = 1; i < header.size(); ++i) {
            if (header[i].empty()) throw HSetupError(hline, "empty label");
            labels.emplace_back(header[i]);
        }
        {
            std::set<std::string> uniq(labels.begin(), labels.end());
            if (uniq.size() != labels.size()) throw HSetupError(hline, "duplicate labels");
        }
        if (!seq.entries.empty() && labels != seq.entries.front().labels) {
            throw HSetupError(hline, "labels differ from the first block");
        }
        Matrix v = zeros(n);
        for (std::size_t r = 0; r < n; ++r) {
            ++pos;
            if (pos >= lines.size()) {
                throw HSetupError(hline, "block declares " + std::to_string(n) + " labels but has " +
                                             std::to_string(r) + " rows");
            }
            const auto [rline, rtext] = lines[pos];
            const auto cells = detail::split_cells(rtext);
            if (detail::is_block_header(cells[0])) {
                throw HSetupError(rline, "block declares " + std::to_string(n) +
                                             " labels but has " + std::to_string(r) + " rows");
            }
            if (cells.size() != n + 1) {
                throw HSetupError(rline, "row has " + std::to_string(cells.size() - 1) +
                                             " values, expected " + std::to_string(n));
            }
            if (cells[0] != labels[r]) {
                throw HSetupError(rline, "row label '" + std::string(cells[0]) +
                                             "' does not match header label '" + labels[r] + "'");
            }
            for (std::size_t c = 0; c < n; ++c) {
                if (!detail::parse_double(cells[c + 1], v[r][c])) {
                    throw HSetupError(rline, "non-numeric cell '" + std::string(cells[c + 1]) + "'");
                }
            }
        }
        QuboProblem q = make_qubo(labels);
        for (std::size_t i = 0; i < n; ++i) {
            q.a[i] = v[i][i];
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j) q.b[i][j] = 0.5 * (v[i][j] + v[j][i]);
            }
        }
        seq.entries.push_back(std::move(q));
        seq.budgets.push_back(0);
        ++pos;
    }
    return seq;
}

inline std::string serialize_h_setup(const std::vector<QuboProblem>& entries) {
    std::string out;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& q = entries[k];
        q.validate();
        out += "h" + std::to_string(k);
        for (const auto& l : q.labels) out += "," + l;
        out += '\n';
        for (std::size_t i = 0; i < q.size(); ++i) {
            out += q.labels[i];
            for (std::size_t j = 0; j < q.size(); ++j) {
                out += ',';
                out += format_number(i == j ? q.a[i] : q.b[i][j]);
            }
            out += '\n';
        }
    }
    return out;
}

inline std::string serialize_h_setup(const HamiltonianSequence& seq) {
    return serialize_h_setup(seq.entries);
}

}  // namespace vqh::qubo
