#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "vqh/qubo.hpp"

using namespace vqh::qubo;
using Catch::Approx;

namespace {

QuboProblem random_qubo(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("x" + std::to_string(i));
    QuboProblem q = make_qubo(labels);
    for (std::size_t i = 0; i < n; ++i) {
        q.a[i] = u(rng);
        for (std::size_t j = i + 1; j < n; ++j) q.set_coupling(i, j, u(rng));
    }
    return q;
}

QuboProblem three_note_example() {
    QuboProblem q = make_qubo({"C", "E", "G"});
    q.a = {-1.0, -1.0, 1.0};
    return q;
}

}  // namespace

TEST_CASE("qubo values from the definition") {
    const auto q = three_note_example();
    CHECK(qubo_value(q, "110") == -2.0);
    CHECK(qubo_value(q, "000") == 0.0);
    CHECK_THROWS(qubo_value(q, "11"));
    CHECK_THROWS(qubo_value(q, "1x0"));

    QuboProblem c = make_qubo({"A", "B", "C"});
    c.a = {-1.0, -1.0, 1.0};
    c.set_coupling(0, 1, 0.5);
    c.set_coupling(1, 2, -2.0);
    // -1 - 1 + 0.5 by hand
    CHECK(qubo_value(c, "110") == -1.5);
    CHECK(qubo_value(c, "111") == -1.0 - 1.0 + 1.0 + 0.5 - 2.0);
}

TEST_CASE("validation catches malformed problems") {
    QuboProblem q = make_qubo({"a", "b"});
    q.b[0][1] = 1.0;
    CHECK_THROWS(q.validate());
    q.b[1][0] = 1.0;
    q.validate();
    q.b[0][0] = 1.0;
    CHECK_THROWS(q.validate());
    CHECK_THROWS(make_qubo({"a", "a"}).validate());
    CHECK_THROWS(make_qubo({}).validate());
    CHECK_THROWS(q.set_coupling(1, 1, 0.0));
}

TEST_CASE("ising image of the three-note example") {
    const IsingModel m = qubo_to_ising(three_note_example());
    CHECK(m.alpha == std::vector<double>{2.0, 2.0, -2.0});
    for (const auto& row : m.beta)
        for (double v : row) CHECK(v == 0.0);
    const auto obs = ising_to_observable(m);
    int z_terms = 0;
    for (const auto& t : obs.terms()) {
        if (t.axes.find('Z') != std::string::npos) ++z_terms;
        CHECK(t.axes.find('X') == std::string::npos);
    }
    CHECK(z_terms == 3);
    CHECK(brute_force_ground(m).minimizers == std::set<std::string>{"110"});
    CHECK(brute_force_ground(three_note_example()).minimizers == std::set<std::string>{"110"});
    CHECK(brute_force_ground(three_note_example()).energy == -2.0);
}

TEST_CASE("single coupling gives exactly one ZZ term") {
    QuboProblem q = make_qubo({"a", "b"});
    q.set_coupling(0, 1, 0.25);
    const auto obs = ising_to_observable(qubo_to_ising(q));
    int zz = 0;
    for (const auto& t : obs.terms()) zz += t.axes == "ZZ";
    CHECK(zz == 1);
}

TEST_CASE("affine equivalence with one global scale, checked state by state") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
        const auto q = random_qubo(n, rng);
        const IsingModel m = qubo_to_ising(q);
        for (std::uint64_t idx = 0; idx < (1ULL << n); ++idx) {
            const std::string x = oracle::bits(idx, n);
            // Spin energy straight from alpha/beta with z = 1 - 2x.
            double e = m.offset;
            for (std::size_t i = 0; i < n; ++i) {
                const double zi = x[i] == '1' ? -1.0 : 1.0;
                e += m.alpha[i] * zi;
                for (std::size_t j = i + 1; j < n; ++j) e += m.beta[i][j] * zi * (x[j] == '1' ? -1.0 : 1.0);
            }
            CHECK(std::abs(e - kIsingScale * oracle::qubo(q.a, q.b, x)) < 1e-9);
        }
    }
}

TEST_CASE("ising operator diagonal reproduces the energy landscape") {
    std::mt19937_64 rng(5);
    const auto q = random_qubo(5, rng);
    const auto obs = ising_to_observable(qubo_to_ising(q));
    const auto diag = obs.diagonal();
    for (std::uint64_t idx = 0; idx < 32; ++idx) {
        CHECK(diag[idx] == Approx(kIsingScale * oracle::qubo(q.a, q.b, oracle::bits(idx, 5))).margin(1e-9));
    }
}

TEST_CASE("argmin sets coincide between QUBO and Ising") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const auto q = random_qubo(4, rng);
        CHECK(brute_force_ground(q).minimizers == brute_force_ground(qubo_to_ising(q)).minimizers);
    }
}

TEST_CASE("transverse field adds one X term per qubit") {
    const auto m = qubo_to_ising(three_note_example(), 0.5);
    const auto obs = ising_to_observable(m);
    int x_terms = 0;
    for (const auto& t : obs.terms()) {
        if (t.axes.find('X') != std::string::npos) {
            ++x_terms;
            CHECK(t.coefficient == -0.5);
        }
    }
    CHECK(x_terms == 3);
    CHECK_THROWS(brute_force_ground(m));
    CHECK_THROWS(qubo_to_ising(three_note_example(), -1.0));
}

TEST_CASE("linear chord QUBOs have the chord indicator as unique ground state") {
    for (std::size_t n = 1; n <= 8; ++n) {
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < n; ++i) labels.push_back("n" + std::to_string(i));
        for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
            const int size = __builtin_popcountll(mask);
            if (size < 1 || size > 4) continue;
            std::set<std::size_t> chord;
            for (std::size_t i = 0; i < n; ++i)
                if ((mask >> i) & 1U) chord.insert(i);
            const auto q = chord_qubo(labels, chord, ChordMode::linear);
            CHECK(brute_force_ground(q).minimizers == std::set<std::string>{indicator(n, chord)});
        }
    }
    const auto silence = chord_qubo(chromatic_scale(), {}, ChordMode::linear);
    CHECK(brute_force_ground(silence).minimizers == std::set<std::string>{std::string(12, '0')});
    CHECK_THROWS(chord_qubo({}, {}, ChordMode::linear));
}

TEST_CASE("C major on the chromatic scale") {
    const auto labels = chromatic_scale();
    const auto cmaj = chord_indices(labels, {"C", "E", "G"});
    CHECK(cmaj == major_triad(0));
    CHECK(indicator(12, cmaj) == "100010010000");
    const auto q = chord_qubo(labels, cmaj, ChordMode::linear);
    for (std::size_t i = 0; i < 12; ++i) CHECK(q.a[i] == (cmaj.contains(i) ? -1.0 : 1.0));
    const auto g = brute_force_ground(qubo_to_ising(q));
    CHECK(g.minimizers == std::set<std::string>{"100010010000"});
    CHECK(g.energy == Approx(-12.0));
    CHECK(complement("100010010000") == "011101101111");
}

TEST_CASE("coupled chord degeneracy and its breaking") {
    const auto labels = chromatic_scale();
    const auto cmaj = major_triad(0);
    const std::string chord = indicator(12, cmaj);
    CHECK(brute_force_ground(chord_qubo(labels, cmaj, ChordMode::coupled, 0.0)).minimizers ==
          std::set<std::string>{chord, complement(chord)});
    // abar adds abar * (number of ones), so a positive shift favours the
    // three-note chord over its nine-note complement.
    CHECK(brute_force_ground(chord_qubo(labels, cmaj, ChordMode::coupled, 0.1)).minimizers ==
          std::set<std::string>{chord});
    CHECK(brute_force_ground(chord_qubo(labels, cmaj, ChordMode::coupled, -0.1)).minimizers ==
          std::set<std::string>{complement(chord)});
}

TEST_CASE("coupled construction follows the ring rule") {
    const auto q = chord_qubo(chromatic_scale(), major_triad(0), ChordMode::coupled, 0.0);
    // C-C# crosses the chord boundary, C#-D does not; B-C wraps around.
    CHECK(q.b[0][1] == 1.0);
    CHECK(q.b[1][2] == -1.0);
    CHECK(q.b[11][0] == 1.0);
    CHECK(q.b[0][2] == 0.0);
    for (std::size_t k = 0; k < 12; ++k) {
        double row = 0.0;
        for (double v : q.b[k]) row += v;
        CHECK(q.a[k] == -0.5 * row);
    }
}

TEST_CASE("adiabatic sequences interpolate and keep endpoint ground states") {
    const auto labels = chromatic_scale();
    const auto a = chord_qubo(labels, major_triad(0), ChordMode::linear);
    const auto b = chord_qubo(labels, dominant_seventh(11), ChordMode::linear);
    const auto two = adiabatic_sequence(a, b, 2);
    CHECK(two.entries.front() == a);
    CHECK(two.entries.back() == b);

    const auto seq = adiabatic_sequence(a, b, 16, 8);
    REQUIRE(seq.size() == 16);
    CHECK(seq.budgets == std::vector<int>(16, 8));
    CHECK(seq.entries.front() == a);
    CHECK(seq.entries.back() == b);
    CHECK(brute_force_ground(seq.entries.front()).minimizers == brute_force_ground(a).minimizers);
    CHECK(brute_force_ground(seq.entries.back()).minimizers == brute_force_ground(b).minimizers);
    const double t = 5.0 / 15.0;
    CHECK(seq.entries[5].a[3] == Approx((1 - t) * a.a[3] + t * b.a[3]));

    CHECK_THROWS(adiabatic_sequence(a, b, 1));
    CHECK_THROWS(adiabatic_sequence(a, make_qubo({"x"}), 4));
}

TEST_CASE("h_setup parsing") {
    SECTION("diagonal block") {
        const auto seq = parse_h_setup("h0,C,E,G\nC,-1,0,0\nE,0,-1,0\nG,0,0,1\n");
        REQUIRE(seq.size() == 1);
        CHECK(seq.entries[0] == three_note_example());
    }
    SECTION("two consecutive blocks") {
        const std::string block0 = "h0,a,b,c,d\na,1,0,0,0\nb,0,1,0,0\nc,0,0,1,0\nd,0,0,0,1\n";
        const std::string block1 = "h1,a,b,c,d\na,-1,2,0,0\nb,0,-1,0,0\nc,0,0,-1,0\nd,0,0,0,-1\n";
        const auto seq = parse_h_setup(block0 + "\n" + block1);
        REQUIRE(seq.size() == 2);
        CHECK(seq.entries[1].b[0][1] == 1.0);  // (2 + 0) / 2
        CHECK(seq.entries[1].b[1][0] == 1.0);
    }
    SECTION("errors") {
        CHECK_THROWS_AS(parse_h_setup(""), HSetupError);
        CHECK_THROWS_AS(parse_h_setup("h0,a,b,c,d\na,1,0,0\nb,0,1,0,0\nc,0,0,1,0\nd,0,0,0,1\n"), HSetupError);
        CHECK_THROWS_AS(parse_h_setup("h0,a,b\na,1,x\nb,0,1\n"), HSetupError);
        CHECK_THROWS_AS(parse_h_setup("h0,a,b\na,1,0\n"), HSetupError);
        CHECK_THROWS_AS(parse_h_setup("h0,a,b\na,1,0\nb,0,1\nh1,a,c\na,1,0\nc,0,1\n"), HSetupError);
        CHECK_THROWS_AS(parse_h_setup("a,1,0\nb,0,1\n"), HSetupError);
        CHECK_THROWS_AS(parse_h_setup("h0,a,b\nb,1,0\na,0,1\n"), HSetupError);
        CHECK_THROWS_AS(parse_h_setup("h0,a,b\na,1,nan\nb,0,1\n"), HSetupError);
    }
}

TEST_CASE("h_setup round trip") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        HamiltonianSequence seq;
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 6);
        const std::size_t k = 1 + static_cast<std::size_t>(trial % 3);
        const auto base = random_qubo(n, rng);
        for (std::size_t e = 0; e < k; ++e) {
            auto q = random_qubo(n, rng);
            q.labels = base.labels;
            seq.entries.push_back(q);
        }
        const auto back = parse_h_setup(serialize_h_setup(seq));
        CHECK(back.entries == seq.entries);
    }
}

TEST_CASE("operator descriptions") {
    const auto ops = describe_operators(ising_to_observable(qubo_to_ising(three_note_example())));
    CHECK(std::find(ops.begin(), ops.end(), "+2 ZII") != ops.end());
    CHECK(std::find(ops.begin(), ops.end(), "-2 IIZ") != ops.end());
}

TEST_CASE("brute force size limit") {
    std::vector<std::string> labels;
    for (int i = 0; i < 21; ++i) labels.push_back("v" + std::to_string(i));
    CHECK_THROWS(brute_force_ground(make_qubo(labels)));
}
