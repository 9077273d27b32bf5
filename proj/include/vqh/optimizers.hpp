// optimizers.hpp
// Derivative-free minimizers used by the VQE loop: SPSA, NFT (sequential
// minimal optimization over sinusoidal parameters) and COBYLA.
//
// Every optimizer evaluates the starting point first, so the first cost
// evaluation of a run is always at x0.

#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vqh/cobyla.hpp"

namespace vqh::opt {

using CostFunction = std::function<double(std::span<const double>)>;

enum class OptimizerName { cobyla, spsa, nft };

inline std::string to_string(OptimizerName o) {
    switch (o) {
        case OptimizerName::cobyla: return "cobyla";
        case OptimizerName::spsa: return "spsa";
        case OptimizerName::nft: return "nft";
    }
    return "unknown";
}

inline OptimizerName optimizer_from_string(std::string_view s) {
    if (s == "cobyla" || s == "COBYLA") return OptimizerName::cobyla;
    if (s == "spsa" || s == "SPSA") return OptimizerName::spsa;
    if (s == "nft" || s == "NFT") return OptimizerName::nft;
    throw std::invalid_argument("unknown optimizer: " + std::string(s));
}

struct OptimizerResult {
    std::vector<double> x;
    double fx = 0.0;
    std::size_t evaluations = 0;
};

struct SpsaOptions {
    double a = 0.2;
    double c = 0.1;
    /// Stability constant; negative means 10% of the evaluation budget.
    double A = -1.0;
    double alpha = 0.602;
    double gamma = 0.101;
    std::uint64_t seed = 0;
};

/// One SPSA iteration with gains a_k and c_k. Uses two cost evaluations and
/// updates `x` in place.
template <class Rng>
void spsa_step(const CostFunction& f, std::vector<double>& x, double a_k, double c_k, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    std::vector<double> delta(x.size());
    for (double& d : delta) d = coin(rng) ? 1.0 : -1.0;
    std::vector<double> xp(x), xm(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] += c_k * delta[i];
        xm[i] -= c_k * delta[i];
    }
    const double fp = f(xp);
    const double fm = f(xm);
    const double g = (fp - fm) / (2.0 * c_k);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= a_k * g * delta[i];
}

/// SPSA only evaluates perturbed points, so the returned fx is f(x0); callers
/// wanting f at the final iterate evaluate it themselves.
inline OptimizerResult spsa_minimize(const CostFunction& f, std::span<const double> x0,
                                     std::size_t max_evals, const SpsaOptions& opts = {}) {
    OptimizerResult r;
    r.x.assign(x0.begin(), x0.end());
    if (max_evals == 0) return r;
    r.fx = f(r.x);
    r.evaluations = 1;
    const double A = opts.A < 0.0 ? 0.1 * static_cast<double>(max_evals) : opts.A;
    std::mt19937_64 rng(opts.seed);
    for (std::size_t k = 0; r.evaluations + 2 <= max_evals; ++k) {
        const double kk = static_cast<double>(k);
        const double a_k = opts.a / std::pow(kk + 1.0 + A, opts.alpha);
        const double c_k = opts.c / std::pow(kk + 1.0, opts.gamma);
        spsa_step(f, r.x, a_k, c_k, rng);
        r.evaluations += 2;
    }
    return r;
}

struct NftOptions {
    /// Re-evaluate the current point every this many parameter visits; zero
    /// means once per sweep.
    std::size_t reset_interval = 0;
    /// Called after each parameter jump with the parameter index, the new
    /// parameters and the fitted minimum value.
    std::function<void(std::size_t, std::span<const double>, double)> on_update;
};

/// Minimizes f along parameter p, assuming f is a sinusoid with period 2π in
/// that parameter. `fcur` is f(x) on entry and the fitted minimum on exit.
inline void nft_update(const CostFunction& f, std::vector<double>& x, std::size_t p,
                       double& fcur) {
    constexpr double half_pi = std::numbers::pi / 2.0;
    const double theta = x[p];
    x[p] = theta + half_pi;
    const double z1 = f(x);
    x[p] = theta - half_pi;
    const double z3 = f(x);
    const double z0 = fcur;
    const double c = 0.5 * (z1 + z3);
    const double b = z0 - c;
    const double d = 0.5 * (z1 - z3);
    const double psi = std::atan2(d, b);
    x[p] = theta + psi + std::numbers::pi;
    fcur = c - std::hypot(b, d);
}

/// One cyclic sweep over all parameters, stopping early when fewer than two
/// evaluations remain. Returns the evaluations used.
inline std::size_t nft_sweep(const CostFunction& f, std::vector<double>& x, double& fcur,
                             std::size_t evals_left, const NftOptions& opts = {}) {
    std::size_t used = 0;
    for (std::size_t p = 0; p < x.size() && used + 2 <= evals_left; ++p) {
        nft_update(f, x, p, fcur);
        used += 2;
        if (opts.on_update) opts.on_update(p, x, fcur);
    }
    return used;
}

inline OptimizerResult nft_minimize(const CostFunction& f, std::span<const double> x0,
                                    std::size_t max_evals, const NftOptions& opts = {}) {
    OptimizerResult r;
    r.x.assign(x0.begin(), x0.end());
    if (max_evals == 0) return r;
    r.fx = f(r.x);
    r.evaluations = 1;
    if (r.x.empty()) return r;
    const std::size_t interval = opts.reset_interval == 0 ? r.x.size() : opts.reset_interval;
    std::size_t visits = 0;
    std::size_t p = 0;
    while (r.evaluations + 2 <= max_evals) {
        if (visits > 0 && visits % interval == 0) {
            r.fx = f(r.x);
            ++r.evaluations;
            if (r.evaluations + 2 > max_evals) break;
        }
        nft_update(f, r.x, p, r.fx);
        r.evaluations += 2;
        ++visits;
        if (opts.on_update) opts.on_update(p, r.x, r.fx);
        p = (p + 1) % r.x.size();
    }
    return r;
}

inline OptimizerResult cobyla_run(const CostFunction& f, std::span<const double> x0,
                                  std::size_t max_evals, const CobylaOptions& base = {}) {
    CobylaOptions o = base;
    o.max_evals = max_evals;
    OptimizerResult r;
    if (max_evals == 0) {
        r.x.assign(x0.begin(), x0.end());
        return r;
    }
    const CobylaResult c = cobyla_minimize(f, x0, o);
    r.x = c.x;
    r.fx = c.fx;
    r.evaluations = c.evaluations;
    return r;
}

}  // namespace vqh::opt
