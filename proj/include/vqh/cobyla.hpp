// cobyla.hpp
// Constrained Optimization BY Linear Approximations (M.J.D. Powell, 1994).
//
// A line-by-line port of Powell's COBYLA (routines COBYLB and TRSTLP). The
// internal arrays keep Powell's 1-based, column-major indexing so the control
// flow can be checked against the original; the labelled gotos mirror the
// original statement labels.
//
// Minimizes f(x) subject to c_k(x) >= 0, k = 1..m.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vqh::opt {

struct CobylaOptions {
    double rhobeg = 1.0;
    double rhoend = 1e-4;
    std::size_t max_evals = 1000;
};

enum class CobylaStatus { converged, max_evals_reached, rounding_errors, zero_budget };

struct CobylaResult {
    std::vector<double> x;
    double fx = 0.0;
    double max_violation = 0.0;
    std::size_t evaluations = 0;
    CobylaStatus status = CobylaStatus::converged;
};

/// Objective plus constraint values; `constraints` has room for m entries.
using CobylaCallback =
    std::function<double(std::span<const double> x, std::span<double> constraints)>;

namespace detail {

/// Fortran-style 1-based column-major matrix.
class FMat {
public:
    FMat(std::size_t rows, std::size_t cols) : rows_(rows), data_(rows * cols, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return data_[(j - 1) * rows_ + (i - 1)]; }
    /// Column j as a 1-based pointer (element i at ptr[i]).
    double* col(std::size_t j) { return data_.data() + (j - 1) * rows_ - 1; }

private:
    std::size_t rows_;
    std::vector<double> data_;
};

/// Fortran-style 1-based vector.
class FVec {
public:
    explicit FVec(std::size_t n) : data_(n + 1, 0.0) {}
    double& operator()(std::size_t i) { return data_[i]; }
    double* ptr() { return data_.data(); }

private:
    std::vector<double> data_;
};

class IVec {
public:
    explicit IVec(std::size_t n) : data_(n + 1, 0) {}
    int& operator()(std::size_t i) { return data_[i]; }

private:
    std::vector<int> data_;
};

inline double sq(double v) { return v * v; }

// Solves the trust-region linear-programming subproblem. A holds the constraint
// gradients in columns 1..m and minus the objective gradient in column m+1;
// B holds the constraint right-hand sides. Returns ifull (1 when the step
// reaches the trust-region boundary).
inline int trstlp(int n, int m, FMat& a, double* b, double rho, double* dx, IVec& iact, FMat& z,
                  FVec& zdota, FVec& vmultc, FVec& sdirn, FVec& dxnew, FVec& vmultd) {
    int ifull = 1;
    int mcon = m;
    int nact = 0;
    double resmax = 0.0;
    int icon = 0;
    double optold = 0.0, optnew = 0.0, tot = 0.0, sp = 0.0, spabs = 0.0, acca = 0.0, accb = 0.0;
    double temp = 0.0, alpha = 0.0, beta = 0.0, ratio = 0.0, zdotv = 0.0, zdvabs = 0.0, tempa = 0.0;
    double vsave = 0.0, dd = 0.0, sd = 0.0, ss = 0.0, stpful = 0.0, step = 0.0, resold = 0.0;
    double zdotw = 0.0, zdwabs = 0.0, sum = 0.0, sumabs = 0.0;
    int icount = 0, nactx = 0, kk = 0, k = 0, kp = 0, iout = 0, isave = 0, kw = 0, kl = 0;

    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) z(i, j) = 0.0;
        z(i, i) = 1.0;
        dx[i] = 0.0;
    }
    if (m >= 1) {
        for (k = 1; k <= m; ++k) {
            if (b[k] > resmax) {
                resmax = b[k];
                icon = k;
            }
        }
        for (k = 1; k <= m; ++k) {
            iact(k) = k;
            vmultc(k) = resmax - b[k];
        }
    }
    if (resmax == 0.0) goto L480;
    for (int i = 1; i <= n; ++i) sdirn(i) = 0.0;

    // End the current stage if 3 consecutive iterations have neither reduced
    // the best objective value nor grown the active set.
L60:
    optold = 0.0;
    icount = 0;
L70:
    if (mcon == m) {
        optnew = resmax;
    } else {
        optnew = 0.0;
        for (int i = 1; i <= n; ++i) optnew -= dx[i] * a(i, mcon);
    }
    if (icount == 0 || optnew < optold) {
        optold = optnew;
        nactx = nact;
        icount = 3;
    } else if (nact > nactx) {
        nactx = nact;
        icount = 3;
    } else {
        --icount;
        if (icount == 0) goto L490;
    }

    // Add constraint iact(icon) to the active set using Givens rotations.
    if (icon <= nact) goto L260;
    kk = iact(icon);
    for (int i = 1; i <= n; ++i) dxnew(i) = a(i, kk);
    tot = 0.0;
    k = n;
L100:
    if (k > nact) {
        sp = 0.0;
        spabs = 0.0;
        for (int i = 1; i <= n; ++i) {
            temp = z(i, k) * dxnew(i);
            sp += temp;
            spabs += std::abs(temp);
        }
        acca = spabs + 0.1 * std::abs(sp);
        accb = spabs + 0.2 * std::abs(sp);
        if (spabs >= acca || acca >= accb) sp = 0.0;
        if (tot == 0.0) {
            tot = sp;
        } else {
            kp = k + 1;
            temp = std::sqrt(sp * sp + tot * tot);
            alpha = sp / temp;
            beta = tot / temp;
            tot = temp;
            for (int i = 1; i <= n; ++i) {
                temp = alpha * z(i, k) + beta * z(i, kp);
                z(i, kp) = alpha * z(i, kp) - beta * z(i, k);
                z(i, k) = temp;
            }
        }
        --k;
        goto L100;
    }

    if (tot != 0.0) {
        ++nact;
        zdota(nact) = tot;
        vmultc(icon) = vmultc(nact);
        vmultc(nact) = 0.0;
        goto L210;
    }

    // The new gradient is a combination of the active ones: pick one to drop.
    ratio = -1.0;
    k = nact;
L130:
    zdotv = 0.0;
    zdvabs = 0.0;
    for (int i = 1; i <= n; ++i) {
        temp = z(i, k) * dxnew(i);
        zdotv += temp;
        zdvabs += std::abs(temp);
    }
    acca = zdvabs + 0.1 * std::abs(zdotv);
    accb = zdvabs + 0.2 * std::abs(zdotv);
    if (zdvabs < acca && acca < accb) {
        temp = zdotv / zdota(k);
        if (temp > 0.0 && iact(k) <= m) {
            tempa = vmultc(k) / temp;
            if (ratio < 0.0 || tempa < ratio) {
                ratio = tempa;
                iout = k;
            }
        }
        if (k >= 2) {
            kw = iact(k);
            for (int i = 1; i <= n; ++i) dxnew(i) -= temp * a(i, kw);
        }
        vmultd(k) = temp;
    } else {
        vmultd(k) = 0.0;
    }
    --k;
    if (k > 0) goto L130;
    if (ratio < 0.0) goto L490;

    for (k = 1; k <= nact; ++k) vmultc(k) = std::max(0.0, vmultc(k) - ratio * vmultd(k));
    if (iout < nact) {
        isave = iact(iout);
        vsave = vmultc(iout);
        k = iout;
    L170:
        kp = k + 1;
        kw = iact(kp);
        sp = 0.0;
        for (int i = 1; i <= n; ++i) sp += z(i, k) * a(i, kw);
        temp = std::sqrt(sp * sp + sq(zdota(kp)));
        alpha = zdota(kp) / temp;
        beta = sp / temp;
        zdota(kp) = alpha * zdota(k);
        zdota(k) = temp;
        for (int i = 1; i <= n; ++i) {
            temp = alpha * z(i, kp) + beta * z(i, k);
            z(i, kp) = alpha * z(i, k) - beta * z(i, kp);
            z(i, k) = temp;
        }
        iact(k) = kw;
        vmultc(k) = vmultc(kp);
        k = kp;
        if (k < nact) goto L170;
        iact(k) = isave;
        vmultc(k) = vsave;
    }
    temp = 0.0;
    for (int i = 1; i <= n; ++i) temp += z(i, nact) * a(i, kk);
    if (temp == 0.0) goto L490;
    zdota(nact) = temp;
    vmultc(icon) = 0.0;
    vmultc(nact) = ratio;

    // Keep the objective as the last active constraint once mcon > m.
L210:
    iact(icon) = iact(nact);
    iact(nact) = kk;
    if (mcon > m && kk != mcon) {
        k = nact - 1;
        sp = 0.0;
        for (int i = 1; i <= n; ++i) sp += z(i, k) * a(i, kk);
        temp = std::sqrt(sp * sp + sq(zdota(nact)));
        alpha = zdota(nact) / temp;
        beta = sp / temp;
        zdota(nact) = alpha * zdota(k);
        zdota(k) = temp;
        for (int i = 1; i <= n; ++i) {
            temp = alpha * z(i, nact) + beta * z(i, k);
            z(i, nact) = alpha * z(i, k) - beta * z(i, nact);
            z(i, k) = temp;
        }
        iact(nact) = iact(k);
        iact(k) = kk;
        temp = vmultc(k);
        vmultc(k) = vmultc(nact);
        vmultc(nact) = temp;
    }

    if (mcon > m) goto L320;
    kk = iact(nact);
    temp = 0.0;
    for (int i = 1; i <= n; ++i) temp += sdirn(i) * a(i, kk);
    temp -= 1.0;
    temp /= zdota(nact);
    for (int i = 1; i <= n; ++i) sdirn(i) -= temp * z(i, nact);
    goto L340;

    // Delete constraint iact(icon) from the active set.
L260:
    if (icon < nact) {
        isave = iact(icon);
        vsave = vmultc(icon);
        k = icon;
    L270:
        kp = k + 1;
        kk = iact(kp);
        sp = 0.0;
        for (int i = 1; i <= n; ++i) sp += z(i, k) * a(i, kk);
        temp = std::sqrt(sp * sp + sq(zdota(kp)));
        alpha = zdota(kp) / temp;
        beta = sp / temp;
        zdota(kp) = alpha * zdota(k);
        zdota(k) = temp;
        for (int i = 1; i <= n; ++i) {
            temp = alpha * z(i, kp) + beta * z(i, k);
            z(i, kp) = alpha * z(i, k) - beta * z(i, kp);
            z(i, k) = temp;
        }
        iact(k) = kk;
        vmultc(k) = vmultc(kp);
        k = kp;
        if (k < nact) goto L270;
        iact(k) = isave;
        vmultc(k) = vsave;
    }
    --nact;

    if (mcon > m) goto L320;
    temp = 0.0;
    for (int i = 1; i <= n; ++i) temp += sdirn(i) * z(i, nact + 1);
    for (int i = 1; i <= n; ++i) sdirn(i) -= temp * z(i, nact + 1);
    goto L340;

    // Stage-two search direction.
L320:
    temp = 1.0 / zdota(nact);
    for (int i = 1; i <= n; ++i) sdirn(i) = temp * z(i, nact);

    // Step to the trust-region boundary, or the step that zeroes resmax.
L340:
    dd = rho * rho;
    sd = 0.0;
    ss = 0.0;
    for (int i = 1; i <= n; ++i) {
        if (std::abs(dx[i]) >= 1.0e-6 * rho) dd -= sq(dx[i]);
        sd += dx[i] * sdirn(i);
        ss += sq(sdirn(i));
    }
    if (dd <= 0.0) goto L490;
    temp = std::sqrt(ss * dd);
    if (std::abs(sd) >= 1.0e-6 * temp) temp = std::sqrt(ss * dd + sd * sd);
    stpful = dd / (temp + sd);
    step = stpful;
    if (mcon == m) {
        acca = step + 0.1 * resmax;
        accb = step + 0.2 * resmax;
        if (step >= acca || acca >= accb) goto L480;
        step = std::min(step, resmax);
    }

    for (int i = 1; i <= n; ++i) dxnew(i) = dx[i] + step * sdirn(i);
    if (mcon == m) {
        resold = resmax;
        resmax = 0.0;
        for (k = 1; k <= nact; ++k) {
            kk = iact(k);
            temp = b[kk];
            for (int i = 1; i <= n; ++i) temp -= a(i, kk) * dxnew(i);
            resmax = std::max(resmax, temp);
        }
    }

    // Lagrange multipliers that would occur if dx became dxnew.
    k = nact;
L390:
    zdotw = 0.0;
    zdwabs = 0.0;
    for (int i = 1; i <= n; ++i) {
        temp = z(i, k) * dxnew(i);
        zdotw += temp;
        zdwabs += std::abs(temp);
    }
    acca = zdwabs + 0.1 * std::abs(zdotw);
    accb = zdwabs + 0.2 * std::abs(zdotw);
    if (zdwabs >= acca || acca >= accb) zdotw = 0.0;
    vmultd(k) = zdotw / zdota(k);
    if (k >= 2) {
        kk = iact(k);
        for (int i = 1; i <= n; ++i) dxnew(i) -= vmultd(k) * a(i, kk);
        --k;
        goto L390;
    }
    if (mcon > m) vmultd(nact) = std::max(0.0, vmultd(nact));

    for (int i = 1; i <= n; ++i) dxnew(i) = dx[i] + step * sdirn(i);
    if (mcon > nact) {
        kl = nact + 1;
        for (k = kl; k <= mcon; ++k) {
            kk = iact(k);
            sum = resmax - b[kk];
            sumabs = resmax + std::abs(b[kk]);
            for (int i = 1; i <= n; ++i) {
                temp = a(i, kk) * dxnew(i);
                sum += temp;
                sumabs += std::abs(temp);
            }
            acca = sumabs + 0.1 * std::abs(sum);
            accb = sumabs + 0.2 * std::abs(sum);
            if (sumabs >= acca || acca >= accb) sum = 0.0;
            vmultd(k) = sum;
        }
    }

    // Fraction of the step from dx to dxnew that is taken.
    ratio = 1.0;
    icon = 0;
    for (k = 1; k <= mcon; ++k) {
        if (vmultd(k) < 0.0) {
            temp = vmultc(k) / (vmultc(k) - vmultd(k));
            if (temp < ratio) {
                ratio = temp;
                icon = k;
            }
        }
    }

    temp = 1.0 - ratio;
    for (int i = 1; i <= n; ++i) dx[i] = temp * dx[i] + ratio * dxnew(i);
    for (k = 1; k <= mcon; ++k) vmultc(k) = std::max(0.0, temp * vmultc(k) + ratio * vmultd(k));
    if (mcon == m) resmax = resold + ratio * (resmax - resold);

    if (icon > 0) goto L70;
    if (step == stpful) return ifull;

L480:
    mcon = m + 1;
    icon = mcon;
    iact(mcon) = mcon;
    vmultc(mcon) = 0.0;
    goto L60;

L490:
    if (mcon == m) goto L480;
    ifull = 0;
    return ifull;
}

}  // namespace detail

/// Runs COBYLA from x0. The callback is invoked at most options.max_evals
/// times; the returned point is the best vertex of the final simplex.
inline CobylaResult cobyla_minimize(const CobylaCallback& calcfc, std::span<const double> x0,
                                    std::size_t m, const CobylaOptions& options) {
    using detail::FMat;
    using detail::FVec;
    using detail::IVec;
    using detail::sq;

    const int n = static_cast<int>(x0.size());
    if (n == 0) throw std::invalid_argument("COBYLA needs at least one variable");
    if (!(options.rhobeg > 0.0) || !(options.rhoend > 0.0) || options.rhoend > options.rhobeg) {
        throw std::invalid_argument("COBYLA needs 0 < rhoend <= rhobeg");
    }
    const int mi = static_cast<int>(m);
    const int np = n + 1;
    const int mp = mi + 1;
    const int mpp = mi + 2;

    CobylaResult result;
    result.x.assign(x0.begin(), x0.end());
    if (options.max_evals == 0) {
        result.status = CobylaStatus::zero_budget;
        return result;
    }
    const std::size_t maxfun = options.max_evals;

    FVec x(n);
    for (int i = 1; i <= n; ++i) x(i) = x0[static_cast<std::size_t>(i - 1)];
    FVec con(mpp);
    FMat sim(n, np), simi(n, n), datmat(mpp, np), a(n, mp);
    FVec vsig(n), veta(n), sigbar(n), dx(n), w(n);
    IVec iact(mp);
    FMat zmat(n, n);
    FVec zdota(n), vmultc(mp), sdirn(n), dxnew(n), vmultd(mp);

    std::vector<double> xbuf(static_cast<std::size_t>(n));
    std::vector<double> cbuf(m);

    const double alpha = 0.25;
    const double beta = 2.1;
    const double gamma = 0.5;
    const double delta = 1.1;
    double rho = options.rhobeg;
    double parmu = 0.0;
    std::size_t nfvals = 0;
    double f = 0.0, resmax = 0.0, temp = 0.0, tempa = 0.0, phimin = 0.0, error = 0.0;
    double parsig = 0.0, pareta = 0.0, wsig = 0.0, weta = 0.0, cvmaxp = 0.0, cvmaxm = 0.0;
    double sum = 0.0, dxsign = 0.0, resnew = 0.0, barmu = 0.0, prerec = 0.0, prerem = 0.0;
    double phi = 0.0, vmold = 0.0, vmnew = 0.0, trured = 0.0, ratio = 0.0, edgmax = 0.0;
    double denom = 0.0, cmin = 0.0, cmax = 0.0;
    int jdrop = np, ibrnch = 0, nbest = 0, iflag = 0, l = 0, ifull = 0;

    temp = 1.0 / rho;
    for (int i = 1; i <= n; ++i) {
        sim(i, np) = x(i);
        for (int j = 1; j <= n; ++j) {
            sim(i, j) = 0.0;
            simi(i, j) = 0.0;
        }
        sim(i, i) = rho;
        simi(i, i) = temp;
    }

    // Evaluate the objective and constraints at x.
L40:
    if (nfvals >= maxfun && nfvals > 0) {
        result.status = CobylaStatus::max_evals_reached;
        goto L600;
    }
    ++nfvals;
    for (int i = 1; i <= n; ++i) xbuf[static_cast<std::size_t>(i - 1)] = x(i);
    std::fill(cbuf.begin(), cbuf.end(), 0.0);
    f = calcfc(xbuf, cbuf);
    resmax = 0.0;
    for (int k = 1; k <= mi; ++k) {
        con(k) = cbuf[static_cast<std::size_t>(k - 1)];
        resmax = std::max(resmax, -con(k));
    }
    con(mp) = f;
    con(mpp) = resmax;
    if (ibrnch == 1) goto L440;

    // Store the values at the new vertex of the initial simplex.
    for (int k = 1; k <= mpp; ++k) datmat(k, jdrop) = con(k);
    if (nfvals > static_cast<std::size_t>(np)) goto L130;

    if (jdrop <= n) {
        if (datmat(mp, np) <= f) {
            x(jdrop) = sim(jdrop, np);
        } else {
            sim(jdrop, np) = x(jdrop);
            for (int k = 1; k <= mpp; ++k) {
                datmat(k, jdrop) = datmat(k, np);
                datmat(k, np) = con(k);
            }
            for (int k = 1; k <= jdrop; ++k) {
                sim(jdrop, k) = -rho;
                temp = 0.0;
                for (int i = k; i <= jdrop; ++i) temp -= simi(i, k);
                simi(jdrop, k) = temp;
            }
        }
    }
    if (nfvals <= static_cast<std::size_t>(n)) {
        jdrop = static_cast<int>(nfvals);
        x(jdrop) += rho;
        goto L40;
    }
L130:
    ibrnch = 1;

    // Identify the optimal vertex of the current simplex.
L140:
    phimin = datmat(mp, np) + parmu * datmat(mpp, np);
    nbest = np;
    for (int j = 1; j <= n; ++j) {
        temp = datmat(mp, j) + parmu * datmat(mpp, j);
        if (temp < phimin) {
            nbest = j;
            phimin = temp;
        } else if (temp == phimin && parmu == 0.0) {
            if (datmat(mpp, j) < datmat(mpp, nbest)) nbest = j;
        }
    }

    // Move the best vertex into pole position.
    if (nbest <= n) {
        for (int i = 1; i <= mpp; ++i) {
            temp = datmat(i, np);
            datmat(i, np) = datmat(i, nbest);
            datmat(i, nbest) = temp;
        }
        for (int i = 1; i <= n; ++i) {
            temp = sim(i, nbest);
            sim(i, nbest) = 0.0;
            sim(i, np) += temp;
            tempa = 0.0;
            for (int k = 1; k <= n; ++k) {
                sim(i, k) -= temp;
                tempa -= simi(k, i);
            }
            simi(nbest, i) = tempa;
        }
    }

    // Give up if simi has drifted from the inverse of sim.
    error = 0.0;
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            temp = (i == j) ? -1.0 : 0.0;
            for (int k = 1; k <= n; ++k) temp += simi(i, k) * sim(k, j);
            error = std::max(error, std::abs(temp));
        }
    }
    if (error > 0.1) {
        result.status = CobylaStatus::rounding_errors;
        goto L600;
    }

    // Linear approximations; minus the objective gradient goes in column mp.
    for (int k = 1; k <= mp; ++k) {
        con(k) = -datmat(k, np);
        for (int j = 1; j <= n; ++j) w(j) = datmat(k, j) + con(k);
        for (int i = 1; i <= n; ++i) {
            temp = 0.0;
            for (int j = 1; j <= n; ++j) temp += w(j) * simi(j, i);
            if (k == mp) temp = -temp;
            a(i, k) = temp;
        }
    }

    // Simplex acceptability.
    iflag = 1;
    parsig = alpha * rho;
    pareta = beta * rho;
    for (int j = 1; j <= n; ++j) {
        wsig = 0.0;
        weta = 0.0;
        for (int i = 1; i <= n; ++i) {
            wsig += sq(simi(j, i));
            weta += sq(sim(i, j));
        }
        vsig(j) = 1.0 / std::sqrt(wsig);
        veta(j) = std::sqrt(weta);
        if (vsig(j) < parsig || veta(j) > pareta) iflag = 0;
    }

    if (ibrnch == 1 || iflag == 1) goto L370;

    // Choose the vertex to drop to improve acceptability.
    jdrop = 0;
    temp = pareta;
    for (int j = 1; j <= n; ++j) {
        if (veta(j) > temp) {
            jdrop = j;
            temp = veta(j);
        }
    }
    if (jdrop == 0) {
        for (int j = 1; j <= n; ++j) {
            if (vsig(j) < temp) {
                jdrop = j;
                temp = vsig(j);
            }
        }
    }

    temp = gamma * rho * vsig(jdrop);
    for (int i = 1; i <= n; ++i) dx(i) = temp * simi(jdrop, i);
    cvmaxp = 0.0;
    cvmaxm = 0.0;
    for (int k = 1; k <= mp; ++k) {
        sum = 0.0;
        for (int i = 1; i <= n; ++i) sum += a(i, k) * dx(i);
        if (k < mp) {
            temp = datmat(k, np);
            cvmaxp = std::max(cvmaxp, -sum - temp);
            cvmaxm = std::max(cvmaxm, sum - temp);
        }
    }
    dxsign = 1.0;
    if (parmu * (cvmaxp - cvmaxm) > sum + sum) dxsign = -1.0;

    temp = 0.0;
    for (int i = 1; i <= n; ++i) {
        dx(i) *= dxsign;
        sim(i, jdrop) = dx(i);
        temp += simi(jdrop, i) * dx(i);
    }
    for (int i = 1; i <= n; ++i) simi(jdrop, i) /= temp;
    for (int j = 1; j <= n; ++j) {
        if (j != jdrop) {
            temp = 0.0;
            for (int i = 1; i <= n; ++i) temp += simi(j, i) * dx(i);
            for (int i = 1; i <= n; ++i) simi(j, i) -= temp * simi(jdrop, i);
        }
        x(j) = sim(j, np) + dx(j);
    }
    goto L40;

    // Trust-region step.
L370:
    ifull = detail::trstlp(n, mi, a, con.ptr(), rho, dx.ptr(), iact, zmat, zdota, vmultc, sdirn,
                           dxnew, vmultd);
    if (ifull == 0) {
        temp = 0.0;
        for (int i = 1; i <= n; ++i) temp += sq(dx(i));
        if (temp < 0.25 * rho * rho) {
            ibrnch = 1;
            goto L550;
        }
    }

    // Predicted change of f and of the maximum constraint violation.
    resnew = 0.0;
    con(mp) = 0.0;
    for (int k = 1; k <= mp; ++k) {
        sum = con(k);
        for (int i = 1; i <= n; ++i) sum -= a(i, k) * dx(i);
        if (k < mp) resnew = std::max(resnew, sum);
    }

    barmu = 0.0;
    prerec = datmat(mpp, np) - resnew;
    if (prerec > 0.0) barmu = sum / prerec;
    if (parmu < 1.5 * barmu) {
        parmu = 2.0 * barmu;
        phi = datmat(mp, np) + parmu * datmat(mpp, np);
        for (int j = 1; j <= n; ++j) {
            temp = datmat(mp, j) + parmu * datmat(mpp, j);
            if (temp < phi) goto L140;
            if (temp == phi && parmu == 0.0) {
                if (datmat(mpp, j) < datmat(mpp, np)) goto L140;
            }
        }
    }
    prerem = parmu * prerec - sum;

    for (int i = 1; i <= n; ++i) x(i) = sim(i, np) + dx(i);
    ibrnch = 1;
    goto L40;

L440:
    vmold = datmat(mp, np) + parmu * datmat(mpp, np);
    vmnew = f + parmu * resmax;
    trured = vmold - vmnew;
    if (parmu == 0.0 && f == datmat(mp, np)) {
        prerem = prerec;
        trured = datmat(mpp, np) - resmax;
    }

    // Decide which vertex, if any, x replaces.
    ratio = (trured <= 0.0) ? 1.0 : 0.0;
    jdrop = 0;
    for (int j = 1; j <= n; ++j) {
        temp = 0.0;
        for (int i = 1; i <= n; ++i) temp += simi(j, i) * dx(i);
        temp = std::abs(temp);
        if (temp > ratio) {
            jdrop = j;
            ratio = temp;
        }
        sigbar(j) = temp * vsig(j);
    }

    edgmax = delta * rho;
    l = 0;
    for (int j = 1; j <= n; ++j) {
        if (sigbar(j) >= parsig || sigbar(j) >= vsig(j)) {
            temp = veta(j);
            if (trured > 0.0) {
                temp = 0.0;
                for (int i = 1; i <= n; ++i) temp += sq(dx(i) - sim(i, j));
                temp = std::sqrt(temp);
            }
            if (temp > edgmax) {
                l = j;
                edgmax = temp;
            }
        }
    }
    if (l > 0) jdrop = l;
    if (jdrop == 0) goto L550;

    temp = 0.0;
    for (int i = 1; i <= n; ++i) {
        sim(i, jdrop) = dx(i);
        temp += simi(jdrop, i) * dx(i);
    }
    for (int i = 1; i <= n; ++i) simi(jdrop, i) /= temp;
    for (int j = 1; j <= n; ++j) {
        if (j != jdrop) {
            temp = 0.0;
            for (int i = 1; i <= n; ++i) temp += simi(j, i) * dx(i);
            for (int i = 1; i <= n; ++i) simi(j, i) -= temp * simi(jdrop, i);
        }
    }
    for (int k = 1; k <= mpp; ++k) datmat(k, jdrop) = con(k);

    if (trured > 0.0 && trured >= 0.1 * prerem) goto L140;
L550:
    if (iflag == 0) {
        ibrnch = 0;
        goto L140;
    }

    // Reduce rho and reset parmu.
    if (rho > options.rhoend) {
        rho *= 0.5;
        if (rho <= 1.5 * options.rhoend) rho = options.rhoend;
        if (parmu > 0.0) {
            denom = 0.0;
            for (int k = 1; k <= mp; ++k) {
                cmin = datmat(k, np);
                cmax = cmin;
                for (int i = 1; i <= n; ++i) {
                    cmin = std::min(cmin, datmat(k, i));
                    cmax = std::max(cmax, datmat(k, i));
                }
                if (k <= mi && cmin < 0.5 * cmax) {
                    temp = std::max(cmax, 0.0) - cmin;
                    denom = (denom <= 0.0) ? temp : std::min(denom, temp);
                }
            }
            if (denom == 0.0) {
                parmu = 0.0;
            } else if (cmax - cmin < parmu * denom) {
                parmu = (cmax - cmin) / denom;
            }
        }
        goto L140;
    }
    result.status = CobylaStatus::converged;

    // Powell returns the last trial point when it was a full step; we always
    // return the best simplex vertex, which is never worse.
L600:
    for (int i = 1; i <= n; ++i) result.x[static_cast<std::size_t>(i - 1)] = sim(i, np);
    result.fx = datmat(mp, np);
    result.max_violation = datmat(mpp, np);
    result.evaluations = nfvals;
    (void)ifull;
    return result;
}

/// Unconstrained convenience overload.
inline CobylaResult cobyla_minimize(const std::function<double(std::span<const double>)>& f,
                                    std::span<const double> x0, const CobylaOptions& options) {
    return cobyla_minimize(
        [&f](std::span<const double> x, std::span<double>) { return f(x); }, x0, 0, options);
}

}  // namespace vqh::opt
