"""Compiled numerical kernels for likelihood evaluation and maximization.

Everything here works on flat numpy arrays prepared by
:class:`p2ptest.likelihood.LikelihoodEvaluator`; the compiled functions are
pure and deterministic.  Day grids are 1-based (index 0 unused) to match the
day convention of the model.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

UPPER_BOX = 1.0 - 1e-9  # open upper edge of the parameter box


@njit(cache=True)
def _expit(x):
    if x >= 0.0:
        z = math.exp(-x)
        return 1.0 / (1.0 + z)
    z = math.exp(x)
    return z / (1.0 + z)


@njit(cache=True)
def full_loglik(
    b,
    p1,
    p2,
    s_days,
    t_unin,
    d_grid,
    case_onset,
    case_slot,
    n_slots,
    slot_unin,
    n_unin_free,
    win_lo,
    win_hi,
    g_pmf,
    d_min,
    kernel,
):
    """Log-likelihood of the transmission model on a prepared dataset.

    Escape probabilities multiply per-day complements of the common-source
    hazard (days 1..s_days) and of each case's infectivity, weighted by the
    probability the case is still infectious at the given lag.  Symptom-free
    persons contribute escape products through day ``t_unin``; each case
    contributes a mixture over its possible infection days
    ``win_lo..win_hi`` weighted by the latent-period pmf.  Returns -inf when
    some case has no infection day with positive probability.
    """
    n_cases = case_onset.shape[0]
    n_lags = kernel.shape[0]
    log1mb = math.log1p(-b)
    nd = d_grid + 1

    # log-escape day profiles: `casual` for members of case-free households,
    # `prof[s]` for members of case-household slot s (self-terms vanish for
    # every day a person could still be susceptible, so one profile per
    # household is exact).
    prof = np.zeros((n_slots, nd))
    casual = np.zeros(nd)
    for c in range(n_cases):
        o = case_onset[c]
        s = case_slot[c]
        for d in range(n_lags):
            t = o + d
            if t > d_grid:
                break
            vd = kernel[d]
            prof[s, t] += math.log1p(-p1 * vd)
            if p2 > 0.0:
                a2 = math.log1p(-p2 * vd)
                prof[s, t] -= a2
                casual[t] += a2
    total = 0.0
    tu = t_unin if t_unin < d_grid else d_grid
    if tu < 0:
        tu = 0
    acc_free = 0.0
    for t in range(1, nd):
        base = casual[t] + (log1mb if t <= s_days else 0.0)
        casual[t] = base
        if t <= tu:
            acc_free += base
    total += n_unin_free * acc_free

    cum = np.empty((n_slots, nd))
    for s in range(n_slots):
        r = 0.0
        cum[s, 0] = 0.0
        for t in range(1, nd):
            le = prof[s, t] + casual[t]
            prof[s, t] = le
            r += le
            cum[s, t] = r
        total += slot_unin[s] * cum[s, tu]

    if n_cases == 0:
        return total

    for c in range(n_cases):
        s = case_slot[c]
        o = case_onset[c]
        lo = win_lo[c]
        hi = win_hi[c]
        if hi < lo:
            return -np.inf
        mx = cum[s, lo - 1]
        for t in range(lo + 1, hi + 1):
            cv = cum[s, t - 1]
            if cv > mx:
                mx = cv
        ssum = 0.0
        for t in range(lo, hi + 1):
            one_minus_e = -math.expm1(prof[s, t])
            if one_minus_e <= 0.0:
                continue
            ssum += (
                g_pmf[o - t - d_min]
                * one_minus_e
                * math.exp(cum[s, t - 1] - mx)
            )
        if ssum <= 0.0:
            return -np.inf
        total += math.log(ssum) + mx
    return total


@njit(cache=True)
def null_loglik(b, n_escape_days, null_ptr, null_gw, null_tm1):
    """Closed-form log-likelihood of the no-transmission model at ``b``.

    Symptom-free persons contribute ``n_escape_days`` factors of (1 - b);
    case c contributes b * sum_w gw (1 - b)^tm1 over its admissible
    common-source infection days (precomputed weight/exponent pairs).
    """
    n_cases = null_ptr.shape[0] - 1
    if b <= 0.0:
        return 0.0 if n_cases == 0 else -np.inf
    if b >= 1.0:
        return -np.inf
    l1mb = math.log1p(-b)
    total = n_escape_days * l1mb
    lb = math.log(b)
    for c in range(n_cases):
        ssum = 0.0
        for w in range(null_ptr[c], null_ptr[c + 1]):
            ssum += null_gw[w] * math.exp(null_tm1[w] * l1mb)
        if ssum <= 0.0:
            return -np.inf
        total += lb + math.log(ssum)
    return total


@njit(cache=True)
def maximize_null(n_escape_days, null_ptr, null_gw, null_tm1, b_tol):
    """Maximize the null log-likelihood over b in [0, UPPER_BOX].

    Coarse log-odds grid scan (robust to the mild non-unimodality the
    mixture terms can introduce) followed by golden-section refinement of
    the bracketing interval.  Returns (b_hat, loglik, n_evals, converged).
    """
    n_cases = null_ptr.shape[0] - 1
    if n_cases == 0:
        # no cases: likelihood nonincreasing in b, maximized at exactly 0
        return 0.0, 0.0, 1, True

    n_grid = 257
    x_lo = -23.0  # b ~ 1e-10
    x_hi = math.log(UPPER_BOX / (1.0 - UPPER_BOX))
    step = (x_hi - x_lo) / (n_grid - 1)
    best_f = -np.inf
    best_i = 0
    n_ev = 0
    for i in range(n_grid):
        f = null_loglik(
            _expit(x_lo + step * i), n_escape_days, null_ptr, null_gw, null_tm1
        )
        n_ev += 1
        if f > best_f:
            best_f = f
            best_i = i
    if best_f == -np.inf:
        return 0.0, -np.inf, n_ev, False

    a = x_lo + step * (best_i - 1) if best_i > 0 else x_lo
    z = x_lo + step * (best_i + 1) if best_i < n_grid - 1 else x_hi
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = z - invphi * (z - a)
    d = a + invphi * (z - a)
    fc = null_loglik(_expit(c), n_escape_days, null_ptr, null_gw, null_tm1)
    fd = null_loglik(_expit(d), n_escape_days, null_ptr, null_gw, null_tm1)
    n_ev += 2
    while (_expit(z) - _expit(a)) > b_tol and (z - a) > 1e-13:
        if fc > fd:
            z = d
            d = c
            fd = fc
            c = z - invphi * (z - a)
            fc = null_loglik(
                _expit(c), n_escape_days, null_ptr, null_gw, null_tm1
            )
        else:
            a = c
            c = d
            fc = fd
            d = a + invphi * (z - a)
            fd = null_loglik(
                _expit(d), n_escape_days, null_ptr, null_gw, null_tm1
            )
        n_ev += 1
    b_hat = _expit(0.5 * (a + z))
    f_hat = null_loglik(b_hat, n_escape_days, null_ptr, null_gw, null_tm1)
    n_ev += 1
    if f_hat < best_f:
        b_hat = _expit(x_lo + step * best_i)
        f_hat = best_f
    return b_hat, f_hat, n_ev, True


@njit(cache=True)
def _neg_loglik_logit(
    x,
    ndim,
    s_days,
    t_unin,
    d_grid,
    case_onset,
    case_slot,
    n_slots,
    slot_unin,
    n_unin_free,
    win_lo,
    win_hi,
    g_pmf,
    d_min,
    kernel,
):
    b = _expit(x[0])
    p1 = _expit(x[1]) if ndim >= 2 else 0.0
    p2 = _expit(x[2]) if ndim >= 3 else 0.0
    if b > UPPER_BOX:
        b = UPPER_BOX
    if p1 > UPPER_BOX:
        p1 = UPPER_BOX
    if p2 > UPPER_BOX:
        p2 = UPPER_BOX
    return -full_loglik(
        b,
        p1,
        p2,
        s_days,
        t_unin,
        d_grid,
        case_onset,
        case_slot,
        n_slots,
        slot_unin,
        n_unin_free,
        win_lo,
        win_hi,
        g_pmf,
        d_min,
        kernel,
    )


@njit(cache=True)
def nelder_mead_fit(
    x0,
    ndim,
    fatol,
    xatol,
    max_evals,
    s_days,
    t_unin,
    d_grid,
    case_onset,
    case_slot,
    n_slots,
    slot_unin,
    n_unin_free,
    win_lo,
    win_hi,
    g_pmf,
    d_min,
    kernel,
):
    """Nelder-Mead minimization of -loglik over log-odds coordinates.

    ``x0`` has 3 entries; only the first ``ndim`` are optimized (remaining
    transmission probabilities are fixed at 0).  Returns
    (x_best, f_best, n_evals, converged).
    """
    n = ndim
    simplex = np.empty((n + 1, 3))
    fvals = np.empty(n + 1)
    for i in range(n + 1):
        for j in range(3):
            simplex[i, j] = x0[j]
        if i > 0:
            simplex[i, i - 1] += 0.75
    n_ev = 0
    for i in range(n + 1):
        fvals[i] = _neg_loglik_logit(
            simplex[i], ndim, s_days, t_unin, d_grid, case_onset, case_slot,
            n_slots, slot_unin, n_unin_free, win_lo, win_hi, g_pmf, d_min,
            kernel,
        )
        n_ev += 1

    converged = False
    while n_ev < max_evals:
        order = np.argsort(fvals)
        sim = simplex[order].copy()
        fv = fvals[order].copy()
        simplex = sim
        fvals = fv

        fspread = fvals[n] - fvals[0]
        xspread = 0.0
        for i in range(1, n + 1):
            for j in range(n):
                d = abs(simplex[i, j] - simplex[0, j])
                if d > xspread:
                    xspread = d
        if fspread <= fatol and xspread <= xatol:
            converged = True
            break

        centroid = np.zeros(3)
        for i in range(n):
            for j in range(3):
                centroid[j] += simplex[i, j] / n

        xr = np.empty(3)
        for j in range(3):
            xr[j] = centroid[j] + (centroid[j] - simplex[n, j])
        fr = _neg_loglik_logit(
            xr, ndim, s_days, t_unin, d_grid, case_onset, case_slot, n_slots,
            slot_unin, n_unin_free, win_lo, win_hi, g_pmf, d_min, kernel,
        )
        n_ev += 1

        if fr < fvals[0]:
            xe = np.empty(3)
            for j in range(3):
                xe[j] = centroid[j] + 2.0 * (centroid[j] - simplex[n, j])
            fe = _neg_loglik_logit(
                xe, ndim, s_days, t_unin, d_grid, case_onset, case_slot,
                n_slots, slot_unin, n_unin_free, win_lo, win_hi, g_pmf,
                d_min, kernel,
            )
            n_ev += 1
            if fe < fr:
                simplex[n] = xe
                fvals[n] = fe
            else:
                simplex[n] = xr
                fvals[n] = fr
            continue
        if fr < fvals[n - 1]:
            simplex[n] = xr
            fvals[n] = fr
            continue

        # contraction (outside when the reflection helped, inside otherwise)
        xc = np.empty(3)
        if fr < fvals[n]:
            for j in range(3):
                xc[j] = centroid[j] + 0.5 * (xr[j] - centroid[j])
        else:
            for j in range(3):
                xc[j] = centroid[j] + 0.5 * (simplex[n, j] - centroid[j])
        fc = _neg_loglik_logit(
            xc, ndim, s_days, t_unin, d_grid, case_onset, case_slot, n_slots,
            slot_unin, n_unin_free, win_lo, win_hi, g_pmf, d_min, kernel,
        )
        n_ev += 1
        if fc < min(fr, fvals[n]):
            simplex[n] = xc
            fvals[n] = fc
            continue

        # shrink toward the best vertex
        for i in range(1, n + 1):
            for j in range(3):
                simplex[i, j] = simplex[0, j] + 0.5 * (
                    simplex[i, j] - simplex[0, j]
                )
            fvals[i] = _neg_loglik_logit(
                simplex[i], ndim, s_days, t_unin, d_grid, case_onset,
                case_slot, n_slots, slot_unin, n_unin_free, win_lo, win_hi,
                g_pmf, d_min, kernel,
            )
            n_ev += 1

    order = np.argsort(fvals)
    xbest = simplex[order[0]].copy()
    return xbest, fvals[order[0]], n_ev, converged
