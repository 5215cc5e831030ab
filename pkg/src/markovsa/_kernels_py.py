"""Pure-Python reference kernels.

Every function here has a twin with the same signature in the compiled
``_kernels`` extension. Both consume the same pre-drawn uniforms, so their
outputs agree bit for bit; the parity tests rely on that.

Conventions shared by all kernels:

* ``cum`` arrays hold row-wise cumulative sums of probability rows.
* A categorical draw returns the first index whose cumulative weight
  exceeds the uniform; the last index absorbs rounding slack.
* Augmented states ``(x, u)`` are addressed as ``x * U + u``.
"""
import math

import numpy as np


def _cat(row, u):
    n = row.shape[0]
    j = 0
    while j < n - 1 and u >= row[j]:
        j += 1
    return j


def sample_chain(cum, x0, u):
    n = u.shape[0] + 1
    xs = np.empty(n, dtype=np.int64)
    x = int(x0)
    xs[0] = x
    for k in range(n - 1):
        x = _cat(cum[x], u[k])
        xs[k + 1] = x
    return xs


def sample_mdp(cum_p, cum_theta, x0, ux, uu):
    n = uu.shape[0]
    xs = np.empty(n, dtype=np.int64)
    us = np.empty(n, dtype=np.int64)
    x = int(x0)
    a = _cat(cum_theta[x], uu[0])
    xs[0] = x
    us[0] = a
    for k in range(n - 1):
        x = _cat(cum_p[a, x], ux[k])
        a = _cat(cum_theta[x], uu[k + 1])
        xs[k + 1] = x
        us[k + 1] = a
    return xs, us


def score_accumulate(xs, us, cost, inc, beta):
    """Mean of c(z_k) * S_k over k = 1..n-1 with S_k = inc(z_k) + beta S_{k-1}."""
    X = cost.shape[0]
    K = inc.shape[2]
    S = np.zeros((X, K))
    acc = np.zeros((X, K))
    n = xs.shape[0]
    for k in range(1, n):
        x = xs[k]
        a = us[k]
        if beta != 1.0:
            S *= beta
        S[x, :] += inc[x, a, :]
        acc += cost[x, a] * S
    if n > 1:
        acc /= n - 1
    return acc


def wd_mdp_coupled(cum_p, cum_theta, cost, xs, us, ux, uu,
                   comp_x, comp_a, branch_cum, ub, m):
    n = xs.shape[0]
    C = comp_x.shape[0]
    sums = np.zeros(C)
    sumsq = np.zeros(C)
    counts = np.zeros(C, dtype=np.int64)
    trunc = np.zeros(C, dtype=np.int64)
    for c in range(C):
        x = comp_x[c]
        a = comp_a[c]
        r = 0
        k = m
        while k < n:
            if xs[k] != x or us[k] != a:
                k += 1
                continue
            ud = _cat(branch_cum[c], ub[c, r])
            r += 1
            yx = x
            yu = ud
            s = cost[x, a] - cost[x, ud]
            j = k
            coupled = False
            while j < n - 1:
                yx = _cat(cum_p[yu, yx], ux[j])
                yu = _cat(cum_theta[yx], uu[j + 1])
                j += 1
                if yx == xs[j] and yu == us[j]:
                    coupled = True
                    break
                s += cost[xs[j], us[j]] - cost[yx, yu]
            sums[c] += s
            sumsq[c] += s * s
            counts[c] += 1
            if coupled:
                k = j
            else:
                trunc[c] += 1
                k = n
    return sums, sumsq, counts, trunc


def wd_chain(cum_p, cum_dot, cum_ddot, g, c, x0s, ub, u, m, N):
    R = x0s.shape[0]
    vals = np.zeros(R)
    trunc = np.zeros(R, dtype=np.int64)
    for r in range(R):
        x = x0s[r]
        for k in range(m - 1):
            x = _cat(cum_p[x], u[r, k])
        a = _cat(cum_dot[x], ub[r, 0])
        b = _cat(cum_ddot[x], ub[r, 1])
        s = c[a] - c[b]
        j = m - 1
        while a != b and j < N - 1:
            a = _cat(cum_p[a], u[r, j])
            b = _cat(cum_p[b], u[r, j])
            j += 1
            s += c[a] - c[b]
        if a != b:
            trunc[r] = 1
        vals[r] = g[x] * s
    return vals, trunc


def wd_free(xs, us, cost, comp_x, comp_a, branch_cum, ub, c_hat):
    n = xs.shape[0]
    C = comp_x.shape[0]
    sums = np.zeros(C)
    sumsq = np.zeros(C)
    counts = np.zeros(C, dtype=np.int64)
    dropped = np.zeros(C, dtype=np.int64)
    for c in range(C):
        x = comp_x[c]
        a = comp_a[c]
        r = 0
        k = 0
        while k < n:
            if xs[k] != x or us[k] != a:
                k += 1
                continue
            ud = _cat(branch_cum[c], ub[c, r])
            r += 1
            s = cost[x, a]
            j = k + 1
            while j < n and not (xs[j] == x and us[j] == ud):
                s += cost[xs[j], us[j]]
                j += 1
            if j == n:
                dropped[c] += 1
                k += 1
                continue
            s -= (j - k) * c_hat
            sums[c] += s
            sumsq[c] += s * s
            counts[c] += 1
            k = j
    return sums, sumsq, counts, dropped


def qlearn(cum_p, cost, rho, eps, x0, interval, explore, u, M, lam):
    U = cum_p.shape[0]
    X = cum_p.shape[1]
    L = M.shape[1]
    Q = np.zeros((X, U))
    counts = np.zeros((X, U), dtype=np.int64)
    policy = np.zeros(X, dtype=np.int64)
    lam = lam.copy()
    qm = np.zeros(L)
    x = int(x0)
    n = u.shape[0]
    for t in range(n):
        if t > 0 and t % interval == 0:
            for i in range(X):
                best = 0
                for b in range(1, U):
                    if Q[i, b] < Q[i, best]:
                        best = b
                policy[i] = best
        a = policy[x]
        if u[t, 0] < explore:
            a = min(int(u[t, 1] * U), U - 1)
        x2 = _cat(cum_p[a, x], u[t, 2])
        counts[x, a] += 1
        ek = eps / counts[x, a]
        qmin = Q[x2, 0]
        for b in range(1, U):
            if Q[x2, b] < qmin:
                qmin = Q[x2, b]
        f = cost[x, a] + rho * qmin - Q[x, a]
        if L > 0:
            for l in range(L):
                v = 0.0
                for i in range(X):
                    for b in range(U):
                        v += Q[i, b] * M[i * U + b, l]
                qm[l] = v
            pen = 0.0
            for l in range(L):
                pen += M[x * U + a, l] * lam[l]
            f = f + pen
        Q[x, a] += ek * f
        if L > 0:
            for l in range(L):
                lam[l] = max(lam[l] - ek * qm[l], 0.0)
        x = x2
    return Q, counts, lam


def as_run(lo, hi, n_steps, decreasing, mu, gamma0, gamma_exp, u, checkpoints):
    S = lo.shape[0]
    phi = np.zeros(S)
    b = np.zeros(S)
    cb = np.zeros(S)
    effort = np.zeros(S, dtype=np.int64)
    K = checkpoints.shape[0]
    est = np.full(K, -1, dtype=np.int64)
    ci = 0
    for n in range(1, n_steps + 1):
        gam = gamma0 / n ** gamma_exp
        pmin = phi.min()
        tot = 0.0
        for i in range(S):
            b[i] = math.exp(-(phi[i] - pmin) / gam)
            tot += b[i]
        acc = 0.0
        for i in range(S):
            b[i] /= tot
            acc += b[i]
            cb[i] = acc
        th = _cat(cb, u[n - 1, 0])
        v = u[n - 1, 1]
        cost = -1.0 if (lo[th] <= v and v < hi[th]) else 0.0
        step = 1.0 / n if decreasing else mu
        for i in range(S):
            phi[i] -= step * phi[i]
        phi[th] += step * cost / b[th]
        effort[th] += 1
        while ci < K and checkpoints[ci] <= n:
            est[ci] = _argmax_int(effort)
            ci += 1
    return est, effort


def _argmax_int(v):
    best = 0
    for i in range(1, v.shape[0]):
        if v[i] > v[best]:
            best = i
    return best


def rs_run(lo, hi, n_sims, decreasing, mu, theta0, u, checkpoints):
    S = lo.shape[0]
    occ = np.zeros(S)
    occ[theta0] = 1.0
    effort = np.zeros(S, dtype=np.int64)
    K = checkpoints.shape[0]
    est = np.full(K, -1, dtype=np.int64)
    ci = 0
    cur = int(theta0)
    sims = 0
    it = 0
    while sims < n_sims:
        cand = min(int(u[it, 0] * (S - 1)), S - 2)
        if cand >= cur:
            cand += 1
        v1 = u[it, 1]
        v2 = u[it, 2]
        c_cur = -1.0 if (lo[cur] <= v1 and v1 < hi[cur]) else 0.0
        c_cand = -1.0 if (lo[cand] <= v2 and v2 < hi[cand]) else 0.0
        effort[cur] += 1
        effort[cand] += 1
        sims += 2
        it += 1
        if c_cand < c_cur:
            cur = cand
        step = 1.0 / (it + 1) if decreasing else mu
        for i in range(S):
            occ[i] -= step * occ[i]
        occ[cur] += step
        while ci < K and checkpoints[ci] <= sims:
            est[ci] = _argmax_float(occ)
            ci += 1
    return est, effort, occ


def _argmax_float(v):
    best = 0
    for i in range(1, v.shape[0]):
        if v[i] > v[best]:
            best = i
    return best


def ucb_run(lo, hi, n_sims, disc, xi, bound, u, checkpoints):
    S = lo.shape[0]
    s = np.zeros(S)
    m = np.zeros(S)
    chat = np.zeros(S)
    effort = np.zeros(S, dtype=np.int64)
    K = checkpoints.shape[0]
    est = np.full(K, -1, dtype=np.int64)
    ci = 0
    for t in range(n_sims):
        if t < S:
            th = t
        else:
            tot = 0.0
            for i in range(S):
                tot += m[i]
            th = 0
            best = -math.inf
            for i in range(S):
                val = chat[i] + bound * math.sqrt(xi * math.log(tot + 1.0) / m[i])
                if val > best:
                    best = val
                    th = i
        v = u[t]
        pay = 1.0 if (lo[th] <= v and v < hi[th]) else 0.0
        if t >= S:
            for i in range(S):
                s[i] *= disc
                m[i] *= disc
        s[th] += pay
        m[th] += 1.0
        effort[th] += 1
        for i in range(S):
            if m[i] > 0:
                chat[i] = s[i] / m[i]
        while ci < K and checkpoints[ci] <= t + 1:
            est[ci] = _argmax_float(chat)
            ci += 1
    return est, effort, chat, m


def population_affine(counts0, base, slopes, psi, u):
    L = counts0.shape[0]
    n = u.shape[0]
    counts = counts0.copy()
    M = int(counts.sum())
    traj = np.empty((n + 1, L))
    row = np.zeros(L)
    for l in range(L):
        traj[0, l] = counts[l] / M
    for k in range(n):
        e = psi[k]
        r = u[k, 0] * M
        acc = 0
        i = L - 1
        for l in range(L):
            acc += counts[l]
            if r < acc:
                i = l
                break
        tot = 0.0
        for j in range(L):
            p = base[e, i, j]
            for l in range(L):
                p += (counts[l] / M) * slopes[e, l, i, j]
            tot += p
            row[j] = tot
        j = _cat(row, u[k, 1])
        counts[i] -= 1
        counts[j] += 1
        for l in range(L):
            traj[k + 1, l] = counts[l] / M
    return traj


def lms_run(phi, y, truth, mu, theta0):
    n, d = phi.shape
    th = theta0.copy()
    err = np.empty(n)
    for k in range(n):
        innov = y[k]
        for i in range(d):
            innov -= phi[k, i] * th[i]
        e2 = 0.0
        for i in range(d):
            th[i] += mu * phi[k, i] * innov
            diff = th[i] - truth[k, i]
            e2 += diff * diff
        err[k] = e2
    return th, err


def _gauss(y, mean, sd):
    z = (y - mean) / sd
    return math.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))


def hmm_loglik(y, P, means, sigma):
    X = P.shape[0]
    pi = np.full(X, 1.0 / X)
    q = np.zeros(X)
    ll = 0.0
    for k in range(y.shape[0]):
        d = 0.0
        for i in range(X):
            q[i] = _gauss(y[k], means[i], sigma[i]) * pi[i]
            d += q[i]
        if d <= 0.0:
            raise FloatingPointError(f"zero likelihood at step {k}")
        ll += math.log(d)
        for j in range(X):
            v = 0.0
            for i in range(X):
                v += P[i, j] * q[i]
            pi[j] = v / d
    return ll


def rmle_gauss_exp(y, psi0, sigma0, means, eps, lo, hi):
    X = psi0.shape[0]
    p = X * X + X
    psi = psi0.copy()
    sigma = sigma0.copy()
    pi = np.full(X, 1.0 / X)
    w = np.zeros((X, p))
    P = np.zeros((X, X))
    b = np.zeros(X)
    db = np.zeros(X)
    q = np.zeros(X)
    v = np.zeros(X)
    score = np.zeros(p)
    wn = np.zeros((X, p))
    ll = 0.0
    for k in range(y.shape[0]):
        for i in range(X):
            mx = psi[i, 0]
            for j in range(1, X):
                if psi[i, j] > mx:
                    mx = psi[i, j]
            tot = 0.0
            for j in range(X):
                P[i, j] = math.exp(psi[i, j] - mx)
                tot += P[i, j]
            for j in range(X):
                P[i, j] /= tot
        d = 0.0
        for i in range(X):
            b[i] = _gauss(y[k], means[i], sigma[i])
            z = y[k] - means[i]
            sg = sigma[i]
            db[i] = b[i] * (z * z / (sg * sg * sg) - 1.0 / sg)
            d += b[i] * pi[i]
        if d <= 0.0:
            raise FloatingPointError(f"zero likelihood at step {k}")
        ll += math.log(d)
        for i in range(X):
            q[i] = b[i] * pi[i] / d
        for l in range(p):
            # v = (B w_l + dB_l pi) / d
            s1 = 0.0
            for i in range(X):
                v[i] = b[i] * w[i, l] / d
                if l >= X * X and i == l - X * X:
                    v[i] += db[i] * pi[i] / d
                s1 += v[i]
            score[l] = s1
            for j in range(X):
                acc = 0.0
                for i in range(X):
                    acc += P[i, j] * (v[i] - q[i] * s1)
                wn[j, l] = acc
            if l < X * X:
                r = l // X
                c = l % X
                for j in range(X):
                    dpj = P[r, c] * ((1.0 if j == c else 0.0) - P[r, j])
                    wn[j, l] += q[r] * dpj
        for j in range(X):
            acc = 0.0
            for i in range(X):
                acc += P[i, j] * q[i]
            pi[j] = acc
        for j in range(X):
            for l in range(p):
                w[j, l] = wn[j, l]
        for l in range(X * X):
            psi[l // X, l % X] += eps * score[l]
        for i in range(X):
            s = sigma[i] + eps * score[X * X + i]
            sigma[i] = min(max(s, lo), hi)
    return psi, sigma, ll
