# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; see ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, pow, M_PI, INFINITY

cnp.import_array()


cdef inline Py_ssize_t _cat(const double[:] row, double u) nogil:
    cdef Py_ssize_t n = row.shape[0]
    cdef Py_ssize_t j = 0
    while j < n - 1 and u >= row[j]:
        j += 1
    return j


def sample_chain(const double[:, :] cum, Py_ssize_t x0, const double[:] u):
    cdef Py_ssize_t n = u.shape[0] + 1
    xs_arr = np.empty(n, dtype=np.int64)
    cdef long long[:] xs = xs_arr
    cdef Py_ssize_t x = x0, k
    xs[0] = x
    with nogil:
        for k in range(n - 1):
            x = _cat(cum[x], u[k])
            xs[k + 1] = x
    return xs_arr


def sample_mdp(const double[:, :, :] cum_p, const double[:, :] cum_theta,
               Py_ssize_t x0, const double[:] ux, const double[:] uu):
    cdef Py_ssize_t n = uu.shape[0]
    xs_arr = np.empty(n, dtype=np.int64)
    us_arr = np.empty(n, dtype=np.int64)
    cdef long long[:] xs = xs_arr
    cdef long long[:] us = us_arr
    cdef Py_ssize_t x = x0, a, k
    with nogil:
        a = _cat(cum_theta[x], uu[0])
        xs[0] = x
        us[0] = a
        for k in range(n - 1):
            x = _cat(cum_p[a, x], ux[k])
            a = _cat(cum_theta[x], uu[k + 1])
            xs[k + 1] = x
            us[k + 1] = a
    return xs_arr, us_arr


def score_accumulate(const long long[:] xs, const long long[:] us,
                     const double[:, :] cost, const double[:, :, :] inc, double beta):
    cdef Py_ssize_t X = cost.shape[0], K = inc.shape[2], n = xs.shape[0]
    S_arr = np.zeros((X, K))
    acc_arr = np.zeros((X, K))
    cdef double[:, :] S = S_arr
    cdef double[:, :] acc = acc_arr
    cdef Py_ssize_t k, i, j, x, a
    cdef double ck
    with nogil:
        for k in range(1, n):
            x = xs[k]
            a = us[k]
            if beta != 1.0:
                for i in range(X):
                    for j in range(K):
                        S[i, j] = S[i, j] * beta
            for j in range(K):
                S[x, j] = S[x, j] + inc[x, a, j]
            ck = cost[x, a]
            for i in range(X):
                for j in range(K):
                    acc[i, j] = acc[i, j] + ck * S[i, j]
        if n > 1:
            for i in range(X):
                for j in range(K):
                    acc[i, j] = acc[i, j] / <double>(n - 1)
    return acc_arr


def wd_mdp_coupled(const double[:, :, :] cum_p, const double[:, :] cum_theta,
                   const double[:, :] cost, const long long[:] xs, const long long[:] us,
                   const double[:] ux, const double[:] uu,
                   const long long[:] comp_x, const long long[:] comp_a,
                   const double[:, :] branch_cum, const double[:, :] ub, Py_ssize_t m):
    cdef Py_ssize_t n = xs.shape[0], C = comp_x.shape[0]
    sums_arr = np.zeros(C)
    sumsq_arr = np.zeros(C)
    counts_arr = np.zeros(C, dtype=np.int64)
    trunc_arr = np.zeros(C, dtype=np.int64)
    cdef double[:] sums = sums_arr
    cdef double[:] sumsq = sumsq_arr
    cdef long long[:] counts = counts_arr
    cdef long long[:] trunc = trunc_arr
    cdef Py_ssize_t c, x, a, r, k, ud, yx, yu, j
    cdef double s
    cdef bint coupled
    with nogil:
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
    return sums_arr, sumsq_arr, counts_arr, trunc_arr


def wd_chain(const double[:, :] cum_p, const double[:, :] cum_dot, const double[:, :] cum_ddot,
             const double[:] g, const double[:] c, const long long[:] x0s,
             const double[:, :] ub, const double[:, :] u, Py_ssize_t m, Py_ssize_t N):
    cdef Py_ssize_t R = x0s.shape[0]
    vals_arr = np.zeros(R)
    trunc_arr = np.zeros(R, dtype=np.int64)
    cdef double[:] vals = vals_arr
    cdef long long[:] trunc = trunc_arr
    cdef Py_ssize_t r, x, k, a, b, j
    cdef double s
    with nogil:
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
    return vals_arr, trunc_arr


def wd_free(const long long[:] xs, const long long[:] us, const double[:, :] cost,
            const long long[:] comp_x, const long long[:] comp_a,
            const double[:, :] branch_cum, const double[:, :] ub, double c_hat):
    cdef Py_ssize_t n = xs.shape[0], C = comp_x.shape[0]
    sums_arr = np.zeros(C)
    sumsq_arr = np.zeros(C)
    counts_arr = np.zeros(C, dtype=np.int64)
    dropped_arr = np.zeros(C, dtype=np.int64)
    cdef double[:] sums = sums_arr
    cdef double[:] sumsq = sumsq_arr
    cdef long long[:] counts = counts_arr
    cdef long long[:] dropped = dropped_arr
    cdef Py_ssize_t c, x, a, r, k, ud, j
    cdef double s
    with nogil:
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
    return sums_arr, sumsq_arr, counts_arr, dropped_arr


def qlearn(const double[:, :, :] cum_p, const double[:, :] cost, double rho, double eps,
           Py_ssize_t x0, Py_ssize_t interval, double explore, const double[:, :] u,
           const double[:, :] M, lam_in):
    cdef Py_ssize_t U = cum_p.shape[0], X = cum_p.shape[1], L = M.shape[1], n = u.shape[0]
    Q_arr = np.zeros((X, U))
    counts_arr = np.zeros((X, U), dtype=np.int64)
    policy_arr = np.zeros(X, dtype=np.int64)
    lam_arr = np.array(lam_in, dtype=np.float64, copy=True)
    qm_arr = np.zeros(L)
    cdef double[:, :] Q = Q_arr
    cdef long long[:, :] counts = counts_arr
    cdef long long[:] policy = policy_arr
    cdef double[:] lam = lam_arr
    cdef double[:] qm = qm_arr
    cdef Py_ssize_t x = x0, t, i, b, a, x2, l, best
    cdef double ek, qmin, f, v, pen
    with nogil:
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
                a = <Py_ssize_t>(u[t, 1] * U)
                if a > U - 1:
                    a = U - 1
            x2 = _cat(cum_p[a, x], u[t, 2])
            counts[x, a] += 1
            ek = eps / <double>counts[x, a]
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
                    v = lam[l] - ek * qm[l]
                    lam[l] = v if v > 0.0 else 0.0
            x = x2
    return Q_arr, counts_arr, lam_arr


cdef inline Py_ssize_t _argmax_ll(long long[:] v) nogil:
    cdef Py_ssize_t best = 0, i
    for i in range(1, v.shape[0]):
        if v[i] > v[best]:
            best = i
    return best


cdef inline Py_ssize_t _argmax_d(double[:] v) nogil:
    cdef Py_ssize_t best = 0, i
    for i in range(1, v.shape[0]):
        if v[i] > v[best]:
            best = i
    return best


def as_run(const double[:] lo, const double[:] hi, Py_ssize_t n_steps, bint decreasing,
           double mu, double gamma0, double gamma_exp, const double[:, :] u,
           const long long[:] checkpoints):
    cdef Py_ssize_t S = lo.shape[0], K = checkpoints.shape[0]
    phi_arr = np.zeros(S)
    b_arr = np.zeros(S)
    cb_arr = np.zeros(S)
    effort_arr = np.zeros(S, dtype=np.int64)
    est_arr = np.full(K, -1, dtype=np.int64)
    cdef double[:] phi = phi_arr
    cdef double[:] b = b_arr
    cdef double[:] cb = cb_arr
    cdef long long[:] effort = effort_arr
    cdef long long[:] est = est_arr
    cdef Py_ssize_t ci = 0, n, i, th
    cdef double gam, pmin, tot, acc, v, cost, step
    with nogil:
        for n in range(1, n_steps + 1):
            gam = gamma0 / pow(<double>n, gamma_exp)
            pmin = phi[0]
            for i in range(1, S):
                if phi[i] < pmin:
                    pmin = phi[i]
            tot = 0.0
            for i in range(S):
                b[i] = exp(-(phi[i] - pmin) / gam)
                tot += b[i]
            acc = 0.0
            for i in range(S):
                b[i] = b[i] / tot
                acc += b[i]
                cb[i] = acc
            th = _cat(cb, u[n - 1, 0])
            v = u[n - 1, 1]
            cost = -1.0 if (lo[th] <= v and v < hi[th]) else 0.0
            step = 1.0 / <double>n if decreasing else mu
            for i in range(S):
                phi[i] -= step * phi[i]
            phi[th] += step * cost / b[th]
            effort[th] += 1
            while ci < K and checkpoints[ci] <= n:
                est[ci] = _argmax_ll(effort)
                ci += 1
    return est_arr, effort_arr


def rs_run(const double[:] lo, const double[:] hi, Py_ssize_t n_sims, bint decreasing,
           double mu, Py_ssize_t theta0, const double[:, :] u, const long long[:] checkpoints):
    cdef Py_ssize_t S = lo.shape[0], K = checkpoints.shape[0]
    occ_arr = np.zeros(S)
    effort_arr = np.zeros(S, dtype=np.int64)
    est_arr = np.full(K, -1, dtype=np.int64)
    cdef double[:] occ = occ_arr
    cdef long long[:] effort = effort_arr
    cdef long long[:] est = est_arr
    cdef Py_ssize_t ci = 0, cur = theta0, sims = 0, it = 0, cand, i
    cdef double v1, v2, c_cur, c_cand, step
    occ[theta0] = 1.0
    with nogil:
        while sims < n_sims:
            cand = <Py_ssize_t>(u[it, 0] * (S - 1))
            if cand > S - 2:
                cand = S - 2
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
            step = 1.0 / <double>(it + 1) if decreasing else mu
            for i in range(S):
                occ[i] -= step * occ[i]
            occ[cur] += step
            while ci < K and checkpoints[ci] <= sims:
                est[ci] = _argmax_d(occ)
                ci += 1
    return est_arr, effort_arr, occ_arr


def ucb_run(const double[:] lo, const double[:] hi, Py_ssize_t n_sims, double disc,
            double xi, double bound, const double[:] u, const long long[:] checkpoints):
    cdef Py_ssize_t S = lo.shape[0], K = checkpoints.shape[0]
    s_arr = np.zeros(S)
    m_arr = np.zeros(S)
    chat_arr = np.zeros(S)
    effort_arr = np.zeros(S, dtype=np.int64)
    est_arr = np.full(K, -1, dtype=np.int64)
    cdef double[:] s = s_arr
    cdef double[:] m = m_arr
    cdef double[:] chat = chat_arr
    cdef long long[:] effort = effort_arr
    cdef long long[:] est = est_arr
    cdef Py_ssize_t ci = 0, t, th, i
    cdef double tot, best, val, v, pay
    with nogil:
        for t in range(n_sims):
            if t < S:
                th = t
            else:
                tot = 0.0
                for i in range(S):
                    tot += m[i]
                th = 0
                best = -INFINITY
                for i in range(S):
                    val = chat[i] + bound * sqrt(xi * log(tot + 1.0) / m[i])
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
                est[ci] = _argmax_d(chat)
                ci += 1
    return est_arr, effort_arr, chat_arr, m_arr


def population_affine(counts0, const double[:, :, :] base, const double[:, :, :, :] slopes,
                      const long long[:] psi, const double[:, :] u):
    counts_arr = np.array(counts0, dtype=np.int64, copy=True)
    cdef long long[:] counts = counts_arr
    cdef Py_ssize_t L = counts.shape[0], n = u.shape[0]
    cdef long long M = 0
    cdef Py_ssize_t l, k, e, i, j
    for l in range(L):
        M += counts[l]
    traj_arr = np.empty((n + 1, L))
    row_arr = np.zeros(L)
    cdef double[:, :] traj = traj_arr
    cdef double[:] row = row_arr
    cdef double r, tot, p
    cdef long long acc
    with nogil:
        for l in range(L):
            traj[0, l] = <double>counts[l] / <double>M
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
                    p += (<double>counts[l] / <double>M) * slopes[e, l, i, j]
                tot += p
                row[j] = tot
            j = _cat(row, u[k, 1])
            counts[i] -= 1
            counts[j] += 1
            for l in range(L):
                traj[k + 1, l] = <double>counts[l] / <double>M
    return traj_arr


def lms_run(const double[:, :] phi, const double[:] y, const double[:, :] truth,
            double mu, theta0):
    cdef Py_ssize_t n = phi.shape[0], d = phi.shape[1], k, i
    th_arr = np.array(theta0, dtype=np.float64, copy=True)
    err_arr = np.empty(n)
    cdef double[:] th = th_arr
    cdef double[:] err = err_arr
    cdef double innov, e2, diff
    with nogil:
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
    return th_arr, err_arr


cdef inline double _gauss(double y, double mean, double sd) nogil:
    cdef double z = (y - mean) / sd
    return exp(-0.5 * z * z) / (sd * sqrt(2.0 * M_PI))


def hmm_loglik(const double[:] y, const double[:, :] P, const double[:] means,
               const double[:] sigma):
    cdef Py_ssize_t X = P.shape[0], k, i, j
    pi_arr = np.full(X, 1.0 / X)
    q_arr = np.zeros(X)
    cdef double[:] pi = pi_arr
    cdef double[:] q = q_arr
    cdef double ll = 0.0, d, v
    for k in range(y.shape[0]):
        d = 0.0
        for i in range(X):
            q[i] = _gauss(y[k], means[i], sigma[i]) * pi[i]
            d += q[i]
        if d <= 0.0:
            raise FloatingPointError(f"zero likelihood at step {k}")
        ll += log(d)
        for j in range(X):
            v = 0.0
            for i in range(X):
                v += P[i, j] * q[i]
            pi[j] = v / d
    return ll


def rmle_gauss_exp(const double[:] y, psi0, sigma0, const double[:] means,
                   double eps, double lo, double hi):
    psi_arr = np.array(psi0, dtype=np.float64, copy=True)
    sigma_arr = np.array(sigma0, dtype=np.float64, copy=True)
    cdef double[:, :] psi = psi_arr
    cdef double[:] sigma = sigma_arr
    cdef Py_ssize_t X = psi.shape[0]
    cdef Py_ssize_t p = X * X + X
    pi_arr = np.full(X, 1.0 / X)
    cdef double[:] pi = pi_arr
    cdef double[:, :] w = np.zeros((X, p))
    cdef double[:, :] wn = np.zeros((X, p))
    cdef double[:, :] P = np.zeros((X, X))
    cdef double[:] b = np.zeros(X)
    cdef double[:] db = np.zeros(X)
    cdef double[:] q = np.zeros(X)
    cdef double[:] v = np.zeros(X)
    cdef double[:] score = np.zeros(p)
    cdef double ll = 0.0, mx, tot, d, z, sg, s1, acc, dpj, s
    cdef Py_ssize_t k, i, j, l, r, c
    for k in range(y.shape[0]):
        for i in range(X):
            mx = psi[i, 0]
            for j in range(1, X):
                if psi[i, j] > mx:
                    mx = psi[i, j]
            tot = 0.0
            for j in range(X):
                P[i, j] = exp(psi[i, j] - mx)
                tot += P[i, j]
            for j in range(X):
                P[i, j] = P[i, j] / tot
        d = 0.0
        for i in range(X):
            b[i] = _gauss(y[k], means[i], sigma[i])
            z = y[k] - means[i]
            sg = sigma[i]
            db[i] = b[i] * (z * z / (sg * sg * sg) - 1.0 / sg)
            d += b[i] * pi[i]
        if d <= 0.0:
            raise FloatingPointError(f"zero likelihood at step {k}")
        ll += log(d)
        for i in range(X):
            q[i] = b[i] * pi[i] / d
        for l in range(p):
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
            if s < lo:
                s = lo
            if s > hi:
                s = hi
            sigma[i] = s
    return psi_arr, sigma_arr, ll
