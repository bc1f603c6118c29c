"""Numba-compiled twins of the kernels in _kernels_numpy (same contracts).

Loop-level implementations of the factored step exponential; see the
numpy module for the derivation. All kernels are cache-compiled.
"""
import cmath
import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * np.pi


@njit(cache=True)
def _apply_dense(M, v, out):
    n = M.shape[0]
    for r in range(n):
        acc = 0.0 + 0.0j
        for c in range(n):
            acc += M[r, c] * v[c]
        out[r] = acc


@njit(cache=True)
def _apply_site(U, v, out, L, stride, N):
    """out = (I kron U kron I) v, U acting on the axis with this stride."""
    block = L * stride
    for base in range(0, N, block):
        for inner in range(stride):
            off = base + inner
            for r in range(L):
                acc = 0.0 + 0.0j
                for c in range(L):
                    acc += U[r, c] * v[off + c * stride]
                out[off + r * stride] = acc


@njit(cache=True)
def _apply_all_sites(mats, v, scratch, L, n_q, N):
    """In-place application of kron of all per-site matrices to v."""
    cur = v
    other = scratch
    stride = 1
    for q in range(n_q):
        _apply_site(mats[q], cur, other, L, stride, N)
        cur, other = other, cur
        stride *= L
    if n_q % 2 == 1:  # result currently lives in the scratch buffer
        for i in range(N):
            v[i] = cur[i]


@njit(cache=True)
def _dressed_phase_apply(W, Wd, E, t, v, sign, tmp, out):
    N = W.shape[0]
    _apply_dense(Wd, v, tmp)
    for i in range(N):
        tmp[i] = tmp[i] * cmath.exp(sign * 1j * E[i] * t)
    _apply_dense(W, tmp, out)


@njit(cache=True)
def _site_matrices(Vx, xs, amps_j, nu, tm, dt, sign, out):
    n_q = amps_j.shape[0]
    L = xs.shape[0]
    for q in range(n_q):
        alpha = sign * TWO_PI * amps_j[q] * dt
        theta = TWO_PI * nu[q] * tm
        for r in range(L):
            for c in range(L):
                acc = 0.0 + 0.0j
                for m in range(L):
                    acc += Vx[r, m] * cmath.exp(-1j * alpha * xs[m]) * Vx[c, m]
                out[q, r, c] = acc * cmath.exp(-1j * (r - c) * theta)


@njit(cache=True)
def evolve_trajectory(W, Wd, E, Vx, xs, digits, amps, nu, tms, dt, psi0):
    n_steps = amps.shape[0]
    n_q = nu.shape[0]
    L = xs.shape[0]
    N = W.shape[0]
    traj = np.empty((n_steps + 1, N), dtype=np.complex128)
    psi = psi0.astype(np.complex128)
    traj[0] = psi
    tmp = np.empty(N, dtype=np.complex128)
    out = np.empty(N, dtype=np.complex128)
    scratch = np.empty(N, dtype=np.complex128)
    mats = np.empty((n_q, L, L), dtype=np.complex128)
    for j in range(n_steps):
        tm = tms[j]
        _dressed_phase_apply(W, Wd, E, tm, psi, -1.0, tmp, out)
        psi, out = out, psi
        _site_matrices(Vx, xs, amps[j], nu, tm, dt, 1.0, mats)
        _apply_all_sites(mats, psi, scratch, L, n_q, N)
        _dressed_phase_apply(W, Wd, E, tm, psi, 1.0, tmp, out)
        psi, out = out, psi
        traj[j + 1] = psi
    return traj


@njit(cache=True)
def backward_trajectory(W, Wd, E, Vx, xs, digits, amps, nu, tms, dt, lam_T):
    n_steps = amps.shape[0]
    n_q = nu.shape[0]
    L = xs.shape[0]
    N = W.shape[0]
    traj = np.empty((n_steps + 1, N), dtype=np.complex128)
    lam = lam_T.astype(np.complex128)
    traj[n_steps] = lam
    tmp = np.empty(N, dtype=np.complex128)
    out = np.empty(N, dtype=np.complex128)
    scratch = np.empty(N, dtype=np.complex128)
    mats = np.empty((n_q, L, L), dtype=np.complex128)
    for j in range(n_steps - 1, -1, -1):
        tm = tms[j]
        _dressed_phase_apply(W, Wd, E, tm, lam, -1.0, tmp, out)
        lam, out = out, lam
        _site_matrices(Vx, xs, amps[j], nu, tm, dt, -1.0, mats)
        _apply_all_sites(mats, lam, scratch, L, n_q, N)
        _dressed_phase_apply(W, Wd, E, tm, lam, 1.0, tmp, out)
        lam, out = out, lam
        traj[j] = lam
    return traj


@njit(cache=True)
def _sinc1(z):
    if abs(z) < 1e-6:
        return 1.0 - z * z / 6.0
    return math.sin(z) / z


@njit(cache=True)
def gradient_pass(W, Wd, E, Vx, xs, Cnu, digits, amps, nu, tms, dt,
                  psi_traj, lam_T, seg_of_step, n_segments):
    n_steps = amps.shape[0]
    n_q = nu.shape[0]
    L = xs.shape[0]
    N = W.shape[0]
    grad_amps = np.zeros((n_q, n_segments))
    grad_nu = np.zeros(n_q)
    lam = lam_T.astype(np.complex128)
    tmp = np.empty(N, dtype=np.complex128)
    out = np.empty(N, dtype=np.complex128)
    scratch = np.empty(N, dtype=np.complex128)
    psi_e = np.empty(N, dtype=np.complex128)
    lam_e = np.empty(N, dtype=np.complex128)
    mu = np.empty(N)
    site = np.empty((n_q, L, L), dtype=np.complex128)
    for j in range(n_steps - 1, -1, -1):
        tm = tms[j]
        # psi_e = Q+ psi_j, lam_e = Q+ lam_{j+1}
        _dressed_phase_apply(W, Wd, E, tm, psi_traj[j].copy(), -1.0, tmp, psi_e)
        _dressed_phase_apply(W, Wd, E, tm, lam, -1.0, tmp, lam_e)
        for q in range(n_q):
            theta = TWO_PI * nu[q] * tm
            for r in range(L):
                for c in range(L):
                    site[q, r, c] = Vx[c, r] * cmath.exp(1j * c * theta)
        _apply_all_sites(site, psi_e, scratch, L, n_q, N)
        _apply_all_sites(site, lam_e, scratch, L, n_q, N)

        for a in range(N):
            m = 0.0
            for q in range(n_q):
                m += TWO_PI * amps[j, q] * xs[digits[a, q]]
            mu[a] = m

        seg = seg_of_step[j]
        for q in range(n_q):
            acc = 0.0 + 0.0j
            for a in range(N):
                w = cmath.exp(-1j * mu[a] * dt) * (-1j * dt * TWO_PI * xs[digits[a, q]])
                acc += lam_e[a].conjugate() * w * psi_e[a]
            grad_amps[q, seg] += 2.0 * acc.real

        for q in range(n_q):
            scale = TWO_PI * TWO_PI * amps[j, q] * tm
            stride = L ** q
            acc = 0.0 + 0.0j
            for a in range(N):
                da = digits[a, q]
                base = a - da * stride
                for db in range(L):
                    b = base + db * stride
                    cval = Cnu[da, db]
                    half = 0.5 * dt * (mu[a] - mu[b])
                    exp1 = cmath.exp(-0.5j * dt * (mu[a] + mu[b])) * _sinc1(half)
                    acc += lam_e[a].conjugate() * exp1 * (-1j * dt * scale) * cval * psi_e[b]
            grad_nu[q] += 2.0 * acc.real

        # back-step the costate: lam_j = Q exp(+i mu dt) lam_e
        for a in range(N):
            lam_e[a] = lam_e[a] * cmath.exp(1j * mu[a] * dt)
        for q in range(n_q):
            theta = TWO_PI * nu[q] * tm
            for r in range(L):
                for c in range(L):
                    site[q, r, c] = Vx[r, c] * cmath.exp(-1j * r * theta)
        _apply_all_sites(site, lam_e, scratch, L, n_q, N)
        _dressed_phase_apply(W, Wd, E, tm, lam_e, 1.0, tmp, out)
        lam, out = out, lam
    return grad_amps, grad_nu


@njit(cache=True)
def switching_pass(W, Wd, E, xs, digits, nu, times, psi_traj, lam_traj):
    n_t = times.shape[0]
    n_q = nu.shape[0]
    L = xs.shape[0]
    N = W.shape[0]
    phi = np.empty((n_t, n_q))
    tmp = np.empty(N, dtype=np.complex128)
    u = np.empty(N, dtype=np.complex128)
    v = np.empty(N, dtype=np.complex128)
    for it in range(n_t):
        t = times[it]
        _dressed_phase_apply(W, Wd, E, t, lam_traj[it].copy(), -1.0, tmp, u)
        _dressed_phase_apply(W, Wd, E, t, psi_traj[it].copy(), -1.0, tmp, v)
        for q in range(n_q):
            stride = L ** q
            amp_a = 0.0 + 0.0j   # <u| a_q |v>
            amp_b = 0.0 + 0.0j   # <v| a_q |u>
            for a in range(N):
                k = digits[a, q]
                if k < L - 1:
                    s = math.sqrt(k + 1.0)
                    amp_a += u[a].conjugate() * s * v[a + stride]
                    amp_b += v[a].conjugate() * s * u[a + stride]
            theta = TWO_PI * nu[q] * t
            sandwich = cmath.exp(1j * theta) * amp_a + cmath.exp(-1j * theta) * amp_b.conjugate()
            phi[it, q] = 2.0 * (1j * sandwich).real
    return phi
