"""Hot numeric kernels.

Each kernel has a loop implementation compiled with numba and a vectorised
numpy implementation. The public names point at one or the other depending on
``ringsqueeze._accel.USE_NUMBA``; both stay importable for tests and benchmarks.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, jit, rebind

NEWTON_CONVERGED = 0
NEWTON_MAXITER = 1
NEWTON_STALLED = 2


# --------------------------------------------------------------------------
# two-pump Kerr steady state
# --------------------------------------------------------------------------

def _pump_residual(x, gam, delta, drive_re, drive_im, lam_spm, lam_xpm):
    """Residual of dF/dt = 0 for both pumps and its real 4x4 Jacobian.

    ``x`` holds (Re F1, Im F1, Re F2, Im F2). Everything is dimensionless.
    """
    r = np.empty(4)
    jac = np.zeros((4, 4))
    n = np.empty(2)
    n[0] = x[0] * x[0] + x[1] * x[1]
    n[1] = x[2] * x[2] + x[3] * x[3]
    for p in range(2):
        q = 1 - p
        u = x[2 * p]
        v = x[2 * p + 1]
        shift = delta[p] + lam_spm * n[p] + 2.0 * lam_xpm * n[q]
        # (-g + i*shift) * (u + i v) - i*d
        r[2 * p] = -gam[p] * u - shift * v + drive_im[p]
        r[2 * p + 1] = -gam[p] * v + shift * u - drive_re[p]
        # d(shift)/d(x_k)
        ds_u = 2.0 * lam_spm * u
        ds_v = 2.0 * lam_spm * v
        ds_uq = 4.0 * lam_xpm * x[2 * q]
        ds_vq = 4.0 * lam_xpm * x[2 * q + 1]
        rp, ip = 2 * p, 2 * p + 1
        jac[rp, rp] = -gam[p] - ds_u * v
        jac[rp, ip] = -shift - ds_v * v
        jac[ip, rp] = shift + ds_u * u
        jac[ip, ip] = -gam[p] + ds_v * u
        jac[rp, 2 * q] = -ds_uq * v
        jac[rp, 2 * q + 1] = -ds_vq * v
        jac[ip, 2 * q] = ds_uq * u
        jac[ip, 2 * q + 1] = ds_vq * u
    return r, jac


def _pump_newton_np(x0, gam, delta, drive_re, drive_im, lam_spm, lam_xpm, tol, max_iter, max_halvings):
    """Damped Newton on the pump residual; halves the step until the residual norm drops."""
    dnorm = np.sqrt(np.sum(drive_re**2) + np.sum(drive_im**2))
    if dnorm == 0.0:
        dnorm = 1.0
    x = x0.copy()
    r, jac = _pump_residual(x, gam, delta, drive_re, drive_im, lam_spm, lam_xpm)
    res = np.sqrt(np.sum(r * r)) / dnorm
    it = 0
    status = NEWTON_MAXITER
    while it < max_iter and res >= tol:
        step = np.linalg.solve(jac, -r)
        t = 1.0
        accepted = False
        xt, rt, jt, rest = x, r, jac, res
        for _ in range(max_halvings + 1):
            xt = x + t * step
            rt, jt = _pump_residual(xt, gam, delta, drive_re, drive_im, lam_spm, lam_xpm)
            rest = np.sqrt(np.sum(rt * rt)) / dnorm
            if rest < res:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            status = NEWTON_STALLED
            break
        x, r, jac, res = xt, rt, jt, rest
        it += 1
    if res < tol:
        status = NEWTON_CONVERGED
    return x, status, res, it, np.linalg.det(jac)


_pump_residual_nb = jit(_pump_residual)
# same Newton source, with the residual resolved to the compiled version
_pump_newton_nb = jit(rebind(_pump_newton_np, _pump_residual=_pump_residual_nb))


# --------------------------------------------------------------------------
# eigen-form spectrum and photon sums
# --------------------------------------------------------------------------

@jit
def _spectrum_sums_nb(lam, V, K, j, omegas):
    n = lam.shape[0]
    half = n // 2
    no = omegas.shape[0]
    t1 = np.zeros(no, dtype=np.complex128)
    t0 = np.zeros(no, dtype=np.complex128)
    t3 = np.zeros(no, dtype=np.complex128)
    for w in range(no):
        om2 = omegas[w] * omegas[w]
        for a in range(n):
            la = lam[a]
            da = la * la + om2
            for b in range(n):
                lb = lam[b]
                s = la + lb
                a_ab = 4.0 * la / (s * da)
                a_ba = 4.0 * lb / (s * (lb * lb + om2))
                k = K[a, b]
                t1[w] += k * V[j, a] * V[j, b] * a_ab
                t0[w] += k * V[j + half, a] * V[j, b] * (a_ab + a_ba)
                t3[w] += k * V[j + half, a] * V[j + half, b] * a_ba
    return t1, t0, t3


def _spectrum_sums_np(lam, V, K, j, omegas):
    half = lam.shape[0] // 2
    om2 = np.asarray(omegas, dtype=float)[:, None, None] ** 2
    la = lam[None, :, None]
    lb = lam[None, None, :]
    a_ab = 4.0 * la / ((la + lb) * (la * la + om2))
    a_ba = 4.0 * lb / ((la + lb) * (lb * lb + om2))
    vj, vjc = V[j], V[j + half]
    t1 = np.einsum("ab,a,b,wab->w", K, vj, vj, a_ab)
    t0 = np.einsum("ab,a,b,wab->w", K, vjc, vj, a_ab + a_ba)
    t3 = np.einsum("ab,a,b,wab->w", K, vjc, vjc, a_ba)
    return t1, t0, t3


@jit
def _photon_sums_nb(lam, V, K):
    n = lam.shape[0]
    half = n // 2
    out = np.zeros(half, dtype=np.complex128)
    for j in range(half):
        acc = 0.0 + 0.0j
        for a in range(n):
            for b in range(n):
                acc += K[a, b] * V[j + half, a] * V[j, b] / (lam[a] + lam[b])
        out[j] = -2.0 * acc
    return out


def _photon_sums_np(lam, V, K):
    half = lam.shape[0] // 2
    w = K / (lam[:, None] + lam[None, :])
    return -2.0 * np.einsum("ab,ja,jb->j", w, V[half:], V[:half])


if USE_NUMBA:
    pump_newton = _pump_newton_nb
    spectrum_sums = _spectrum_sums_nb
    photon_sums = _photon_sums_nb
else:
    pump_newton = _pump_newton_np
    spectrum_sums = _spectrum_sums_np
    photon_sums = _photon_sums_np
