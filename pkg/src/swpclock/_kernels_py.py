"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` exactly and are used when the compiled
extension is unavailable (or when ``SWPCLOCK_PURE_PYTHON=1``).
"""

import numpy as np
from scipy.linalg import lapack

# |kappa * width| below this uses the series form of the segment matrix
SERIES_CUTOFF = 1e-3


def transfer_amplitudes(k, du, kind, width, u, in_window, x_left, x_right):
    """Scaled transfer-matrix entries for left incidence.

    Parameters are in squared-wave-number units: ``u[i]`` is 2 mu V / hbar^2
    for segments and 2 mu gamma / hbar^2 for deltas, ``du`` the per-k
    perturbation (same units) added on window segments.

    Returns ``(m21, m22, logscale)`` with T = exp(-logscale) / m22 and
    R = -m21 / m22.
    """
    k = np.ascontiguousarray(k, dtype=float)
    du = np.broadcast_to(np.asarray(du, dtype=float), k.shape)
    k2 = k * k
    p11 = np.ones_like(k)
    p12 = np.zeros_like(k)
    p21 = np.zeros_like(k)
    p22 = np.ones_like(k)
    logscale = np.zeros_like(k)

    for kd, w, ui, win in zip(kind, width, u, in_window):
        if kd == 1:
            p21 = p21 + ui * p11
            p22 = p22 + ui * p12
            continue
        kap2 = k2 - ui - (du if win else 0.0)
        x = kap2 * w * w
        c = np.empty_like(k)
        s = np.empty_like(k)

        small = np.abs(x) < SERIES_CUTOFF**2
        xs = x[small]
        c[small] = 1.0 - xs / 2.0 + xs * xs / 24.0 - xs**3 / 720.0
        s[small] = w * (1.0 - xs / 6.0 + xs * xs / 120.0 - xs**3 / 5040.0)

        osc = (~small) & (x > 0)
        split = osc & (k2 > ui) if win else np.zeros_like(osc)
        plain = osc & ~split
        r = np.sqrt(kap2[plain])
        c[plain] = np.cos(r * w)
        s[plain] = np.sin(r * w) / r
        # window angle kept as r0 w + dr w with r0 independent of du, so the
        # rounding of the large common part is the same for every du
        r = np.sqrt(kap2[split])
        r0 = np.sqrt(k2[split] - ui)
        dr = -du[split] / (r + r0)
        c0, s0 = np.cos(r0 * w), np.sin(r0 * w)
        cd, sd = np.cos(dr * w), np.sin(dr * w)
        c[split] = c0 * cd - s0 * sd
        s[split] = (s0 * cd + c0 * sd) / r

        eva = (~small) & (x < 0)
        q = np.sqrt(-kap2[eva])
        e = np.exp(-2.0 * q * w)
        c[eva] = 0.5 * (1.0 + e)
        s[eva] = 0.5 * (1.0 - e) / q
        logscale[eva] += q * w

        t = -kap2 * s
        p11, p12, p21, p22 = c * p11 + s * p21, c * p12 + s * p22, t * p11 + c * p21, t * p12 + c * p22

    span = x_right - x_left
    m22 = 0.5 * np.exp(1j * k * span) * ((p11 + p22) - 1j * (k * p12 - p21 / k))
    m21 = 0.5 * np.exp(1j * k * (x_right + x_left)) * ((p11 - p22) + 1j * (k * p12 + p21 / k))
    return m21, m22, logscale


def cn_propagate(psi, potential, dz, dt, hbar, mu, nsteps):
    """Advance ``psi`` in place by ``nsteps`` Crank-Nicolson steps.

    Hard walls outside the grid.  Returns ``(max_norm_deviation,
    max_boundary_density)`` over all steps, the deviation being relative to
    the norm on entry.
    """
    n = psi.shape[0]
    beta = dt / (2.0 * hbar)
    kin = hbar * hbar / (2.0 * mu * dz * dz)
    diag_h = 2.0 * kin + potential
    off = -1j * beta * (-kin)  # off-diagonal of B = 1 - i beta H
    a_diag = 1.0 + 1j * beta * diag_h
    a_off = np.full(n - 1, 1j * beta * (-kin), dtype=complex)
    b_diag = 1.0 - 1j * beta * diag_h
    dl, d, du_, du2, ipiv, info = lapack.zgttrf(a_off, a_diag, a_off)
    if info != 0:
        raise RuntimeError(f"tridiagonal factorisation failed (info={info})")

    norm0 = float(np.sum(np.abs(psi) ** 2) * dz)
    max_dev = 0.0
    max_edge = max(abs(psi[0]) ** 2, abs(psi[-1]) ** 2)
    rhs = np.empty_like(psi)
    for _ in range(nsteps):
        rhs[:] = b_diag * psi
        rhs[1:] += off * psi[:-1]
        rhs[:-1] += off * psi[1:]
        x, info = lapack.zgttrs(dl, d, du_, du2, ipiv, rhs)
        psi[:] = x
        dev = abs(float(np.sum(psi.real**2 + psi.imag**2) * dz) - norm0) / norm0
        max_dev = max(max_dev, dev)
        max_edge = max(max_edge, abs(psi[0]) ** 2, abs(psi[-1]) ** 2)
    return max_dev, float(max_edge)
