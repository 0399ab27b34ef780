"""Independent numerical oracles used to cross-check the pipeline.

Everything here deliberately avoids the package's integrator and quadrature:
classic fixed-step RK4 with Richardson-extrapolated trapezoid sums, plus
adaptive quad for the analytic tail. Tolerances of the cross-checks reflect
these methods' own accuracy, not the pipeline's.
"""
import math

import numpy as np
from scipy.integrate import quad


def rhs_oracle(x, F, G, Om):
    # same radial system, independently arranged
    s = (F - G) * (F + G)
    dF = (s - (Om + 1.0)) * G
    dG = ((Om - 1.0) + s) * F - 2.0 * G / x
    return dF, dG


def rk4_until(Om, F0, h=1e-3, x_end=60.0, x0=1e-4, record=False,
              stop_frac=None):
    """Fixed-step RK4 from the regular series start until a sign crossing.

    Returns (label, xs, Fs, Gs) where label is 'up' (G crossed zero),
    'down' (F crossed zero), 'glue' (F fell below stop_frac*F0) or 'none'.
    """
    c1 = ((Om - 1.0) * F0 + F0 ** 3) / 3.0
    F = F0 - (Om + 1.0) * c1 * x0 * x0 / 2.0
    G = c1 * x0
    x = x0
    xs, Fs, Gs = [x], [F], [G]
    if G <= 0.0:
        return "up", xs, Fs, Gs
    thresh = stop_frac * F0 if stop_frac else -1.0
    n = int(round((x_end - x0) / h))
    for _ in range(n):
        k1F, k1G = rhs_oracle(x, F, G, Om)
        k2F, k2G = rhs_oracle(x + h / 2, F + h / 2 * k1F, G + h / 2 * k1G, Om)
        k3F, k3G = rhs_oracle(x + h / 2, F + h / 2 * k2F, G + h / 2 * k2G, Om)
        k4F, k4G = rhs_oracle(x + h, F + h * k3F, G + h * k3G, Om)
        F += h * (k1F + 2 * k2F + 2 * k3F + k4F) / 6.0
        G += h * (k1G + 2 * k2G + 2 * k3G + k4G) / 6.0
        x += h
        if record:
            xs.append(x)
            Fs.append(F)
            Gs.append(G)
        if F < 0.0:
            return "down", xs, Fs, Gs
        if G < 0.0:
            return "up", xs, Fs, Gs
        if stop_frac and F <= thresh:
            return "glue", xs, Fs, Gs
    return "none", xs, Fs, Gs


def bisect_rk4(Om, lo, hi, h=1e-3):
    """Bisect the RK4 flow to float exhaustion; returns the midpoint."""
    lab_lo = rk4_until(Om, lo, h)[0]
    lab_hi = rk4_until(Om, hi, h)[0]
    assert lab_lo == "up" and lab_hi == "down", (lab_lo, lab_hi)
    while True:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            return mid
        lab = rk4_until(Om, mid, h)[0]
        if lab == "up":
            lo = mid
        else:
            hi = mid


def oracle_ground_norm(Om, bracket, h=1e-3, glue_frac=1e-4):
    """Independent norm integral: RK4 profile + Richardson trapezoid + quad tail.

    Returns (F0, Q). The trapezoid sums at step h and 2h are Richardson
    extrapolated; the tail beyond the glue point is integrated adaptively
    from the matched exponential forms.
    """
    F0 = bisect_rk4(Om, bracket[0], bracket[1], h)
    label, xs, Fs, Gs = rk4_until(Om, F0, h, record=True, stop_frac=glue_frac)
    assert label == "glue", label
    x = np.asarray(xs)
    F = np.asarray(Fs)
    G = np.asarray(Gs)
    y = x * x * (F * F + G * G)
    t_h = np.trapezoid(y, x)
    t_2h = np.trapezoid(y[::2], x[::2])
    q_body = (4.0 * t_h - t_2h) / 3.0
    nu = math.sqrt(1.0 - Om * Om)
    B = 1.0 + Om
    xg = float(x[-1])
    A_f = float(F[-1]) * xg * math.exp(nu * xg)
    A_g = float(G[-1]) * B * xg / (nu + 1.0 / xg) * math.exp(nu * xg)

    def tail_integrand(t):
        ft = A_f * math.exp(-nu * t) / t
        gt = A_g * math.exp(-nu * t) * (nu + 1.0 / t) / (B * t)
        return t * t * (ft * ft + gt * gt)

    q_tail, _err = quad(tail_integrand, xg, np.inf, epsabs=1e-14, epsrel=1e-12)
    return F0, q_body + q_tail
