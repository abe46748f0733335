"""Independent reference values frozen into the Rust tests.

Uses mpmath / scipy / numpy only; shares no code with the crate.
Run: python3 frozen_values.py
"""
import numpy as np
import mpmath as mp
from scipy import integrate

mp.mp.dps = 30


def k_direct(k):
    return mp.quad(lambda t: 1 / mp.sqrt(1 - k**2 * mp.sin(t) ** 2), [0, mp.pi / 2])


def e_direct(k):
    return mp.quad(lambda t: mp.sqrt(1 - k**2 * mp.sin(t) ** 2), [0, mp.pi / 2])


def a_loop_integral(rho, z, a, L):
    """(Phi/4pi^2 a) * int_{-L}^{L} dz' int_0^{2pi} cos(phi)/f, with Phi = 2pi."""
    def inner(zp):
        g = lambda p: mp.cos(p) / mp.sqrt(rho**2 + a**2 + (zp - z) ** 2 - 2 * a * rho * mp.cos(p))
        return 2 * mp.quad(g, [0, mp.pi])
    pts = sorted(set([-L, max(-L, min(L, z)), L]))
    outer = mp.quad(inner, pts)
    return 2 * mp.pi / (4 * mp.pi**2 * a) * outer


def riemann(rho, z, a, L, nz=4000, nphi=512):
    zp = -L + (np.arange(nz) + 0.5) * (2 * L / nz)
    ph = (np.arange(nphi) + 0.5) * (2 * np.pi / nphi)
    Z, P = np.meshgrid(zp, ph, indexing="ij")
    f = np.sqrt(rho**2 + a**2 + (Z - z) ** 2 - 2 * a * rho * np.cos(P))
    s = np.sum(np.cos(P) / f) * (2 * L / nz) * (2 * np.pi / nphi)
    return 2 * np.pi / (4 * np.pi**2 * a) * s


if __name__ == "__main__":
    print("K(0.8) =", mp.nstr(k_direct(mp.mpf("0.8")), 20))
    print("E(0.8) =", mp.nstr(e_direct(mp.mpf("0.8")), 20))
    print("mp ellipk(0.64)", mp.nstr(mp.ellipk(mp.mpf("0.64")), 20))
    v = a_loop_integral(2, 0, 1, 5)
    print("A_L(rho=2,L=5) =", mp.nstr(v, 16), "riemann", riemann(2.0, 0.0, 1.0, 5.0))
    r, th = 3.0, np.pi / 4
    rho3, z3 = r * np.sin(th), r * np.cos(th)
    v3 = a_loop_integral(mp.mpf(rho3), mp.mpf(z3), 1, 5)
    print("A_L(r=3,theta=pi/4,L=5) =", mp.nstr(v3, 16), "riemann", riemann(rho3, z3, 1.0, 5.0, nz=8000))
    v4 = a_loop_integral(20, 0, 1, 200)
    ff = 20 / (400 + 1) * 200 / np.sqrt(400 + 1 + 200**2)
    print("A_L(r=20,L=200) =", mp.nstr(v4, 16), "far field", ff, "rel", abs(ff - float(v4)) / float(v4))
    Ls = [10, 20, 40, 80, 160, 320]
    diffs = [0.5 - float(a_loop_integral(2, 0, 1, L)) for L in Ls]
    slope = np.polyfit(np.log(Ls), np.log(diffs), 1)[0]
    print("diffs", diffs, "exponent", -slope)
