"""Regenerate the Weyl-Heisenberg SIC fiducial catalog.

Finds a fiducial numerically (frame-potential minimisation), then polishes it
with damped Gauss-Newton in mpmath and writes 40-digit decimal strings.

    python tools/gen_sic_catalog.py > src/schmidtnum/data/sic_fiducials.json
"""
import json
import sys

import mpmath as mp
import numpy as np
from scipy.optimize import minimize

DIGITS = 40


def displacements(d):
    omega = np.exp(2j * np.pi / d)
    tau = -np.exp(1j * np.pi / d)
    X = np.roll(np.eye(d), 1, axis=0)
    Z = np.diag(omega ** np.arange(d))
    ops = []
    for p in range(d):
        for q in range(d):
            if p == q == 0:
                continue
            ops.append(tau ** (p * q) * np.linalg.matrix_power(X, p) @ np.linalg.matrix_power(Z, q))
    return ops


def find_float(d, rng):
    ops = displacements(d)
    target = (d - 1) / (d + 1)

    def potential(x):
        psi = x[:d] + 1j * x[d:]
        n = np.vdot(psi, psi).real
        return sum(abs(np.vdot(psi, D @ psi)) ** 4 for D in ops) / n**4

    for _ in range(200):
        res = minimize(potential, rng.normal(size=2 * d), method="BFGS", options={"gtol": 1e-12})
        if res.fun - target < 1e-10:
            psi = res.x[:d] + 1j * res.x[d:]
            psi /= np.linalg.norm(psi)
            return psi * np.exp(-1j * np.angle(psi[0]))
    raise RuntimeError(f"no fiducial found for d={d}")


def polish(d, psi0):
    mp.mp.dps = 2 * DIGITS + 20
    omega = mp.exp(2j * mp.pi / d)
    tau = -mp.exp(1j * mp.pi / d)
    pairs = [(p, q) for p in range(d) for q in range(d) if (p, q) != (0, 0)]

    def vec(x):
        v = [mp.mpc(x[0], 0)] + [mp.mpc(x[j], x[d + j - 1]) for j in range(1, d)]
        return v

    def residuals(x):
        v = vec(x)
        out = []
        norm2 = mp.fsum(abs(c) ** 2 for c in v)
        for p, q in pairs:
            # <v| tau^{pq} X^p Z^q |v>, (X^p Z^q v)_j = omega^{q (j-p)} v_{j-p}
            s = mp.fsum(mp.conj(v[j]) * omega ** (q * ((j - p) % d)) * v[(j - p) % d] for j in range(d))
            out.append(abs(tau ** (p * q) * s) ** 2 - norm2**2 / (d + 1))
        out.append(norm2 - 1)
        return out

    x = [mp.mpf(psi0[0].real)] + [mp.mpf(c.real) for c in psi0[1:]] + [mp.mpf(c.imag) for c in psi0[1:]]
    h = mp.mpf(10) ** (-(DIGITS + 10))
    for _ in range(60):
        r = residuals(x)
        err = max(abs(v) for v in r)
        if err < mp.mpf(10) ** (-(DIGITS + 5)):
            break
        n = len(x)
        J = mp.matrix(len(r), n)
        for k in range(n):
            xk = list(x)
            xk[k] += h
            rk = residuals(xk)
            for i in range(len(r)):
                J[i, k] = (rk[i] - r[i]) / h
        A = J.T * J + mp.mpf(10) ** (-(DIGITS + 20)) * mp.eye(n)
        step = mp.lu_solve(A, -(J.T * mp.matrix(r)))
        x = [x[k] + step[k] for k in range(n)]
    else:
        raise RuntimeError(f"polish did not converge for d={d}")
    v = vec(x)
    return [f"{mp.nstr(c.real, DIGITS)} {mp.nstr(c.imag, DIGITS)}" for c in v], err


def main():
    rng = np.random.default_rng(20241015)
    catalog = {}
    # d=3: the orbit of (0, 1, -1)/sqrt(2)
    for d in range(2, 9):
        if d == 3:
            mp.mp.dps = 2 * DIGITS
            h = mp.sqrt(2) / 2
            entries, err = [f"{mp.nstr(c, DIGITS)} 0.0" for c in (mp.mpf(0), h, -h)], 0
        else:
            entries, err = polish(d, find_float(d, rng))
        print(f"d={d} residual {mp.nstr(err, 5)}", file=sys.stderr)
        catalog[str(d)] = entries
    json.dump({"convention": "D_pq = tau^(pq) X^p Z^q, tau = -exp(i pi/d)", "fiducials": catalog}, sys.stdout, indent=1)


if __name__ == "__main__":
    main()
