"""Closed-form critical points of the reduced energy, evaluated independently
of the C++ code (mpmath, 30 digits). Values are frozen into test_landscape.cpp.

Run with: python3 tests/oracles/landscape_oracle.py
"""
from mpmath import mp, mpf, sqrt, pi, gamma, beta, diff

mp.dps = 30


def alpha_n(n):
    return mpf(n * (n - 2)) ** (mpf(n - 2) / 4)


def omega(n):  # area of S^{n-1}
    return 2 * pi ** (mpf(n) / 2) / gamma(mpf(n) / 2)


def coefficients(n, q0, robin):
    p = mpf(n + 2) / (n - 2)
    an = alpha_n(n)
    ip = an ** p * omega(n) / n
    ip1 = an ** (p + 1) * omega(n) * beta(mpf(n) / 2, mpf(n) / 2) / 2
    g0 = q0 ** (-1 / (p - 1))
    return dict(c0=g0 ** 2 * (p - 1) / (2 * (p + 1)) * ip1,
                alpha=an * ip * robin / 2,
                beta=an ** 2 * (n - 2) * omega(n) / 2,
                gamma=ip1 / (p + 1))


def F(n, c, zeta, d, eta):
    s = 1 + sum(e * e for e in eta)
    lin = c["gamma"] * sum(z * e for z, e in zip(zeta, eta)) * d
    if n == 3:
        return c["alpha"] * d + c["beta"] / (s * d) - lin
    return c["beta"] * (1 / (s * d)) ** (n - 2) - lin


def critical(n, c, zeta, q_over_gradq):
    z2 = sum(z * z for z in zeta)
    if n == 3:
        a, b, g = c["alpha"], c["beta"], c["gamma"]
        t = (a - sqrt(a * a + g * g * z2)) / (g * z2)
        eta = [t * z for z in zeta]
        s = 1 + sum(e * e for e in eta)
        d = sqrt(b / (s * (a - g * sum(z * e for z, e in zip(zeta, eta)))))
        return d, eta
    zn = sqrt(z2)
    eta = [-z / zn for z in zeta]
    d = ((n - 2) * c["beta"] / (2 ** (n - 2) * c["gamma"]) * q_over_gradq) ** (mpf(1) / (n - 1))
    return d, eta


# Unit ball, xi0 = 0, Q = 1 + 0.5 x_1: Q(0) = 1, grad Q = 0.5 e_1, H(0,0) = 1.
for n in (3, 4, 5):
    c = coefficients(n, mpf(1), mpf(1))
    zeta = [mpf("0.5")] + [mpf(0)] * (n - 1)
    d0, eta0 = critical(n, c, zeta, mpf(2))
    gd = diff(lambda d: F(n, c, zeta, d, eta0), d0)
    ge = diff(lambda e: F(n, c, zeta, d0, [e] + eta0[1:]), eta0[0])
    print(f"n={n} c0={c['c0']} alpha={c['alpha']} beta={c['beta']} gamma={c['gamma']}")
    print(f"     d0={d0} eta0_1={eta0[0]} F={F(n, c, zeta, d0, eta0)} |grad|~{abs(gd) + abs(ge)}")

# Q = 1/(2|x|), n = 4, xi0 = e_1: zeta = -e_1, Q/|grad Q| = 1.
c = coefficients(4, mpf("0.5"), mpf(0))
d0, eta0 = critical(4, c, [mpf(-1), 0, 0, 0], mpf(1))
print(f"n=4 Q=1/(2|x|) xi0=e1: d0={d0} eta0={eta0} (beta/(2 gamma))^(1/3)={(c['beta'] / (2 * c['gamma'])) ** (mpf(1) / 3)}")
