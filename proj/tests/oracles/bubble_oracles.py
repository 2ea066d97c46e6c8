"""Independent high-precision oracle values frozen into the unit tests.

Run with: python3 tests/oracles/bubble_oracles.py
"""
from mpmath import mp, mpf, sqrt, pi, gamma, beta, quad, inf

mp.dps = 30


def alpha(n):
    return mpf(n * (n - 2)) ** (mpf(n - 2) / 4)


def sphere_area(n):  # area of S^{n-1}
    return 2 * pi ** (mpf(n) / 2) / gamma(mpf(n) / 2)


def bubble_integral(n, q):
    a = alpha(n)
    f = lambda r: (a * (1 + r * r) ** (-mpf(n - 2) / 2)) ** q * r ** (n - 1)
    return sphere_area(n) * quad(f, [0, 1, inf])


for n in (3, 4, 5, 6):
    p = mpf(n + 2) / (n - 2)
    print(f"n={n} alpha={alpha(n)} omega={sphere_area(n)}")
    print(f"   I_p     (quad) = {bubble_integral(n, p)}")
    print(f"   I_p     (beta) = {alpha(n)**p * sphere_area(n) * beta(mpf(n)/2, 1) / 2}")
    print(f"   I_p+1   (quad) = {bubble_integral(n, p + 1)}")
    print(f"   I_p+1   (beta) = {alpha(n)**(p+1) * sphere_area(n) * beta(mpf(n)/2, mpf(n)/2) / 2}")

print("gamma0 n=3 Q=16:", mpf(16) ** (-mpf(1) / 4))
print("psi0 at xi n=3 delta=1:", -alpha(3) / 2)
# g(eta) closed forms
for n in (3, 4, 5):
    for s in (0, 1, 2):
        print(f"g n={n} |eta|={s}:", alpha(n) * (1 + s * s) ** (-(n - 2)))

# reduced-energy constants for the unit ball centred at the origin, H(0,0) = 1
for n in (3, 4, 5):
    p = mpf(n + 2) / (n - 2)
    ip = alpha(n) ** p * sphere_area(n) / n
    ip1 = alpha(n) ** (p + 1) * sphere_area(n) * beta(mpf(n) / 2, mpf(n) / 2) / 2
    print(f"n={n}: c0(Q=1)={(p-1)/(2*(p+1))*ip1} beta={alpha(n)**2*(n-2)*sphere_area(n)/2} "
          f"gamma={ip1/(p+1)} alpha(H=1)={alpha(n)*ip/2}")
