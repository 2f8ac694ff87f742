"""Independent evaluation of the convergence-bound formulas with exact
rational arithmetic; the printed values are frozen into test_bound.cpp."""
from fractions import Fraction as F
import math


def bound(L, sigma, zeta, rho, eta, tau, H, N, f1, fstar=F(0)):
    g = (1 - rho) ** 2
    a = g - 3 * eta**2 * L**2
    b = g - 27 * eta**2 * L**2
    t1 = 4 * (f1 - fstar) * a / (eta * tau * H * b)
    t2 = 8 * L**2 * eta**2 * (sigma**2 + 3 * zeta**2) / b
    t3 = a / b * 4 * L * eta * tau * sigma**2 / N
    return t1 + t2 + t3


def suggested_eta(L, sigma, zeta, rho, tau, H, N):
    return 1.0 / (6 * L / abs(1 - rho) + sigma * tau * math.sqrt(H) / math.sqrt(N) + zeta ** (2 / 3) * H ** (1 / 3))


def rate(sigma, zeta, rho, tau, H, N):
    g = (1 - rho) ** 2
    return sigma / math.sqrt(N * H) + (zeta / H) ** (2 / 3) / g + 1 / (H * tau**2 * g)


def tau_thr(L, sigma, eta, H, N, f1, fstar=0.0):
    return math.sqrt(N * (f1 - fstar) / (L * H * eta**2 * sigma**2))


if __name__ == "__main__":
    r = bound(F(1), F(1), F(1), F(1, 2), F(1, 100), F(4), F(100), F(8), F(1))
    print("bound", repr(float(r)), r)
    print("eta", repr(suggested_eta(1.0, 1.0, 1.0, 0.5, 4.0, 100.0, 8.0)))
    print("rate", repr(rate(1.0, 1.0, 0.5, 4.0, 100.0, 8.0)))
    print("tau_thr", repr(tau_thr(1.0, 1.0, 0.01, 100.0, 8.0, 1.0)))
    r2 = bound(F(2), F(1, 2), F(0), F(0), F(1, 50), F(2), F(10), F(4), F(3, 2), F(1, 2))
    print("bound_b", repr(float(r2)))
