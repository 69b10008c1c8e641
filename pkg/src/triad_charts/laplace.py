"""Laplace coefficients and small-alpha expansion coefficients."""
import numpy as np

from .errors import DomainError


def _trapezoid(s, k, alpha, n):
    th = 2 * np.pi * np.arange(n) / n
    return np.mean(np.cos(k * th) / (1 - 2 * alpha * np.cos(th) + alpha ** 2) ** s)


def laplace_coeff(s, k, alpha, tol=1e-13, n0=64, nmax=1 << 20):
    """b_s^(k)(alpha) = (1/2pi) int cos(k th) (1 - 2 alpha cos th + alpha^2)^(-s) dth.

    Periodic trapezoid rule with node doubling until successive values
    differ by less than tol (absolute, relative to max(1, |b|)).
    """
    if not s > 0:
        raise DomainError(f"order s must be positive, got {s}")
    if not 0 <= alpha < 1:
        raise DomainError(f"alpha must lie in [0, 1), got {alpha}")
    k = abs(int(k))
    n = max(n0, 4 * k + 8)
    prev = _trapezoid(s, k, alpha, n)
    while n < nmax:
        n *= 2
        cur = _trapezoid(s, k, alpha, n)
        if abs(cur - prev) < tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise DomainError("Laplace coefficient quadrature did not converge")


def laplace_coeff_nodes(s, k, alpha, n):
    """Fixed-node trapezoid value (used by refinement checks)."""
    return _trapezoid(s, abs(int(k)), alpha, n)


def b_ratio(alpha):
    """b(alpha) = 4 b_{3/2}^(2) / b_{3/2}^(1), which is O(alpha)."""
    return 4 * laplace_coeff(1.5, 2, alpha) / laplace_coeff(1.5, 1, alpha)


def d_from_x(x):
    x = np.asarray(x, dtype=float)
    return x / (np.sqrt(1 + x * x) + 1)


def d_value(Lambda1, Lambda2, alpha):
    if Lambda1 == Lambda2:
        raise DomainError("d undefined for Lambda1 == Lambda2")
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    x = np.sqrt(Lambda1 * Lambda2) / abs(Lambda1 - Lambda2) * b_ratio(alpha)
    return float(d_from_x(x))


# leading coefficients c such that f(a1, a2) ~ c * alpha^2 / a2
_LEADING = {
    "r1(a1,a2)": 3 / 16,
    "r1(a2,a1)": -3 / 4,
    "r2": -9 / 16,
    "r3": 0.0,
    "r4": 0.0,
    "C1": -3 / 4,
    "r1*": -3 / 16,
    "s1(a1,a2)": 3.0,
    "s1(a2,a1)": 9 / 8,
    "s1*(a1,a2)": -3 / 4,
    "s1*(a2,a1)": 9 / 8,
    "s2": 0.0,
    "s2*": 0.0,
}


def expansion_table(a1, a2):
    """Leading-order values of the torsion building blocks (alpha = a1/a2)."""
    if not 0 < a1 < a2:
        raise DomainError("need 0 < a1 < a2")
    alpha = a1 / a2
    scale = alpha ** 2 / a2
    return {name: c * scale for name, c in _LEADING.items()}
