"""Pure numpy versions of the compiled kernels (same signatures)."""
import numpy as np


def _pair(x1, y1, x2, y2, kd, ki, sqrt, chunk=64):
    S = x1.shape[0]
    dtype = np.result_type(x1, x2, y1, y2, float)
    out = np.empty((S, 2), dtype=dtype)
    for s0 in range(0, S, chunk):
        sl = slice(s0, s0 + chunk)
        d = x1[sl, :, None, :] - x2[sl, None, :, :]
        inv = 1.0 / sqrt(np.einsum("sijk,sijk->sij", d, d))
        out[sl, 0] = -kd * inv.mean(axis=(1, 2))
        # mean over the grid of y1.y2 factorizes
        out[sl, 1] = ki * np.einsum("sk,sk->s", y1[sl].mean(axis=1), y2[sl].mean(axis=1))
    return out


def pair_average(x1, y1, x2, y2, kd, ki):
    """Mean over the N1 x N2 grid of (-kd/|x1 - x2|, ki y1.y2) per sample."""
    return _pair(x1, y1, x2, y2, kd, ki, np.sqrt)


def pair_average_complex(x1, y1, x2, y2, kd, ki):
    return _pair(x1, y1, x2, y2, kd, ki, lambda z: np.sqrt(z.astype(complex)))


def kepler_drift(x, y, mbar, gm, dt):
    v0 = y / mbar
    r0 = np.sqrt(x @ x)
    ainv = 2.0 / r0 - (v0 @ v0) / gm
    if ainv <= 0:
        return x, y, False
    a = 1.0 / ainv
    n = np.sqrt(gm * ainv ** 3)
    ec = 1.0 - r0 * ainv
    es = (x @ v0) / (n * a * a)
    M = n * dt
    dE = M
    for _ in range(50):
        s, c = np.sin(dE), np.cos(dE)
        f = dE - ec * s + es * (1.0 - c) - M
        dE -= f / (1.0 - ec * c + es * s)
        if abs(f) < 1e-15:
            break
    s, c = np.sin(dE), np.cos(dE)
    r = a * (1.0 - ec * c + es * s)
    ff = 1.0 - (a / r0) * (1.0 - c)
    gg = dt - (dE - s) / n
    fd = -a * a * n * s / (r * r0)
    gd = 1.0 - (a / r) * (1.0 - c)
    return ff * x + gg * v0, mbar * (fd * x + gd * v0), True


def wh_run(z0, mbar1, mbar2, M1, M2, mu, m0, dt, nsteps, every, weights):
    z = np.array(z0, dtype=float)
    kk = mu * mbar1 * mbar2
    ci = mu / m0
    out = [z.copy()]
    status = 0

    def shift(z, h):
        z[6:9] += ci * h * z[3:6]
        z[9:12] += ci * h * z[0:3]

    def kick(z, h):
        d = z[6:9] - z[9:12]
        f = kk * h / (d @ d) ** 1.5
        z[0:3] -= f * d
        z[3:6] += f * d

    for step in range(1, nsteps + 1):
        for w in weights:
            h = dt * w
            shift(z, 0.5 * h)
            kick(z, 0.5 * h)
            z[6:9], z[0:3], ok1 = kepler_drift(z[6:9], z[0:3], mbar1, M1, h)
            z[9:12], z[3:6], ok2 = kepler_drift(z[9:12], z[3:6], mbar2, M2, h)
            kick(z, 0.5 * h)
            shift(z, 0.5 * h)
            if not (ok1 and ok2):
                status = 1
        if status:
            break
        if step % every == 0:
            out.append(z.copy())
    return np.array(out), status
