"""triad-charts command line front end.

Every command writes a JSON report (with "schema": 1 and the config hash)
to the output directory and returns 0 on pass, 1 on a verification
failure, 2 on a configuration error."""
import argparse
import csv
import json
import os
import sys

import numpy as np

from .config import ConfigError, load_config
from .errors import DomainError

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def _clean(o):
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (float, np.floating)) and not np.isfinite(o):
        return None
    if isinstance(o, (complex, np.complexfloating)):
        return [float(o.real), float(o.imag)]
    return o


def write_report(cfg, command, passed, results, outdir):
    os.makedirs(outdir, exist_ok=True)
    doc = dict(schema=SCHEMA, command=command, config_hash=cfg.hash, passed=bool(passed),
               config=cfg.raw, results=_clean(results))
    path = os.path.join(outdir, command.replace("-", "_") + ".json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, default=_jsonable, allow_nan=False)
        fh.write("\n")
    return path


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


# ------------------------------------------------------------------ commands

def sample_chart_points(chart, n, cfg, rng):
    from .jrd import sample_jrd
    from .perihelia import sample_p

    if chart == "jrd":
        return sample_jrd(n, rng).as_array()
    if chart == "rps_pi":
        return cfg.domain.sample(cfg.masses, n, rng).as_array()
    if chart == "p":
        return sample_p(n, rng).as_array()
    raise ConfigError(f"unknown chart {chart!r}")


def cmd_verify_symplectic(cfg, args):
    from .canonicity import convergence_slope, roundtrip_defect, symplectic_defect

    sec = cfg["symplectic"]
    charts = [args.chart] if args.chart else sec["charts"]
    n = args.points or sec["points"]
    rng = cfg.rng()
    out, ok = {}, True
    for ch in charts:
        z = sample_chart_points(ch, n, cfg, rng)
        d = symplectic_defect(ch, z, cfg.masses, h=sec["h"])
        rt = roundtrip_defect(ch, z, cfg.masses)
        slope, steps = convergence_slope(ch, z[:20], cfg.masses)
        passed = bool(d.max() < sec["tol"] and rt.max() < 1e-9 and 1.7 < slope < 2.3)
        ok &= passed
        out[ch] = dict(points=int(z.shape[0]), max_defect=float(d.max()),
                       mean_defect=float(d.mean()), max_roundtrip=float(rt.max()),
                       h_slope=slope, h_defects=steps, passed=passed)
    return ok, out, {}


def cmd_torsion_scan(cfg, args, outdir):
    from .birkhoff import quartic, quartic_root, torsion_scan

    sec = cfg["torsion"]
    tr = args.t_range or sec["t_range"]
    sc = torsion_scan(cfg.masses, cfg["domain"]["G"], sec["n1"], sec["n2"], cfg.domain,
                      sec["delta"], tr)
    qr = quartic_root()
    r = qr["root"]
    lo, hi = r - 1e-12, r + 1e-12
    bracket_ok = bool(quartic(lo) > 0 > quartic(hi))
    rows = []
    for i, j in zip(*np.nonzero(sc.valid)):
        t = sc.Lambda2[i, j] / sc.Lambda1[i, j]
        rows.append((sc.Lambda1[i, j], sc.Lambda2[i, j], t, sc.det[i, j], float(quartic(t)),
                     int(sc.degenerate[i, j])))
    os.makedirs(outdir, exist_ok=True)
    write_csv(os.path.join(outdir, "torsion_scan.csv"),
              ["Lambda1", "Lambda2", "t", "det_T_dot", "quartic", "degenerate"], rows)
    res = dict(quartic_root=r, root_bracket=[lo, hi], root_bracket_verified=bracket_ok,
               root_unique_in_01=qr["unique"], p0=qr["p0"], p1=qr["p1"],
               certified=sc.certified, n_valid=int(sc.valid.sum()),
               n_degenerate=int(sc.degenerate.sum()), t_range=tr)
    ok = bool(sc.certified) and qr["unique"] and bracket_ok
    diag = {} if ok else dict(reason="empty certified region" if not sc.certified
                              else "root isolation failed")
    return ok, res, diag


def cmd_equilibrium(cfg, args, outdir):
    from .kepler import MassConfig, lambda_of_a
    from .secular import (SecularPoint, equilibrium_analysis, quadrupole_p, whisker_local)

    sec = cfg["equilibrium"]
    L2 = float(sec["Lambda2"])
    rows, level = [], None
    for L1 in sec["Lambda1"]:
        for G in sec["G"]:
            for G2 in sec["G2"]:
                row = dict(Lambda1=L1, Lambda2=L2, G=G, G2=G2)
                try:
                    rep = equilibrium_analysis(L1, L2, G2, G, c=cfg["domain"]["c"],
                                               alpha_plus=cfg.pdomain.L.alpha_plus)
                except DomainError as e:
                    row["error"] = str(e)
                    rows.append(row)
                    continue
                row.update(rep.as_dict())
                if rep.Gu_empty:
                    row["label"] = "empty G_u"
                else:
                    row["label"] = rep.classification
                if G2 < 4 * G and rep.aligned_admissible:
                    row["a_hat_bound_holds"] = bool(rep.a_hat >= rep.a_hat_bound)
                rows.append(row)
                if level is None and rep.classification == "hyperbolic":
                    level = (L1, G2, G)
    if level is not None:
        L1, G2, G = level
        n = int(sec["level_grid"])
        Th = np.linspace(-0.45, 0.45, n) * min(G, G2)
        th = np.linspace(-np.pi / 2 * 0.95, np.pi / 2 * 0.95, n)
        TT, tt = np.meshgrid(Th, th, indexing="ij")
        P0, P1 = quadrupole_p(L1, L2, G2, TT, tt, G)
        os.makedirs(outdir, exist_ok=True)
        write_csv(os.path.join(outdir, "heff_levels.csv"), ["Theta", "theta", "P0", "P1"],
                  zip(TT.ravel(), tt.ravel(), np.broadcast_to(P0, TT.shape).ravel(), P1.ravel()))
    w = sec["whisker"]
    m = MassConfig(w["masses"]["m0"], w["masses"]["m1"], w["masses"]["m2"], w["mu"])
    wL1 = float(lambda_of_a(w["a1"], m.mbar1, m.M1))
    wL2 = float(lambda_of_a(w["a2"], m.mbar2, m.M2))
    wG2 = wL2 * np.sqrt(1 - w["e2"] ** 2)
    wG = wL1 * np.sqrt(1 - w["e1"] ** 2) - wG2
    pt = SecularPoint(wL1, wL2, wG2, wG)
    try:
        wr = whisker_local(pt, m, m.mu, w["eps_frac"] * wG)
        whisk = dict(rate=wr.rate, max_rel_error=wr.max_rel_error, monotone=wr.monotone,
                     fits={f"{k[0]}:{k[1]!r}": v for k, v in wr.fits.items()})
        ok = bool(wr.max_rel_error < 0.1 and wr.monotone)
    except DomainError as e:
        whisk, ok = dict(error=str(e)), False
    res = dict(rows=rows, level_curves_point=level, whiskers=whisk)
    return ok, res, {} if ok else dict(reason="whisker fit outside 10% or not monotone")


def secular_points(cfg, alpha, n, rng, clearance=0.8):
    """Random p-points at semi-axes ratio alpha whose orbits stay apart:
    a1 (1 + e1) < clearance a2 (1 - e2) (rejection sampling)."""
    from .kepler import eccentricity, lambda_of_a
    from .perihelia import g1_of_p

    m = cfg.masses
    L1 = float(lambda_of_a(1.0, m.mbar1, m.M1))
    L2 = float(lambda_of_a(1.0 / alpha, m.mbar2, m.M2))
    e2max = min(0.7, max(0.05, 1 - 3 * alpha))
    rows = []
    for _ in range(1000 * n):
        e2 = rng.uniform(0.3 * e2max, e2max)
        G2 = L2 * np.sqrt(1 - e2 ** 2)
        G = L1 * rng.uniform(0.2, 0.5)
        Th = rng.uniform(-0.1, 0.1) * G
        th = rng.uniform(-1, 1)
        G1 = float(g1_of_p(G, G2, Th, th))
        if not 0 < G1 < L1:
            continue
        e1 = float(eccentricity(L1, G1))
        if not 1 + e1 < clearance * (1 - e2) / alpha:
            continue
        rows.append((L1, L2, G2, Th, G, 0.3 * G, 0.0, 0.0, rng.uniform(0, 2 * np.pi), th,
                     rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi)))
        if len(rows) == n:
            return np.array(rows)
    raise DomainError(f"no well-separated p-points found at alpha = {alpha}")


def secular_identities(cfg, alpha, n, rng):
    """Indirect average, first-order term, quadrupole closed form, g2-independence
    and the full-vs-quadrupole remainder at p-points with the given alpha."""
    from .kepler import semi_major
    from .perihelia import p_frames
    from .secular import multipole_average, quadrupole_closed_form, quadrupole_p, secular_average

    m = cfg.masses
    z = secular_points(cfg, alpha, n, rng)
    L1, L2 = z[:, 0], z[:, 1]
    a1 = semi_major(L1, m.mbar1, m.M1)
    a2 = semi_major(L2, m.mbar2, m.M2)
    al = a1 / a2
    k = m.mbar1 * m.mbar2 / a2
    av = secular_average("p", z, m, tol=1e-12, Nmax=1 << 14)
    f0, f1, f2 = multipole_average("p", z, m)
    fr = p_frames(z)
    qc = quadrupole_closed_form(fr["C1"], fr["C2"], fr["P1"], L1, L2, al)
    P0, P1 = quadrupole_p(L1, L2, z[:, 2], z[:, 3], z[:, 9], z[:, 4])
    h = 1e-3
    zp, zm = z.copy(), z.copy()
    zp[:, 8] += h
    zm[:, 8] -= h
    dg2 = (multipole_average("p", zp, m)[2] - multipole_average("p", zm, m)[2]) / (2 * h)
    remainder = np.abs(av.direct / (-k) - 1 - al ** 2 * (P0 + P1))
    # the octupole term carries e2 / (1 - e2^2)^(5/2); normalize by (L2/G2)^5
    bound = REMAINDER_BOUND * al ** 3 * (L2 / z[:, 2]) ** 5 / np.maximum(1 - 3 * al, 0.05)
    return dict(
        indirect=float(np.abs(av.indirect / k).max()),
        f1=float(np.abs(f1).max()),
        quadrupole_closed=float(np.abs((f2 - qc) / qc).max()),
        quadrupole_p=float(np.abs((al ** 2 * (P0 + P1) - qc) / qc).max()),
        dg2=float(np.abs(dg2).max()),
        remainder_over_alpha3=float((remainder / al ** 3).max()),
        remainder_over_bound=float((remainder / bound).max()),
        alpha=float(al.max()))


SECULAR_TOL = dict(indirect=1e-10, f1=1e-9, quadrupole_closed=1e-8, quadrupole_p=1e-8,
                   dg2=1e-8)
# full-minus-quadrupole remainder bound: C alpha^3 (L2/G2)^5 / max(1 - 3 alpha, 0.05)
REMAINDER_BOUND = 4.0


def cmd_secular_check(cfg, args, outdir):
    from .birkhoff import discriminant_grid, sigma_crosscheck
    from .dalembert import dalembert_verify, monomials, taylor_coefficients
    from .kepler import MassConfig

    sec = cfg["secular"]
    alpha = args.alpha or sec["alpha"]
    rng = cfg.rng()
    ident = secular_identities(cfg, alpha, int(sec["points"]), rng)
    checks = {k: (ident[k], tol) for k, tol in SECULAR_TOL.items()}
    checks["remainder_over_bound"] = (ident["remainder_over_bound"], 1.0)
    q = cfg["quadrature"]
    dal = []
    for Lam in sec["dalembert_Lambda"]:
        r = dalembert_verify(cfg.masses, tuple(Lam), N=q["cauchy_N"], Nl=q["Nl"],
                             domain=cfg.domain)
        dal.append(r.as_dict())
        worst = max(r.s1, r.s2, r.s3, r.s4) / r.scale
        checks[f"dalembert{tuple(Lam)}"] = (worst, r.tol)
    sm = sec["sigma_masses"]
    ms = MassConfig(sm["m0"], sm["m1"], sm["m2"], cfg.mu)
    cc = sigma_crosscheck(tuple(sec["sigma_Lambda"]), ms, N=q["cauchy_N"], Nl=q["Nl"],
                          domain=cfg.domain)
    checks["sigma_crosscheck"] = (cc.max_rel_err, 1e-6)
    dmin, smin, imag = discriminant_grid(cfg.masses, cfg.domain)
    checks["discriminant_positive"] = (0.0 if dmin > 0 else 1.0, 0.5)
    if args.emit_coefficients:
        Lam = sec["dalembert_Lambda"][0]
        rho = cfg.domain.eps0() / 4
        c = taylor_coefficients(Lam[0], Lam[1], cfg.masses, rho, q["cauchy_N"], q["Nl"])
        rows = [(*a, c[a].real, c[a].imag) for a in monomials(q["cauchy_N"], 4)]
        os.makedirs(outdir, exist_ok=True)
        write_csv(os.path.join(outdir, "dalembert_coefficients.csv"),
                  ["a1", "a2", "a3", "a1s", "a2s", "a3s", "re", "im"], rows)
    failed = {k: v for k, v in checks.items() if not v[0] < v[1]}
    res = dict(identities=ident, dalembert=dal,
               sigma=dict(rel_err=cc.rel_err, condition=cc.condition, alpha=cc.closed.alpha),
               discriminant=dict(min=dmin, min_s2_minus_stilde2=smin, max_imag=imag),
               checks={k: dict(value=v[0], tol=v[1], passed=bool(v[0] < v[1]))
                       for k, v in checks.items()})
    diag = {}
    if failed:
        name = max(failed, key=lambda k: failed[k][0] / failed[k][1])
        diag = dict(worst=name, value=failed[name][0], tol=failed[name][1])
    return not failed, res, diag


def default_integration_point(cfg):
    from .jrd import JrdCoords
    from .kepler import lambda_of_a

    m = cfg.masses
    L1 = float(lambda_of_a(1.0, m.mbar1, m.M1))
    L2 = float(lambda_of_a(20.0, m.mbar2, m.M2))
    return "jrd", JrdCoords(Lambda1=L1, Lambda2=L2, G1=0.95 * L1, G2=0.9 * L2,
                            G=0.95 * L1 + 0.85 * L2, Z=0.3 * L1, ell1=0.3, ell2=1.0,
                            gamma1=0.4, gamma2=2.0, gamma=0.7, zeta=0.2).as_array()


def cmd_integrate(cfg, args, outdir):
    from .canonicity import get_chart
    from .dynamics import cyclic_validation, integrate

    sec = cfg["integrate"]
    chart, point = sec["chart"], sec["point"]
    if point is None:
        chart, point = default_integration_point(cfg)
    point = np.asarray(point, dtype=float)
    if point.shape != (12,):
        raise ConfigError("integrate.point must have 12 entries")
    if chart == "cartesian":
        z0 = point
    elif chart in ("jrd", "p", "rps_pi"):
        z0 = get_chart(chart).forward(point[None], cfg.masses)[0]
    else:
        raise ConfigError(f"integrate.chart must be cartesian, jrd, p or rps_pi, got {chart!r}")
    T = args.T or sec["T"]
    scheme = args.scheme or sec["scheme"]
    tr = integrate(z0, cfg.masses, sec["dt"], T, scheme)
    res = dict(energy_drift=tr.energy_drift, C_drift=tr.C_drift, flag=tr.flag,
               samples=int(len(tr.times)), t_end=float(tr.times[-1]), scheme=scheme)
    tol = sec["tol"]
    ok = tr.energy_drift < tol and tr.C_drift < tol and tr.flag is None
    for ch in ("jrd", "p"):
        try:
            cv = cyclic_validation(tr, ch)
            res[f"cyclic_{ch}"] = dict(G_drift=cv.G_drift, Z_drift=cv.Z_drift,
                                       angle_spread=cv.angle_spread)
            ok &= cv.flat < 1e-8
        except DomainError as e:
            res[f"cyclic_{ch}"] = dict(error=str(e))
    if sec["csv"]:
        os.makedirs(outdir, exist_ok=True)
        tr.to_csv(os.path.join(outdir, "trajectory.csv"))
    return bool(ok), res, {}


# ------------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="triad-charts")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="JSON config path")
        s.add_argument("--out", default=None, help="output directory (overrides config)")
        return s

    s = add("verify-symplectic", "symplectic and round-trip defects of the charts")
    s.add_argument("--chart", choices=["jrd", "rps_pi", "p"])
    s.add_argument("--points", type=int)
    s = add("torsion-scan", "nondegeneracy map of the leading torsion determinant")
    s.add_argument("--t-range", type=float, nargs=2, metavar=("LO", "HI"))
    add("equilibrium", "classification of the coplanar equilibria and whisker fits")
    s = add("secular-check", "secular identities, selection rules, sigma cross-check")
    s.add_argument("--alpha", type=float)
    s.add_argument("--emit-coefficients", action="store_true")
    s = add("integrate", "full integration with conservation and cyclicity checks")
    s.add_argument("--T", type=float)
    s.add_argument("--scheme", choices=["dop853", "wh", "wh4"])
    return p


COMMANDS = {
    "verify-symplectic": lambda cfg, a, out: cmd_verify_symplectic(cfg, a),
    "torsion-scan": cmd_torsion_scan,
    "equilibrium": cmd_equilibrium,
    "secular-check": cmd_secular_check,
    "integrate": cmd_integrate,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "verify-symplectic" and args.points is not None and args.points < 1:
            raise ConfigError("--points must be >= 1")
        if getattr(args, "alpha", None) is not None and not 0 < args.alpha < 1:
            raise ConfigError("0 < alpha < 1 violated (--alpha)")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = args.out or cfg["output_dir"]
    try:
        ok, res, diag = COMMANDS[args.command](cfg, args, outdir)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as e:
        ok, res, diag = False, {}, dict(error=str(e))
    res["diagnostics"] = diag
    path = write_report(cfg, args.command, ok, res, outdir)
    status = "pass" if ok else "FAIL"
    print(f"{args.command}: {status} ({path})")
    if diag:
        print(json.dumps(_clean(diag), default=_jsonable), file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
