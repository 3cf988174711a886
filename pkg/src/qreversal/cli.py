"""Batch front-end.

Usage:
    qreversal verify CONFIG [--out PATH] [--tol TOL] [--check NAME ...]
    qreversal construct CONFIG [--method isometry-completion|kraus-theorem3] [--out PATH]
    qreversal check-db CONFIG [--n-max N] [--tol TOL] [--out PATH]
    qreversal demo random-unitary [--d D] [--d-e DE] [--seed S]
    qreversal demo collision-gksl [--dt-sweep 1e-2:1e-5] [--seed S]

Configs and reports are JSON. Complex matrices are nested lists whose
innermost entries are ``[re, im]`` pairs. Exit codes: 0 all checks pass,
1 a check failed (or sigma is not full-rank in ``construct``), 2 bad input.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from . import __version__
from .antiunitary import Conjugation
from .channel import KrausChannel, channel_from_unitary, steady_state
from .detailed_balance import check_sqdb_direct, check_sqdb_theta, solve_c_matrix, C_RESIDUAL_TOL
from .errors import NotFullRankError, ReversalError
from .models import (
    CollisionSpec,
    RandomUnitarySpec,
    build_collision_unitary,
    build_random_unitary_model,
    build_reverser_variant,
    collision_kraus_discrepancy,
    fit_order,
    gksl_reverser_ops,
    gksl_steady_state,
    gksl_superop,
    random_collision_spec,
    reverser_hamiltonian,
    thermal_qubit_spec,
    thermal_qubit_state,
)
from .reversal import (
    CHECKS,
    PASS_TOL,
    ReversalModel,
    ReversalReport,
    build_reverser_from_kraus,
    build_reverser_unitary,
    reverser_kraus,
    run_checks,
)

VERIFY_CHECKS = ["special_reversal", "theorem3", "theorem1", "lemma_fg", "corollary_steady"]
REVERSERS = ("exa_V", "wrong_sign", "none")
METHODS = {"isometry-completion": build_reverser_unitary, "kraus-theorem3": build_reverser_from_kraus}


class ConfigError(ReversalError):
    pass


# ----------------------------------------------------------------------
# encoding
# ----------------------------------------------------------------------

def encode(a) -> list:
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def decode(obj, ndim: int, name: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: not a rectangular numeric array") from None
    if arr.ndim != ndim + 1 or arr.shape[-1] != 2:
        raise ConfigError(f"{name}: expected a {ndim}-d array of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _matrix(cfg, key, required=True):
    if key not in cfg or cfg[key] is None:
        if required:
            raise ConfigError(f"missing field {key!r}")
        return None
    m = decode(cfg[key], 2, key)
    if m.shape[0] != m.shape[1]:
        raise ConfigError(f"{key}: matrix must be square, got {m.shape}")
    return m


def _vector(cfg, key, required=True):
    if key not in cfg or cfg[key] is None:
        if required:
            raise ConfigError(f"missing field {key!r}")
        return None
    return decode(cfg[key], 1, key)


def digest(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


# ----------------------------------------------------------------------
# config -> model
# ----------------------------------------------------------------------

def _theta(cfg, d):
    basis = _matrix(cfg, "theta_basis", required=False)
    return Conjugation.standard(d) if basis is None else Conjugation(basis)


def _random_unitary_spec(cfg, seed) -> RandomUnitarySpec:
    _reverser_kind(cfg)
    d = int(cfg.get("d", 2))
    d_e = int(cfg.get("d_E", 2))
    if "H" in cfg:
        return RandomUnitarySpec(
            h=_matrix(cfg, "H"),
            x=_matrix(cfg, "X"),
            lambdas=[float(x) for x in cfg["lambda"]],
            chi_amps=_vector(cfg, "chi"),
            t=float(cfg["t"]),
            c_phase=float(cfg.get("c_phase", 0.0)),
        )
    return RandomUnitarySpec.random(d, d_e, np.random.default_rng(seed), real=bool(cfg.get("real", False)))


def _collision_spec(cfg) -> CollisionSpec:
    return CollisionSpec(
        h=_matrix(cfg, "H"),
        jump_ops=[decode(op, 2, "jump_ops") for op in cfg.get("jump_ops", [])],
        dt=float(cfg["dt"]),
        fock_cutoff=int(cfg.get("fock_cutoff", 1)),
        c_phase=float(cfg.get("c_phase", 0.0)),
    )


def _sigma_for(cfg, f: KrausChannel) -> tuple[np.ndarray, bool]:
    sigma = _matrix(cfg, "sigma", required=False)
    if sigma is not None:
        return sigma, False
    ss = steady_state(f)
    if not ss.full_rank:
        raise NotFullRankError("the steady state of F is not full-rank; the reverser construction assumes a full-rank steady state")
    return ss.sigma, True


def _reverser_kind(cfg) -> str:
    kind = cfg.get("reverser", "exa_V")
    if kind not in REVERSERS:
        raise ConfigError(f"unknown reverser {kind!r}; expected one of {', '.join(REVERSERS)}")
    return kind


def model_from_config(cfg: dict, seed: int | None = None, need_reverser: bool = True) -> ReversalModel:
    """Build a ReversalModel from a parsed config; V comes from the config or the random-unitary recipe."""
    kind = cfg.get("kind", "explicit")
    seed = cfg.get("seed", 0) if seed is None else seed
    if kind == "random_unitary":
        spec = _random_unitary_spec(cfg, seed)
        w = _matrix(cfg, "W", required=False)
        model = build_random_unitary_model(spec, w, _theta(cfg, spec.d))
        reverser = _reverser_kind(cfg)
        if reverser == "wrong_sign":
            v = build_reverser_variant(spec, 1.0, model.w, model.theta, sign=1.0)
            model = model.with_reverser(v, model.chi_tilde)
        elif reverser == "none":
            model = model.with_reverser(None, None)
        if "V" in cfg:
            model = model.with_reverser(_matrix(cfg, "V"), _vector(cfg, "chi_tilde"))
    elif kind in ("explicit", "collision"):
        if kind == "collision":
            spec = _collision_spec(cfg)
            u, _ = build_collision_unitary(spec)
            chi = np.eye(spec.d_e)[0]
        else:
            u = _matrix(cfg, "U")
            chi = _vector(cfg, "chi")
        if u.shape[0] % chi.shape[0]:
            raise ConfigError(f"U of dim {u.shape[0]} is not a multiple of d_E = {chi.shape[0]}")
        f = channel_from_unitary(u, chi)
        sigma, _ = _sigma_for(cfg, f)
        d = sigma.shape[0]
        if d * chi.shape[0] != u.shape[0]:
            raise ConfigError(f"sigma of dim {d} inconsistent with U of dim {u.shape[0]} and d_E = {chi.shape[0]}")
        frame = cfg.get("frame")
        model = ReversalModel(
            u=u,
            chi=chi,
            sigma=sigma,
            w=_matrix(cfg, "W", required=False),
            theta=_theta(cfg, d),
            v=_matrix(cfg, "V", required=False),
            chi_tilde=_vector(cfg, "chi_tilde", required=False),
            u_e=_matrix(cfg, "U_E", required=False),
            frame=None if frame is None else decode(frame, 2, "frame"),
        )
    else:
        raise ConfigError(f"unknown model kind {kind!r}")
    if need_reverser and (model.v is None or model.chi_tilde is None):
        raise ConfigError("config has no reverser (V and chi_tilde); run `construct` first")
    return model


def explicit_config(model: ReversalModel) -> dict:
    cfg = {
        "kind": "explicit",
        "U": encode(model.u),
        "chi": encode(model.chi),
        "sigma": encode(model.sigma),
        "W": encode(model.w),
        "theta_basis": encode(model.theta.basis),
    }
    if model.v is not None:
        cfg["V"] = encode(model.v)
        cfg["chi_tilde"] = encode(model.chi_tilde)
    return cfg


# ----------------------------------------------------------------------
# reporting
# ----------------------------------------------------------------------

def threshold_record(name: str, value: float, threshold: float, above: bool = True, **extra) -> dict:
    ok = value >= threshold if above else value < threshold
    return {"name": name, "pass": bool(ok), "value": float(value), "threshold": float(threshold), **extra}


def make_report(command: str, cfg_digest: str | None, records: list[dict], t0: float, **extra) -> dict:
    return {
        "tool": "qreversal",
        "version": __version__,
        "command": command,
        "model_digest": cfg_digest,
        "checks": records,
        "all_pass": all(r["pass"] for r in records),
        **extra,
        "wall_time_s": round(time.perf_counter() - t0, 6),
    }


def emit(doc: dict, out: str | None):
    text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------

def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    tol = args.tol if args.tol is not None else float(cfg.get("tolerances", {}).get("pass", PASS_TOL))
    model = model_from_config(cfg, args.seed)
    names = args.check or VERIFY_CHECKS
    records = [r.to_dict() for r in run_checks(model, names, tol)]
    report = make_report("verify", digest(cfg), records, t0)
    emit(report, args.out)
    for r in records:
        if not r["pass"]:
            print(f"FAILED {r['name']}: residual {r['residual']:.3e} >= {r['tolerance']:.1e}", file=sys.stderr)
    return 0 if report["all_pass"] else 1


def cmd_construct(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    tol = args.tol if args.tol is not None else float(cfg.get("tolerances", {}).get("pass", PASS_TOL))
    bare = {k: v for k, v in cfg.items() if k not in ("V", "chi_tilde", "U_E")}
    if cfg.get("kind") == "random_unitary":
        _reverser_kind(cfg)
        bare["reverser"] = "none"
    try:
        model = model_from_config(bare, args.seed, need_reverser=False)
    except NotFullRankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    chi_tilde = _vector(cfg, "chi_tilde", required=False)
    chi_tilde = model.chi if chi_tilde is None else chi_tilde
    v = METHODS[args.method](model, chi_tilde)
    built = model.with_reverser(v, chi_tilde)
    records = [r.to_dict() for r in run_checks(built, VERIFY_CHECKS, tol)]
    out = explicit_config(built)
    out["tolerances"] = {"pass": tol}
    out["kraus_g"] = [encode(g) for g in reverser_kraus(built)]
    out["construction"] = make_report("construct", digest(cfg), records, t0, method=args.method, source_kind=cfg.get("kind", "explicit"))
    emit(out, args.out)
    return 0 if out["construction"]["all_pass"] else 1


def _db_inputs(cfg, seed):
    if "kraus" in cfg:
        f = KrausChannel([decode(k, 2, "kraus") for k in cfg["kraus"]])
    else:
        f = channel_from_unitary(*_unitary_and_chi(cfg, seed))
    sigma, _ = _sigma_for(cfg, f)
    return f, sigma, _theta(cfg, f.d_in)


def _unitary_and_chi(cfg, seed):
    kind = cfg.get("kind", "explicit")
    if kind == "random_unitary":
        spec = _random_unitary_spec(cfg, seed)
        return spec.interaction(), spec.chi_amps
    if kind == "collision":
        spec = _collision_spec(cfg)
        return build_collision_unitary(spec)[0], np.eye(spec.d_e)[0]
    return _matrix(cfg, "U"), _vector(cfg, "chi")


def cmd_check_db(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    tol = args.tol if args.tol is not None else float(cfg.get("tolerances", {}).get("pass", PASS_TOL))
    f, sigma, theta = _db_inputs(cfg, cfg.get("seed", 0) if args.seed is None else args.seed)
    records = [
        check_sqdb_theta(f, sigma, theta, tol).to_dict(),
        check_sqdb_direct(f, sigma, theta, args.n_max, tol).to_dict(),
    ]
    c = solve_c_matrix(f, sigma, theta, strict=False)
    records.append({
        "name": "c_matrix",
        "pass": c.valid,
        "residual": c.residual,
        "tolerance": C_RESIDUAL_TOL,
        "witnesses": c.to_dict(),
    })
    report = make_report("check-db", digest(cfg), records, t0, c=encode(c.c), n_max=args.n_max)
    emit(report, args.out)
    return 0 if report["all_pass"] else 1


def _demo_random_unitary(args, t0) -> dict:
    rng = np.random.default_rng(args.seed)
    spec = RandomUnitarySpec.random(args.d, args.d_e, rng)
    model = build_random_unitary_model(spec)
    records = [r.to_dict() for r in run_checks(model, list(CHECKS), args.tol)]
    for name, build in METHODS.items():
        built = model.with_reverser(build(model, model.chi_tilde), model.chi_tilde)
        for r in run_checks(built, ["special_reversal", "theorem3"], args.tol):
            rec = r.to_dict()
            rec["name"] = f"{name}/{rec['name']}"
            records.append(rec)
    h_b = reverser_hamiltonian(spec.h, model.w, model.theta, spec.c_phase)
    params = {"d": spec.d, "d_E": spec.d_e, "t": spec.t, "c_phase": spec.c_phase, "H_B": encode(h_b)}
    return make_report("demo random-unitary", digest({"seed": args.seed, "d": args.d, "d_E": args.d_e}), records, t0, parameters=params)


def parse_sweep(text: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"--dt-sweep expects a:b, got {text!r}") from None
    if not (a > 0 and b > 0) or a == b:
        raise ConfigError("--dt-sweep bounds must be positive and distinct")
    return max(a, b), min(a, b)


def _table(title, header, rows):
    print(title, file=sys.stderr)
    print("  " + "  ".join(f"{h:>12s}" for h in header), file=sys.stderr)
    for row in rows:
        print("  " + "  ".join(f"{x:12.4e}" for x in row), file=sys.stderr)


def collision_sweep(dt_max: float, dt_min: float, seed: int = 0, n_points: int = 8) -> tuple[list[dict], dict]:
    """Convergence study of the collision model; returns check records and raw tables."""
    dts = np.geomspace(dt_max, dt_min, n_points)
    records, tables = [], {}

    # Kraus expansion of the thermal qubit
    rows = []
    for dt in dts:
        spec = thermal_qubit_spec(dt)
        _, f = build_collision_unitary(spec)
        r0 = np.linalg.norm(f.kraus[0] - np.eye(spec.d) - spec.drift() * dt)
        r1 = max(np.linalg.norm(f.kraus[j + 1] - op * np.sqrt(dt)) for j, op in enumerate(spec.jump_ops))
        rows.append((dt, r0, r1))
    rows = np.array(rows)
    o0, r2_0 = fit_order(rows[:, 0], rows[:, 1])
    o1, r2_1 = fit_order(rows[:, 0], rows[:, 2])
    records.append(threshold_record("f0_order", o0, 1.4, r_squared=r2_0))
    records.append(threshold_record("fj_order", o1, 0.9, r_squared=r2_1))
    tables["kraus_expansion"] = rows.tolist()
    _table("Kraus expansion residuals (thermal qubit)", ["dt", "|f0-I-G dt|", "|fj-Lj sqdt|"], rows)

    # detailed-balance closed form of the reverser operators
    spec = thermal_qubit_spec(dts[0])
    sigma = thermal_qubit_state()
    rev = gksl_reverser_ops(spec, sigma)
    swap = [spec.jump_ops[1], spec.jump_ops[0]]
    closed_h = -spec.h + spec.c_phase * np.eye(spec.d)
    db_res = max([np.linalg.norm(rev.h - closed_h)] + [np.linalg.norm(a + b) for a, b in zip(rev.jump_ops, swap)])
    records.append(ReversalReport("gksl_db_closed_form", float(db_res), PASS_TOL).to_dict())

    # reverser Kraus match for a generic generator
    generic = random_collision_spec(2, 2, dts[0], np.random.default_rng(seed))
    sigma_g = gksl_steady_state(generic)
    disc = np.array([collision_kraus_discrepancy(generic.with_dt(dt), sigma_g) for dt in dts])
    od, r2_d = fit_order(np.sqrt(dts), disc)
    records.append(threshold_record("reverser_kraus_order_sqrt_dt", od, 0.9, r_squared=r2_d))
    tables["reverser_kraus"] = np.column_stack([dts, disc]).tolist()
    _table("Reverser Kraus discrepancy (generic generator)", ["dt", "discrepancy"], np.column_stack([dts, disc]))

    # semigroup limit under dt halving at t = 1
    exact = expm(gksl_superop(generic))
    rows = []
    dt = dt_max
    while dt >= dt_min * (1 - 1e-12):
        n = int(np.ceil(1.0 / dt - 1e-9))
        _, f = build_collision_unitary(generic.with_dt(1.0 / n))
        rows.append((1.0 / n, np.linalg.norm(np.linalg.matrix_power(f.superop(), n) - exact)))
        dt /= 2
    rows = np.array(rows)
    monotone = bool(np.all(np.diff(rows[:, 1]) < 0))
    records.append({"name": "semigroup_monotone", "pass": monotone, "errors": rows[:, 1].tolist()})
    tables["semigroup"] = rows.tolist()
    _table("Semigroup convergence |F_dt^n - exp(L)|", ["dt", "error"], rows)
    return records, tables


def cmd_demo(args) -> int:
    t0 = time.perf_counter()
    if args.name == "random-unitary":
        report = _demo_random_unitary(args, t0)
    elif args.name == "collision-gksl":
        hi, lo = parse_sweep(args.dt_sweep)
        records, tables = collision_sweep(hi, lo, args.seed)
        report = make_report("demo collision-gksl", digest({"seed": args.seed, "dt_sweep": [hi, lo]}), records, t0, tables=tables)
    else:
        raise ConfigError(f"unknown demo {args.name!r}")
    emit(report, args.out)
    return 0 if report["all_pass"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qreversal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qreversal {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tol=True):
        p.add_argument("--out", help="write the JSON document here instead of stdout")
        p.add_argument("--seed", type=int, default=None)
        if tol:
            p.add_argument("--tol", type=float, default=None, help="pass threshold (default 1e-9)")

    p = sub.add_parser("verify", help="run the reversal checkers on a model with a reverser")
    p.add_argument("config")
    p.add_argument("--check", action="append", choices=list(CHECKS))
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("construct", help="build a reverser unitary V for a model")
    p.add_argument("config")
    p.add_argument("--method", choices=list(METHODS), default="isometry-completion")
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("check-db", help="detailed-balance checks and the c matrix")
    p.add_argument("config")
    p.add_argument("--n-max", type=int, default=3)
    common(p)
    p.set_defaults(func=cmd_check_db)

    p = sub.add_parser("demo", help="run a worked example")
    p.add_argument("name", choices=["random-unitary", "collision-gksl"])
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--d-e", type=int, default=2)
    p.add_argument("--dt-sweep", default="1e-2:1e-5")
    common(p, tol=False)
    p.set_defaults(func=cmd_demo, tol=PASS_TOL)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if getattr(args, "seed", None) is None and args.command == "demo":
        args.seed = 0
    try:
        return args.func(args)
    except NotFullRankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ReversalError, KeyError, TypeError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
