"""Batch front door: JSON run-specs in, JSON/CSV reports out.

Subcommands: evaluate, optimize, lhv-bound, scan, selftest.
Exit codes: 0 success, 2 malformed spec, 3 unknown family/functional,
4 capacity exceeded, 5 unwritable output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .errors import CapacityError, ValidationError
from .spin import SpinQuantum, UnitVector
from .states import (
    angular_momentum_eigenstate,
    dicke,
    ghz,
    maximally_entangled,
    relative_phase,
    rm_weighted,
    separable_mixture,
    singlet,
    werner,
)
from .functionals import (
    cfrd_margin,
    cfrd_quadrature_margin,
    cglmp_I,
    cglmp_functional,
    chsh_value,
    drummond_margin,
    generalized_chsh_functional,
    mabk_value,
    mermin_check,
    reid_ratio,
    tura_value,
)
from .lhv import cglmp_scenario, enumerate_lhv_bound, symmetric_lhv_min, two_setting_spin_scenario
from .search import (
    ScanSpec,
    SearchConfig,
    mermin_coplanar_vectors,
    optimize_settings,
    optimize_weights_cfrd,
    scan_parameter,
)

EXIT_OK = 0
EXIT_BAD_SPEC = 2
EXIT_UNKNOWN_NAME = 3
EXIT_CAPACITY = 4
EXIT_UNWRITABLE = 5


class SpecError(Exception):
    """Structurally invalid run spec (exit 2)."""


class UnknownNameError(Exception):
    """Unknown state family or functional name (exit 3)."""


_STATE_FAMILIES = ("maximally_entangled", "relative_phase", "werner",
                   "angular_momentum_eigenstate", "singlet", "rm_weighted",
                   "ghz", "dicke", "separable_mixture")


def build_state(family: str, params: dict):
    """Construct a catalog state from its family name and parameters."""
    try:
        if family == "maximally_entangled":
            return maximally_entangled(int(params["n"]))
        if family == "relative_phase":
            return relative_phase(int(params["n"]), float(params["theta"]))
        if family == "werner":
            return werner(int(params["n"]), float(params["phi"]))
        if family == "angular_momentum_eigenstate":
            return angular_momentum_eigenstate(int(params["n_a"]), int(params["n_b"]),
                                               float(params["j"]), float(params["k"]))
        if family == "singlet":
            return singlet(int(params["two_s"]))
        if family == "rm_weighted":
            return rm_weighted(SpinQuantum(int(params["two_s"])), params["r"])
        if family == "ghz":
            return ghz(int(params["n"]))
        if family == "dicke":
            return dicke(int(params["n"]), int(params["k"]))
        if family == "separable_mixture":
            comps = [(c["weight"], np.array(c["rho_a"]), np.array(c["rho_b"]))
                     for c in params["components"]]
            return separable_mixture(comps)
    except KeyError as exc:
        raise SpecError(f"family {family!r} is missing parameter {exc}") from exc
    raise UnknownNameError(f"unknown state family {family!r}")


def _unit(v) -> UnitVector:
    return UnitVector.from_xyz(*[float(x) for x in v])


def _evaluate(spec: dict):
    func = spec.get("functional", {})
    name = func.get("name")
    params = func.get("params", {})
    settings = spec.get("settings", {})

    if name == "drummond":
        margin = drummond_margin(int(params["J"]), float(params["theta"]))
        return {"functional": "drummond", "value": margin, "bound": 0.0,
                "margin": margin, "violation": margin > 1e-9,
                "state": {"family": "drummond_limit", "J": int(params["J"]),
                          "theta": float(params["theta"])}}
    if name == "mabk":
        return mabk_value(int(params["n"])).to_dict()
    if name == "cglmp_I":
        value = cglmp_I(params["tables"], int(params["d"]))
        return {"functional": "cglmp_I", "value": value,
                "claimed_lhvt_bound": 3.0, "hvt_bound": 4.0}

    state_spec = spec.get("state")
    if not state_spec:
        raise SpecError("evaluate needs a state for this functional")
    state = build_state(state_spec.get("family"), state_spec.get("params", {}))

    if name == "chsh":
        vs = [_unit(settings[k]) for k in ("u1", "u2", "v1", "v2")]
        return chsh_value(state, *vs).to_dict()
    if name == "mermin":
        if "theta" in settings:
            a, b, c = mermin_coplanar_vectors(float(settings["theta"]))
        else:
            a, b, c = (_unit(settings[k]) for k in ("a", "b", "c"))
        kw = {"reading": settings["reading"]} if "reading" in settings else {}
        return mermin_check(state, a, b, c, **kw).to_dict()
    if name == "reid":
        return reid_ratio(state, float(settings["theta"]), float(settings["theta_star"]),
                          float(settings["phi"]), float(settings["phi_star"])).to_dict()
    if name == "tura":
        return tura_value(state, _unit(settings["n0"]), _unit(settings["n1"])).to_dict()
    if name == "cfrd":
        from .states import spin_correlation_matrix  # noqa: F401  (observable default below)
        from .spin import build_spin_rep
        rep_a = build_spin_rep(state.s_a)
        rep_b = build_spin_rep(state.s_b)
        return cfrd_margin(state, rep_a.sx, rep_a.sy, rep_b.sx, rep_b.sy).to_dict()
    if name == "cfrd_quadrature":
        value = cfrd_quadrature_margin(state)
        return {"functional": "cfrd_quadrature", "value": value, "bound": 0.0,
                "margin": value, "violation": False, "state": dict(state.meta)}
    raise UnknownNameError(f"unknown functional {name!r}")


def _search_config(spec: dict) -> SearchConfig:
    search = spec.get("search", {})
    if "seed" not in search:
        raise SpecError("optimize specs must carry an explicit seed")
    return SearchConfig(
        seed=int(search["seed"]),
        restarts=int(search.get("restarts", 32)),
        max_evals_per_restart=int(search.get("max_evals_per_restart", 2000)),
        tolerance=float(search.get("tolerance", 1e-8)),
        initial_step=float(search.get("initial_step", 0.5)),
        coplanar=bool(search.get("coplanar", False)),
    )


def _optimize(spec: dict):
    name = spec.get("functional", {}).get("name")
    params = spec.get("functional", {}).get("params", {})
    config = _search_config(spec)
    if name == "cfrd_weights":
        return optimize_weights_cfrd(SpinQuantum(int(params["two_s"])), config).to_dict()
    if name not in ("chsh", "mermin", "reid", "tura"):
        raise UnknownNameError(f"no optimizer for functional {name!r}")
    state_spec = spec.get("state")
    if not state_spec:
        raise SpecError("optimize needs a state")
    state = build_state(state_spec.get("family"), state_spec.get("params", {}))
    return optimize_settings(state, name, config).to_dict()


def _lhv_bound(spec: dict):
    func = spec.get("functional", {})
    name = func.get("name")
    params = func.get("params", {})
    if name in ("chsh", "generalized_chsh"):
        two_a = int(params.get("two_s_a", 1))
        two_b = int(params.get("two_s_b", 1))
        scenario = two_setting_spin_scenario(two_a, two_b)
        functional = generalized_chsh_functional(two_a, two_b)
        bound, witness = enumerate_lhv_bound(scenario, functional, "max")
        return {"functional": functional.name, "enumerated_bound": bound,
                "stated_bound": 0.5 * two_a * two_b,
                "witness": {"a": list(witness.outcomes_a), "b": list(witness.outcomes_b)}}
    if name == "cglmp":
        d = int(params["d"])
        bound, witness = enumerate_lhv_bound(cglmp_scenario(d), cglmp_functional(d), "max")
        return {"functional": f"cglmp_d{d}", "enumerated_bound": bound,
                "claimed_lhvt_bound": 3.0, "hvt_bound": 4.0,
                "agrees_with_claimed_lhvt_bound": abs(bound - 3.0) <= 1e-9,
                "satisfies_hvt_bound": bound <= 4.0 + 1e-9,
                "witness": {"a": list(witness.outcomes_a), "b": list(witness.outcomes_b)}}
    if name == "tura_symmetric":
        n = int(params["n"])
        wmin, counts = symmetric_lhv_min(n)
        return {"functional": "tura", "n_atoms": n, "enumerated_min": wmin,
                "stated_bound": 0.0, "witness_counts": list(counts)}
    raise UnknownNameError(f"no LHV enumeration preset for {name!r}")


def _scan(spec: dict):
    scan = spec.get("scan", {})
    grid_def = scan.get("grid")
    if isinstance(grid_def, dict):
        grid = np.linspace(float(grid_def["start"]), float(grid_def["stop"]),
                           int(grid_def["count"]))
    else:
        grid = np.asarray(grid_def, dtype=float)
    search = None
    if spec.get("settings") == "optimize":
        search = _search_config(spec)
    state_spec = spec.get("state", {})
    family = state_spec.get("family")
    if family not in _STATE_FAMILIES:
        raise UnknownNameError(f"unknown state family {family!r}")
    sspec = ScanSpec(
        parameter=scan.get("parameter"),
        grid=tuple(grid),
        functional=spec.get("functional", {}).get("name"),
        state_family=family,
        state_params=state_spec.get("params", {}),
        settings=spec.get("settings"),
        search=search,
    )
    return scan_parameter(sspec)


def selftest() -> bool:
    """Compact invariant suite: spin algebra, state constructors,
    probability identities, and the CHSH enumeration bound."""
    from .spin import build_spin_rep, clebsch_gordan, spin_component
    from .states import correlator, joint_distribution, maximally_entangled as me
    from .spin import SpinQuantum as SQ

    ok = True

    def check(label, cond):
        nonlocal ok
        print(f"  [{'ok' if cond else 'FAIL'}] {label}", file=sys.stderr)
        ok = ok and cond

    for two_s in (1, 2, 7, 16):
        rep = build_spin_rep(SQ(two_s))
        comm = rep.sx @ rep.sy - rep.sy @ rep.sx - 1j * rep.sz
        check(f"commutator 2s={two_s}", float(np.max(np.abs(comm))) < 1e-12)
        casimir = rep.sx @ rep.sx + rep.sy @ rep.sy + rep.sz @ rep.sz
        target = rep.s.s * (rep.s.s + 1) * np.eye(rep.dim)
        check(f"casimir 2s={two_s}", float(np.max(np.abs(casimir - target))) < 1e-12)
    check("clebsch selection rule", clebsch_gordan(1, 0, 1, 0, 2, 1) == 0.0)
    check("clebsch singlet", abs(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) - 1 / math.sqrt(2)) < 1e-12)
    state = me(1)
    rep = build_spin_rep(SQ(1))
    check("bell SzSz = 1/4", abs(correlator(state, rep.sz, rep.sz) - 0.25) < 1e-12)
    obs = spin_component(rep, UnitVector(0.0, 0.0, 1.0))
    _, _, table = joint_distribution(state, obs, obs)
    check("joint distribution sums to 1", abs(table.sum() - 1.0) < 1e-9)
    bound, _ = enumerate_lhv_bound(two_setting_spin_scenario(1, 1),
                                   generalized_chsh_functional(1, 1), "max")
    check("enumerated CHSH bound = 1/2", abs(bound - 0.5) < 1e-12)
    wmin, _ = symmetric_lhv_min(4)
    check("symmetric LHV min >= 0", wmin >= 0.0)
    return ok


# ---------------------------------------------------------------------------
# serialization


def _round_sig(x: float, sig: int = 12) -> float:
    if x == 0 or not math.isfinite(x):
        return x
    return float(f"{x:.{sig}g}")


def _round_tree(obj):
    if isinstance(obj, float):
        return _round_sig(obj)
    if isinstance(obj, (np.floating,)):
        return _round_sig(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: _round_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_tree(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_round_tree(v) for v in obj.tolist()]
    return obj


def emit_report(envelope: dict, path: str | None, fmt: str = "json"):
    """Write the envelope as JSON (stable field order) or, for scan
    tables, CSV with one row per grid point; 12 significant digits."""
    if fmt == "json":
        text = json.dumps(_round_tree(envelope), sort_keys=True, indent=2) + "\n"
    elif fmt == "csv":
        rows = envelope.get("table")
        if rows is None:
            raise ValidationError("csv output needs a scan table")
        cols = [k for k in rows[0] if k != "settings"]
        lines = [",".join(cols)]
        for row in rows:
            cells = []
            for c in cols:
                v = row[c]
                cells.append(f"{v:.12g}" if isinstance(v, float) else str(v))
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
    else:
        raise SpecError(f"unknown format {fmt!r}")
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise PermissionError(str(exc)) from exc


def _summarize(payload, command: str) -> str:
    if command == "scan":
        return f"scan: {len(payload)} rows"
    if isinstance(payload, dict):
        if "margin" in payload:
            flag = "VIOLATION" if payload.get("violation") else "no violation"
            return (f"{payload.get('functional', command)}: value={payload.get('value')} "
                    f"bound={payload.get('bound')} margin={payload.get('margin')} ({flag})")
        if "enumerated_bound" in payload:
            return f"{payload.get('functional')}: LHV bound {payload['enumerated_bound']}"
        if "enumerated_min" in payload:
            return f"{payload.get('functional')}: LHV min {payload['enumerated_min']}"
    return f"{command}: done"


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bellkit",
                                     description="Bell functional evaluation toolkit")
    parser.add_argument("command",
                        choices=["evaluate", "optimize", "lhv-bound", "scan", "selftest"])
    parser.add_argument("--spec", help="JSON run-spec file")
    parser.add_argument("--out", help="output path (default stdout)")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for interface compatibility; evaluation is "
                             "deterministic regardless")
    parser.add_argument("--seed", type=int, help="override the spec seed")
    args = parser.parse_args(argv)

    if args.command == "selftest":
        return EXIT_OK if selftest() else 1

    if not args.spec:
        print("error: --spec is required", file=sys.stderr)
        return EXIT_BAD_SPEC
    try:
        with open(args.spec, encoding="utf-8") as fh:
            spec = json.load(fh)
        if not isinstance(spec, dict):
            raise SpecError("spec must be a JSON object")
        if args.seed is not None:
            spec.setdefault("search", {})["seed"] = args.seed
        t0 = time.perf_counter()
        if args.command == "evaluate":
            payload = _evaluate(spec)
        elif args.command == "optimize":
            payload = _optimize(spec)
        elif args.command == "lhv-bound":
            payload = _lhv_bound(spec)
        else:
            payload = _scan(spec)
        wall = time.perf_counter() - t0
    except (json.JSONDecodeError, OSError, SpecError, KeyError, TypeError) as exc:
        print(f"error: malformed spec: {exc}", file=sys.stderr)
        return EXIT_BAD_SPEC
    except UnknownNameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_NAME
    except CapacityError as exc:
        print(f"error: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ValidationError as exc:
        print(f"error: malformed spec: {exc}", file=sys.stderr)
        return EXIT_BAD_SPEC

    envelope = {
        "tool": "bellkit",
        "version": __version__,
        "command": args.command,
        "spec": spec,
        "wall_time_s": wall,
    }
    if "seed" in spec.get("search", {}):
        envelope["seed"] = spec["search"]["seed"]
    if args.command == "scan":
        envelope["table"] = payload
    else:
        envelope["report"] = payload
    try:
        emit_report(envelope, args.out, args.format)
    except PermissionError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    print(_summarize(payload, args.command), file=sys.stderr)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
