"""Batch front end: ``coulomb2d <subcommand> --config run.json --out DIR``.

Exit codes: 0 success, 2 configuration error, 3 solver did not converge,
4 non-coercive problem or violated friction condition.  Output files are
staged in memory and written only once the run has finished; a
configuration error leaves the output directory untouched.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import __version__
from .bem import (
    LineMesh,
    assemble_A,
    assemble_S,
    decomposition_identity,
    equilibrium_potential,
    fourier_sgn_check,
    gap_function,
    nonexistence_probe,
    solve_steady_sliding,
)
from .config import CONFIGS, OperatorProbeSpec, modulus_dict
from .elasticity import ElasticModulus, InvalidModulus, isotropic_modulus, modulus_from_json, rotate_modulus
from .halfspace import HalfSpaceConstants, NonInvertibleSystem, QuadratureError, n2d_constants
from .vi import SolveStatus

EXIT_OK, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_NON_COERCIVE = 0, 2, 3, 4


class ConfigError(Exception):
    pass


# -- deterministic output -----------------------------------------------------------


def _num(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.10e}"


def csv_text(columns: list[tuple], rows) -> str:
    """CSV with a ``name [unit]`` header; floats are written with 11 significant digits.

    A column is ``(name, unit)`` or ``(name, unit, group)``.  Values below
    ``1e-11`` of the largest magnitude in their group (or below ``1e-14`` for
    dimensionless columns) are written as zero, so round-off noise does not
    leak into the files.
    """
    rows = [list(r) for r in rows]
    keys = [c[2] if len(c) > 2 else c[0] for c in columns]
    scale: dict = {}
    for r in rows:
        for j, v in enumerate(r):
            if isinstance(v, float) and math.isfinite(v):
                scale[keys[j]] = max(scale.get(keys[j], 0.0), abs(v))
    floor = [max(1e-11 * scale.get(k, 0.0), 1e-14 if c[1] == "1" else 0.0) for k, c in zip(keys, columns)]
    lines = [",".join(f"{c[0]} [{c[1]}]" for c in columns)]
    for r in rows:
        cells = []
        for j, v in enumerate(r):
            if isinstance(v, float):
                cells.append(_num(0.0 if abs(v) <= floor[j] else v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, SolveStatus):
        return obj.value
    return obj


def json_text(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_outputs(out_dir: Path, files: dict[str, str]):
    """Write every file to a sibling temporary directory first, then move them in."""
    out_dir.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=out_dir, prefix=".staging-") as tmp:
        for name, text in files.items():
            with open(Path(tmp) / name, "w", newline="\n") as fh:
                fh.write(text)
        for name in files:
            os.replace(Path(tmp) / name, out_dir / name)


# -- shared builders ----------------------------------------------------------------


def _modulus(spec) -> ElasticModulus:
    return modulus_from_json(modulus_dict(spec))


def _constants(cfg) -> HalfSpaceConstants:
    if getattr(cfg, "constants", None) is not None:
        c = cfg.constants
        return HalfSpaceConstants(c.C1, c.C2, c.C3, c.C4)
    return n2d_constants(_modulus(cfg.modulus))


def _line_mesh(kind: str, n: int) -> LineMesh:
    return LineMesh.graded(n) if kind == "graded" else LineMesh.uniform(n)


def _report(rep) -> dict:
    return rep.as_dict()


# -- constants ---------------------------------------------------------------------------


def _smoothness(m: ElasticModulus, h: float = 1e-3) -> dict:
    """Central differences of the constants in each Mandel entry at steps ``h`` and ``h/2``."""
    base = np.array(m.as_tuple())
    names = ["L11", "L12", "L13", "L22", "L23", "L33"]
    out = {}
    worst = 0.0
    for j, name in enumerate(names):
        ds = []
        for step in (h, h / 2):
            e = np.zeros(6)
            e[j] = step
            cp = n2d_constants(ElasticModulus.from_mandel(base + e))
            cm = n2d_constants(ElasticModulus.from_mandel(base - e))
            ds.append([(a - b) / (2 * step) for a, b in zip(_cvec(cp), _cvec(cm))])
        d1, d2 = np.array(ds)
        gap = float(np.max(np.abs(d1 - d2)) / max(1.0, float(np.max(np.abs(d2)))))
        worst = max(worst, gap)
        out[name] = {"h": list(d1), "h/2": list(d2), "relative_gap": gap}
    return {"step": h, "derivatives": out, "max_relative_gap": worst}


def _cvec(c: HalfSpaceConstants):
    return [c.C1, c.C2, c.C3, c.C4]


def cmd_constants(cfg, seed: int) -> tuple[int, dict]:
    m = _modulus(cfg.modulus)
    c = n2d_constants(m)
    doc = dict(c.as_dict(), alpha=c.alpha, determinant=c.determinant, modulus_mandel=list(m.as_tuple()))
    if cfg.smoothness:
        doc["smoothness"] = _smoothness(m)
    files = {"constants.json": json_text(doc)}
    cols = [("theta", "rad")] + [(k, "1/stiffness", "C") for k in ("C1", "C2", "C3", "C4")] + [("alpha", "1")]
    if cfg.sweep is not None:
        rows = []
        for th in np.linspace(cfg.sweep.start, cfg.sweep.stop, cfg.sweep.n):
            cr = n2d_constants(rotate_modulus(m, -float(th)))
            rows.append([float(th)] + _cvec(cr) + [cr.alpha])
        files["angle_sweep.csv"] = csv_text(cols, rows)
    if cfg.nu_sweep is not None:
        rows = []
        for nu in cfg.nu_sweep.nu:
            cr = n2d_constants(isotropic_modulus(cfg.nu_sweep.E, nu))
            rows.append([float(nu)] + _cvec(cr) + [cr.alpha])
        files["nu_sweep.csv"] = csv_text([("nu", "1")] + cols[1:], rows)
    return EXIT_OK, files


# -- kernels -----------------------------------------------------------------------------


def cmd_kernels(cfg, seed: int) -> tuple[int, dict]:
    rng = np.random.default_rng(seed)
    per_n = []
    for n in cfg.n:
        mesh = _line_mesh(cfg.mesh, n)
        S = assemble_S(mesh)
        A = assemble_A(mesh)
        t = -rng.random(n)
        lhs, rhs = decomposition_identity(mesh, t, S)
        per_n.append({
            "n": n,
            "S_min_eigenvalue": float(np.linalg.eigvalsh(S)[0]) if n <= 2048 else None,
            "S_asymmetry": float(np.max(np.abs(S - S.T))),
            "A_skew_defect": float(np.max(np.abs(A + A.T))),
            "decomposition_lhs": lhs,
            "decomposition_rhs": rhs,
        })
    pmesh = _line_mesh(cfg.potential_mesh, cfg.potential_n)
    pot = equilibrium_potential(pmesh, cfg.potential_sampling)
    target = math.log(2.0)
    doc = {
        "levels": per_n,
        "equilibrium_potential": {
            "n": cfg.potential_n, "mesh": cfg.potential_mesh, "sampling": cfg.potential_sampling,
            "target": target, "max_relative_deviation": float(np.max(np.abs(pot - target)) / target),
        },
        "fourier_sgn_defect": fourier_sgn_check(),
        "seed": seed,
    }
    files = {
        "kernels.json": json_text(doc),
        "equilibrium_potential.csv": csv_text(
            [("x_mid", "length"), ("potential", "1")], zip(pmesh.midpoints.tolist(), pot.tolist())),
    }
    return EXIT_OK, files


# -- steady sliding ------------------------------------------------------------------------


def _slide_csv(mesh, res) -> str:
    return csv_text([("x_mid", "length"), ("t", "force/length"), ("u_n", "length")],
                    zip(mesh.midpoints.tolist(), res.t.tolist(), res.u_n.tolist()))


def cmd_steady_slide(cfg, seed: int) -> tuple[int, dict]:
    c = _constants(cfg)
    try:
        g = gap_function(cfg.gap.model_dump())
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"gap: {exc}") from exc
    kw = dict(solver=cfg.solver, omega=cfg.omega, tol=cfg.tol)
    mesh = _line_mesh(cfg.mesh, cfg.n)
    res = solve_steady_sliding(mesh, c, cfg.f, cfg.w_sign, g, **kw)
    threshold = {
        "kappa": res.kappa, "f_critical": res.f_critical, "classification": res.classification,
        "f": cfg.f, "w_sign": cfg.w_sign,
        "nonexistence_expected": bool(res.kappa < 0),
    }
    files = {"threshold.json": json_text(threshold)}
    if res.report.status is SolveStatus.NON_COERCIVE:
        doc = {"status": res.report.status.value, "report": _report(res.report), "threshold": threshold,
               "probe": res.probe.as_dict() if res.probe is not None else None}
        files["report.json"] = json_text(doc)
        return EXIT_NON_COERCIVE, files
    doc = {"status": res.report.status.value, "report": _report(res.report), "threshold": threshold,
           "total_load": res.total_load, "constants": c.as_dict()}
    if cfg.refine:
        loads = [res.total_load]
        for k in (2, 4):
            r = solve_steady_sliding(_line_mesh(cfg.mesh, k * cfg.n), c, cfg.f, cfg.w_sign, g, **kw)
            loads.append(r.total_load)
        d1, d2 = loads[0] - loads[1], loads[1] - loads[2]
        ratio = d1 / d2 if d2 != 0 else math.inf
        doc["refinement"] = {
            "n": [cfg.n, 2 * cfg.n, 4 * cfg.n], "total_load": loads, "convergence_ratio": ratio,
            "observed_order": math.log2(abs(ratio)) if ratio not in (0.0, math.inf) else math.nan,
        }
    files["steady_slide.csv"] = _slide_csv(mesh, res)
    files["report.json"] = json_text(doc)
    return (EXIT_OK if res.report.solved else EXIT_NOT_CONVERGED), files


# -- finite-element runs ---------------------------------------------------------------------


def _domain_mesh(spec, base: Path):
    from .fem.mesh import load_mesh, rectangle_mesh

    if spec.rectangle is not None:
        r = spec.rectangle
        tags = {"bottom": "C", "top": "U", "left": "T", "right": "T"}
        tags.update(r.tags)
        return rectangle_mesh(r.width, r.height, r.nx, r.ny, lambda x, y, side: tags[side])
    path = Path(spec.file)
    if not path.is_absolute():
        path = base / path
    if not path.exists():
        raise ConfigError(f"mesh file {path} not found")
    return load_mesh(path, spec.tag_map)


def _nodal_gap(spec, mesh):
    chain = mesh.contact
    xy = mesh.nodes[chain.nodes]
    if isinstance(spec, (int, float)):
        return np.full(chain.size, float(spec))
    p = dict(spec.params)
    known = {"flat": {"value"}, "parabola": {"curvature", "delta", "center"}, "table": {"s", "g"}}[spec.kind]
    if set(p) - known:
        raise ConfigError(f"gap: unknown parameters {sorted(set(p) - known)}")
    try:
        if spec.kind == "flat":
            return np.full(chain.size, float(p.get("value", 0.0)))
        if spec.kind == "parabola":
            cur, delta, x0 = (float(p.get(k, d)) for k, d in (("curvature", 1.0), ("delta", 0.0), ("center", 0.0)))
            return cur * (xy[:, 0] - x0) ** 2 - delta
        s_tab, g_tab = np.asarray(p["s"], dtype=float), np.asarray(p["g"], dtype=float)
        if s_tab.shape != g_tab.shape or s_tab.ndim != 1 or np.any(np.diff(s_tab) <= 0):
            raise ValueError("table needs increasing 's' and matching 'g'")
        return np.interp(chain.s, s_tab, g_tab)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"gap: {exc}") from exc


def _fem_setup(cfg, base: Path):
    from .fem.contact import ContactData, ContactProblem

    mesh = _domain_mesh(cfg.mesh, base)
    modulus = _modulus(cfg.modulus)
    m = mesh.contact.size
    data = ContactData(
        _nodal_gap(cfg.contact.gap, mesh),
        np.full(m, cfg.contact.friction),
        np.full(m, cfg.contact.w_t),
        tuple(cfg.loads.body_force),
        tuple(cfg.loads.traction),
    )
    problem = ContactProblem(mesh, modulus, data)
    alpha = None if cfg.alpha_override is None else np.full(m, cfg.alpha_override)
    return problem, data, alpha


def _node_csv(problem, res) -> str:
    chain = problem.chain
    xy = problem.mesh.nodes[chain.nodes]
    cols = [("node", "id"), ("s", "length"), ("x", "length", "xy"), ("y", "length", "xy"),
            ("u_n", "length", "u"), ("u_t", "length", "u"), ("t_n", "force/length", "t"),
            ("t_t", "force/length", "t"), ("state", "label")]
    rows = [
        [int(chain.nodes[i]), float(chain.s[i]), float(xy[i, 0]), float(xy[i, 1]), float(res.u_n[i]),
         float(res.u_t[i]), float(res.t_n[i]), float(res.t_t[i]), res.states[i]]
        for i in range(chain.size)
    ]
    return csv_text(cols, rows)


def _step_doc(res, extra=None) -> dict:
    doc = {"status": res.report.status.value, "mode": res.mode, "report": _report(res.report),
           "state_counts": {s: res.states.count(s) for s in sorted(set(res.states))}}
    if res.mode == "oblique":
        doc["alpha_range"] = [float(np.min(res.alpha)), float(np.max(res.alpha))]
    if extra:
        doc.update(extra)
    return doc


def _step_kw(cfg, alpha):
    return dict(tol=cfg.solver.tol, max_iter=cfg.solver.max_iter, theta=cfg.solver.theta, alpha=alpha)


def cmd_contact_step(cfg, seed: int, base: Path) -> tuple[int, dict]:
    from .fem.laws import FrictionConditionViolated

    problem, _, alpha = _fem_setup(cfg, base)
    try:
        res = problem.solve_contact_step(cfg.mode, **_step_kw(cfg, alpha))
    except FrictionConditionViolated as exc:
        return EXIT_NON_COERCIVE, {"report.json": json_text({"status": "FrictionConditionViolated",
                                                               "message": str(exc)})}
    files = {"contact.csv": _node_csv(problem, res), "report.json": json_text(_step_doc(res))}
    return (EXIT_OK if res.report.solved else EXIT_NOT_CONVERGED), files


def _load_scale(path, k: int, n: int) -> float:
    if path.kind == "constant":
        return 1.0
    if path.kind == "ramp":
        return (k + 1) / n
    if path.kind == "cyclic":
        return math.sin(2 * math.pi * (k + 1) / path.period)
    if not path.scales or len(path.scales) < n:
        raise ConfigError("load_path 'table' needs one scale per step")
    return float(path.scales[k])


def cmd_evolve(cfg, seed: int, base: Path) -> tuple[int, dict]:
    from .fem.evolve import evolve_quasistatic
    from .fem.laws import FrictionConditionViolated

    problem, data, alpha = _fem_setup(cfg, base)
    n = cfg.steps
    scales = [_load_scale(cfg.load_path, k, n) for k in range(n)]
    traction = np.asarray(cfg.loads.traction, dtype=float)
    step_data = [data.replace(traction=tuple(s * traction)) for s in scales]
    try:
        steps = evolve_quasistatic(problem, step_data, mode=cfg.mode, continue_on_failure=True,
                                   **_step_kw(cfg, alpha))
    except FrictionConditionViolated as exc:
        return EXIT_NON_COERCIVE, {"report.json": json_text({"status": "FrictionConditionViolated",
                                                               "message": str(exc)})}
    files = {}
    summary = []
    code = EXIT_OK
    for st in steps:
        res = st.result
        files[f"step_{st.index + 1:04d}.csv"] = _node_csv(problem, res)
        summary.append([st.index + 1, float(scales[st.index]), res.report.status.value,
                        res.report.iterations, float(st.dissipation), float(st.friction_work)])
        if not res.report.solved:
            code = EXIT_NOT_CONVERGED
            if not cfg.continue_on_failure:
                break
    cols = [("step", "index"), ("load_scale", "1"), ("status", "label"), ("iterations", "count"),
            ("dissipation", "force*length", "w"), ("friction_work", "force*length", "w")]
    files["steps.csv"] = csv_text(cols, summary)
    files["report.json"] = json_text({
        "status": "Solved" if code == EXIT_OK else "NotConverged",
        "steps": [_step_doc(st.result, {"index": st.index + 1, "dissipation": st.dissipation})
                  for st in steps[: len(summary)]],
    })
    return code, files


# -- probes ---------------------------------------------------------------------------------


def cmd_probe(cfg, seed: int) -> tuple[int, dict]:
    if cfg.kind == "nonexistence":
        spec = cfg.nonexistence
        if (spec.constants is None) == (spec.modulus is None):
            raise ConfigError("nonexistence: give exactly one of 'constants' or 'modulus'")
        c = _constants(spec)
        from .bem import coercivity_indicator

        if coercivity_indicator(c, spec.f, spec.w_sign) > 0:
            raise ConfigError("nonexistence probe needs f at or above the critical friction")
        rep = nonexistence_probe(LineMesh.uniform(spec.n), c, spec.f, spec.w_sign)
        return EXIT_OK, {"nonexistence.json": json_text(rep.as_dict())}

    from .fem.probes import holder_probe, operator_probe, probe_problem

    spec = cfg.operator if cfg.operator is not None else OperatorProbeSpec()
    moduli = _modulus(spec.modulus) if spec.modulus is not None else None
    problem = probe_problem(spec.n_contact, spec.friction, moduli)
    rep = operator_probe(problem, n_pairs=spec.n_pairs, seed=seed, scale=spec.scale, oblique=spec.oblique)
    hold = holder_probe(problem, seed=seed, scale=spec.scale, levels=spec.levels, oblique=spec.oblique)
    doc = {"seed": seed, "operator": {k: getattr(rep, k) for k in rep.__dataclass_fields__},
           "holder": hold.as_dict()}
    files = {
        "probe.json": json_text(doc),
        "holder.csv": csv_text([("h", "1"), ("input_norm", "dual"), ("output_norm", "trace")],
                               zip(hold.steps, hold.input_norms, hold.output_norms)),
    }
    return EXIT_OK, files


COMMANDS = {
    "constants": cmd_constants,
    "kernels": cmd_kernels,
    "steady-slide": cmd_steady_slide,
    "contact-step": cmd_contact_step,
    "evolve": cmd_evolve,
    "probe": cmd_probe,
}
NEEDS_BASE = {"contact-step", "evolve"}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coulomb2d", description="Frictional contact pipelines in plane strain.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="JSON run configuration")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: cwd)")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed (default 0)")
    p = sub.add_parser("schema", help="print the JSON schema of a subcommand's configuration")
    p.add_argument("target", choices=sorted(COMMANDS))
    return ap


def _load_config(command: str, path: Path):
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: the configuration must be a JSON object")
    try:
        return CONFIGS[command].model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"{path}: invalid configuration\n{exc}") from exc


def run(argv=None) -> int:
    from .fem.assembly import SingularElement
    from .fem.mesh import MeshError

    args = build_parser().parse_args(argv)
    if args.command == "schema":
        print(json.dumps(CONFIGS[args.target].model_json_schema(), indent=2, sort_keys=True))
        return EXIT_OK
    try:
        cfg = _load_config(args.command, args.config)
        seed = args.seed if args.seed is not None else (cfg.seed if cfg.seed is not None else 0)
        fn = COMMANDS[args.command]
        if args.command in NEEDS_BASE:
            code, files = fn(cfg, seed, args.config.resolve().parent)
        else:
            code, files = fn(cfg, seed)
    except (ConfigError, InvalidModulus, MeshError, SingularElement, NonInvertibleSystem) as exc:
        print(f"coulomb2d: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"coulomb2d: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    write_outputs(args.out, files)
    status = {EXIT_OK: "ok", EXIT_NOT_CONVERGED: "not converged", EXIT_NON_COERCIVE: "non-coercive"}[code]
    print(f"coulomb2d {args.command}: {status}; wrote {', '.join(sorted(files))} to {args.out}")
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
