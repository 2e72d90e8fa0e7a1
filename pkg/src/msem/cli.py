"""Command-line front end: batch computations written as CSV and JSON files."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from functools import reduce
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import hodge, mapping, mimetic, operators, topology
from .basis import Axis, AxisRole, TensorBasis
from .mimetic import AnalyticForm

COMMANDS = ("project", "derivative", "hodge-star", "decompose", "solve", "convergence", "potential-flow", "complex-info")
GRIDS = {"gll": AxisRole.PRIMAL, "gauss": AxisRole.DUAL_INTERIOR, "extended": AxisRole.DUAL}


class InvariantViolation(RuntimeError):
    """A computed result failed one of its defining checks."""


@dataclass
class RunConfig:
    command: str
    dim: int = 1
    order: int = 2
    grid: str = "gll"
    quad_order: int | None = None
    map: str = "identity"
    map_params: dict[str, float] = field(default_factory=dict)
    form: str | None = None
    gamma: float = 0.0
    elements: int = 1
    levels: int = 5
    sweep: str = "h"
    orders: list[int] = field(default_factory=lambda: [1, 2, 3])
    complex: str = "grid"
    cells: list[int] | None = None
    radial_elements: int = 1
    angular_elements: int = 4
    r_outer: float = 2.0
    samples: int = 201
    out: str = "msem-out"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        positive = ["dim", "order", "elements", "levels", "radial_elements", "angular_elements", "samples", "threads"]
        for name in positive:
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.quad_order is not None and self.quad_order < 1:
            raise ValueError("quad_order must be a positive integer")
        if self.dim > 3:
            raise ValueError("dim must be 1, 2 or 3")
        if self.grid not in GRIDS:
            raise ValueError(f"grid must be one of {sorted(GRIDS)}")
        if self.sweep not in ("h", "p"):
            raise ValueError("sweep must be 'h' or 'p'")
        if self.r_outer <= 1.0:
            raise ValueError("r_outer must exceed the cylinder radius 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if any(int(p) != p or p < 1 for p in self.orders):
            raise ValueError("orders must be positive integers")

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown configuration keys: {unknown}")
        return cls(**data)


# ---------------------------------------------------------------------------
# named forms


def _product(factors) -> np.ndarray:
    return reduce(np.multiply, factors)


def _sin3(dim: int) -> AnalyticForm:
    return AnalyticForm(dim, 0, (lambda *x: _product(np.sin(3 * np.pi * xi + 0.08) for xi in x),))


def _sinpi(dim: int) -> AnalyticForm:
    def f(*x):
        return _product(np.sin(np.pi * xi) for xi in x)

    def partial(a):
        def g(*x):
            return np.pi * _product(np.cos(np.pi * xi) if i == a else np.sin(np.pi * xi) for i, xi in enumerate(x))

        return g

    zero = AnalyticForm(dim, 2, tuple(lambda *x: 0.0 for _ in range(dim * (dim - 1) // 2))) if dim > 1 else None
    grad = AnalyticForm(dim, 1, tuple(partial(a) for a in range(dim)), zero)
    return AnalyticForm(dim, 0, (f,), grad)


def _cospi_edge(dim: int) -> AnalyticForm:
    if dim != 1:
        raise ValueError("form 'cospi-edge' is one-dimensional")
    return AnalyticForm(1, 1, (lambda x: np.cos(np.pi * x),))


def _cubic(dim: int) -> AnalyticForm:
    if dim != 1:
        raise ValueError("form 'cubic' is one-dimensional")
    return AnalyticForm(1, 1, (lambda x: x**3,))


def _constant(dim: int) -> AnalyticForm:
    return AnalyticForm.constant(dim, 0, 1.0)


def _gradient(dim: int) -> AnalyticForm:
    return _sinpi(dim).derivative


FORMS: dict[str, Callable[[int], AnalyticForm]] = {
    "sin3pi": _sin3,
    "sinpi": _sinpi,
    "cospi-edge": _cospi_edge,
    "cubic": _cubic,
    "constant": _constant,
    "gradient": _gradient,
}


def _form(cfg: RunConfig, default: str) -> AnalyticForm:
    name = cfg.form or default
    if name not in FORMS:
        raise ValueError(f"unknown form {name!r}; choose from {sorted(FORMS)}")
    form = FORMS[name](cfg.dim)
    if cfg.map != "identity":
        form = mapping.pullback(form, _map(cfg))
    return form


def _map(cfg: RunConfig) -> mapping.Mapping:
    params = dict(cfg.map_params)
    if cfg.map == "identity":
        params.setdefault("dimension", cfg.dim)
    if cfg.map == "affine":
        params.setdefault("dimension", cfg.dim)
    m = mapping.named_map(cfg.map, **params)
    if m.dimension != cfg.dim:
        raise ValueError(f"map {cfg.map!r} is {m.dimension}-dimensional, config has dim={cfg.dim}")
    m.check_orientation()
    return m


def _basis(cfg: RunConfig, degree: int, grid: str | None = None) -> TensorBasis:
    role = GRIDS[grid or cfg.grid]
    if role is AxisRole.PRIMAL:
        axes = tuple(Axis.uniform(cfg.order, cfg.elements) for _ in range(cfg.dim))
    else:
        axes = tuple(Axis(cfg.order, role) for _ in range(cfg.dim))
    return TensorBasis(axes, degree)


# ---------------------------------------------------------------------------
# output


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else (_fmt(v) if isinstance(v, (float, np.floating, int, np.integer)) and not isinstance(v, bool) else str(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, data: Any) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _samples_1d(n: int) -> np.ndarray:
    return np.linspace(-1.0, 1.0, n)[:, None]


# ---------------------------------------------------------------------------
# commands


def cmd_project(cfg: RunConfig, out: Path) -> dict:
    form = _form(cfg, "sin3pi")
    k = form.degree
    q = cfg.quad_order
    primal = _basis(cfg, k, "gll")
    results = {"pi": mimetic.project(form, primal, q)}
    if cfg.elements == 1:
        dual = _basis(cfg, k, "extended")
        results["pi_dual"] = mimetic.project(form, dual, q)
        results["pi_star"] = mimetic.coproject(form, primal, quad_order=q)
        co_dual = mimetic.opposite_basis(primal, k, AxisRole.DUAL_INTERIOR)
        results["pi_dual_star"] = mimetic.coproject(form, co_dual, quad_order=q)
    summary = {name: df.to_json() for name, df in results.items()}
    _write_json(out / "project.json", summary)
    if cfg.dim == 1:
        pts = _samples_1d(cfg.samples)
        cols = [pts[:, 0], form.evaluate(pts)[:, 0]] + [df.evaluate(pts)[:, 0] for df in results.values()]
        _write_csv(out / "project.csv", ["x", "exact", *results], list(zip(*cols)))
    df = results["pi"]
    again = mimetic.project(df.as_form(), primal, q)
    if np.max(np.abs(again.coefficients - df.coefficients)) > 1e-10 * max(1.0, np.max(np.abs(df.coefficients))):
        raise InvariantViolation("projection is not idempotent")
    return {"cochains": {name: v["coefficients"] for name, v in summary.items()}}


def cmd_derivative(cfg: RunConfig, out: Path) -> dict:
    form = _form(cfg, "sinpi")
    basis = _basis(cfg, form.degree)
    df = mimetic.project(form, basis, cfg.quad_order)
    d = operators.exterior_derivative(df)
    result = {"input": df.to_json(), "derivative": d.to_json()}
    if d.degree < d.dimension:
        dd = operators.exterior_derivative(d)
        result["dd_max"] = float(np.max(np.abs(dd.coefficients), initial=0.0))
        if result["dd_max"] > 1e-9:
            raise InvariantViolation("d d is not zero")
    if GRIDS[cfg.grid] is not AxisRole.DUAL_INTERIOR:
        (out / "incidence.txt").write_text(operators.derivative_matrix(basis).to_coo_text())
    _write_json(out / "derivative.json", result)
    return {"derivative": [float(v) for v in d.coefficients]}


def cmd_hodge_star(cfg: RunConfig, out: Path) -> dict:
    form = _form(cfg, "sinpi")
    basis = TensorBasis(tuple(Axis(cfg.order) for _ in range(cfg.dim)), form.degree)
    metric = mapping.pulled_back_metric(_map(cfg)) if cfg.map != "identity" else None
    dual = AxisRole.DUAL if cfg.grid == "extended" else AxisRole.DUAL_INTERIOR
    df = mimetic.project(form, basis, cfg.quad_order)
    H = operators.hodge_matrix(basis, metric, dual)
    starred = operators.hodge_star(df, metric, dual)
    (out / "hodge_matrix.csv").write_text(H.to_csv())
    _write_json(out / "hodge_star.json", {"input": df.to_json(), "star": starred.to_json()})
    if np.max(np.abs(H.payload @ df.coefficients - starred.coefficients)) > 1e-10 * max(1.0, np.max(np.abs(starred.coefficients))):
        raise InvariantViolation("Hodge matrix disagrees with the operator")
    return {"star": [float(v) for v in starred.coefficients]}


def _annulus_case(cfg: RunConfig) -> tuple[TensorBasis, mapping.Mapping]:
    m = mapping.annulus_map(1.0, cfg.r_outer)
    return hodge.annulus_basis(cfg.order, cfg.radial_elements, cfg.angular_elements), m


def cmd_decompose(cfg: RunConfig, out: Path) -> dict:
    if cfg.map == "annulus" or cfg.form in (None, "flow"):
        basis, m = _annulus_case(cfg)
        form = mapping.pullback(hodge.cylinder_flow(cfg.gamma), m)
    else:
        form = _form(cfg, "gradient")
        basis = _basis(cfg, form.degree)
    q = cfg.quad_order or cfg.order + 4
    df = mimetic.DiscreteForm(basis, mimetic.reduce(form, basis, q).coefficients)
    split = hodge.decompose(df)
    _write_json(out / "decompose.json", split.to_json())
    if split.residuals.get("d_harmonic", 0.0) > 1e-12:
        raise InvariantViolation("harmonic part is not closed")
    return {"amplitudes": [float(a) for a in split.amplitudes]}


def cmd_solve(cfg: RunConfig, out: Path) -> dict:
    form = _form(cfg, "gradient" if cfg.dim > 1 else "cospi-edge")
    basis = _basis(cfg, form.degree)
    f = mimetic.reduce(form, basis, cfg.quad_order)
    a = hodge.solve_coboundary(f)
    residual = float(np.max(np.abs(basis.complex.incidence_matrix(f.degree).T @ a.coefficients - f.coefficients), initial=0.0))
    _write_json(out / "solve.json", {"rhs": [float(v) for v in f.coefficients], "solution": [float(v) for v in a.coefficients], "residual": residual})
    return {"residual": residual}


def cmd_convergence(cfg: RunConfig, out: Path) -> dict:
    form = FORMS[cfg.form or "sinpi"](1)
    if cfg.sweep == "h":
        rows = []
        for p in cfg.orders:
            rows += mimetic.convergence_study(form, [p], [2**j for j in range(1, cfg.levels + 1)])
    else:
        rows = mimetic.convergence_study(form, list(range(1, cfg.levels + 1)), [cfg.elements])
    _write_csv(
        out / "convergence.csv",
        ["elements", "order", "h", "l2_error", "seminorm_error", "observed_order", "exact"],
        [(r.elements, r.order, r.h, r.l2_error, r.seminorm_error, r.observed_order, "yes" if r.exact else "no") for r in rows],
    )
    return {"rows": len(rows)}


def cmd_potential_flow(cfg: RunConfig, out: Path) -> dict:
    res = hodge.potential_flow(cfg.gamma, cfg.order, cfg.radial_elements, cfg.angular_elements, 1.0, cfg.r_outer, cfg.quad_order)
    hole = hodge.hole_flow_cochain(cfg.gamma, 1.0, cfg.r_outer, max(cfg.quad_order or 0, 12))
    info = topology.homology(hole.complex, 1)
    h = info.harmonic_chain_basis[0]
    hole_pairing = topology.pairing(hole, h)
    hole_alpha = hodge.harmonic_amplitude(hole, info.harmonic_cochain_basis[0], h)
    data = res.to_json()
    data["hole"] = {"cochain": [float(v) for v in hole.coefficients], "pairing": hole_pairing, "alpha": hole_alpha, "harmonic_chain": [int(v) for v in h.coefficients]}
    _write_json(out / "potential_flow.json", data)
    m = mapping.annulus_map(1.0, cfg.r_outer)
    n = max(int(np.sqrt(cfg.samples)), 2)
    xi = np.stack([g.ravel() for g in np.meshgrid(np.linspace(-1, 1, n), np.linspace(-1, 1, n), indexing="ij")], axis=1)
    ref = res.cochain.evaluate(xi)
    J = m.jacobian(xi)
    phys = np.einsum("mki,mk->mi", np.linalg.inv(J), ref)
    x = m.forward(xi)
    rows = [(x[i, 0], x[i, 1], phys[i, 0], phys[i, 1]) for i in range(xi.shape[0])]
    _write_csv(out / "velocity.csv", ["x", "y", "vx", "vy"], rows)
    if abs(hole_pairing - 2 * cfg.gamma) > 1e-8 * max(1.0, abs(cfg.gamma)):
        raise InvariantViolation("circulation pairing differs from 2 gamma")
    return {"alpha": hole_alpha, "pairing": hole_pairing, "annulus_alpha": res.alpha}


def cmd_complex_info(cfg: RunConfig, out: Path) -> dict:
    if cfg.complex == "hole":
        cx = topology.hole_complex()
    elif cfg.complex == "annulus":
        cx = topology.annulus_complex(cfg.radial_elements, cfg.angular_elements)
    elif cfg.complex == "grid":
        cx = topology.build_complex(cfg.dim, cfg.cells or [cfg.elements] * cfg.dim)
    else:
        raise ValueError("complex must be 'grid', 'annulus' or 'hole'")
    info = {"cell_counts": list(cx.cell_counts), "betti": [], "harmonic_chains": {}, "incidence": {}}
    for k in range(cx.dimension + 1):
        h = topology.homology(cx, k)
        info["betti"].append(h.betti_number)
        info["harmonic_chains"][str(k)] = [[int(round(v)) for v in c.coefficients] for c in h.harmonic_chain_basis]
    for k in range(1, cx.dimension + 1):
        E = cx.incidence_matrix(k)
        info["incidence"][f"{k - 1},{k}"] = E.toarray().astype(int).tolist()
        if k < cx.dimension and (E @ cx.incidence_matrix(k + 1)).count_nonzero():
            raise InvariantViolation("boundary of a boundary is not zero")
    _write_json(out / "complex_info.json", info)
    return {"cell_counts": info["cell_counts"], "betti": info["betti"]}


HANDLERS = {
    "project": cmd_project,
    "derivative": cmd_derivative,
    "hodge-star": cmd_hodge_star,
    "decompose": cmd_decompose,
    "solve": cmd_solve,
    "convergence": cmd_convergence,
    "potential-flow": cmd_potential_flow,
    "complex-info": cmd_complex_info,
}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msem", description="Mimetic spectral element computations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON file with configuration keys; flags override it")
        p.add_argument("--dim", type=int)
        p.add_argument("--order", type=int)
        p.add_argument("--grid", choices=sorted(GRIDS))
        p.add_argument("--quad-order", dest="quad_order", type=int)
        p.add_argument("--map")
        p.add_argument("--gamma", type=float)
        p.add_argument("--form")
        p.add_argument("--elements", type=int)
        p.add_argument("--complex", choices=("grid", "annulus", "hole"))
        p.add_argument("--cells", type=int, nargs="+")
        p.add_argument("--sweep", choices=("h", "p"))
        p.add_argument("--levels", type=int)
        p.add_argument("--out")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict[str, Any] = {}
    if args.config is not None:
        data.update(json.loads(args.config.read_text()))
        data.pop("command", None)
    for key in ("dim", "order", "grid", "quad_order", "map", "gamma", "form", "elements", "complex", "cells", "sweep", "levels", "out", "seed", "threads"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    data["command"] = args.command
    return RunConfig.from_mapping(data)


def run(cfg: RunConfig) -> dict:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = HANDLERS[cfg.command](cfg, out)
    _write_json(out / f"{cfg.command}.config.json", asdict(cfg))
    return summary


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        summary = run(cfg)
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
