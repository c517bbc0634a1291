"""Command-line front end.

Exit codes: 0 success, 1 domain error (bad circuit, failed precondition,
unsatisfied bound), 2 usage error.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import click
import jsonschema

from . import codec
from .boolean import by_name
from .bounds import (
    BoundReport,
    bound_experiment,
    nekomata_distance,
    reports_to_csv,
    tv_gap,
    unitary_gap,
)
from .circuit import CircuitError
from .compiler import LAYERS_PER_CZ_LAYER, embed_circuit_2d, verify_embedding
from .families import nekomata_circuit, parity_line_family, random_line_circuit
from .fourier import spectrum, weight
from .lightcone import (
    AnalysisError,
    backward_lightcone,
    check_separable,
    forward_lightcone,
    width2_structure_select,
)
from .metrics import MetricError
from .restriction import contiguous_restriction, restriction_pipeline_1d
from .simulator import DEFAULT_QUBIT_CAP, SimulationError
from .synthesis import (
    appendix_d_counterexample,
    cat_1d,
    parity_line,
    parity_recursive_2d,
    parity_width2,
    restricted_fanout,
)

DOMAIN_ERRORS = (CircuitError, AnalysisError, SimulationError, MetricError, ValueError, OSError)

REPORT_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["command", "ok", "seed", "result"],
    "properties": {
        "command": {"type": "string"},
        "ok": {"type": "boolean"},
        "seed": {"type": "integer", "minimum": 0},
        "tol": {"type": "number"},
        "result": {"type": "object"},
        "error": {"type": "string"},
    },
    "additionalProperties": False,
}


@dataclass
class Options:
    fmt: str = "text"
    seed: int = 0
    tol: float = 1e-9
    qubit_cap: int = DEFAULT_QUBIT_CAP


@dataclass
class CommandResult:
    command: str
    ok: bool
    result: dict[str, Any] = field(default_factory=dict)
    lines: list[str] = field(default_factory=list)
    error: str | None = None

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1


def _emit(opts: Options, res: CommandResult) -> None:
    if opts.fmt == "json-report":
        doc: dict[str, Any] = {"command": res.command, "ok": res.ok, "seed": opts.seed, "tol": opts.tol, "result": res.result}
        if res.error is not None:
            doc["error"] = res.error
        jsonschema.validate(doc, REPORT_SCHEMA)
        click.echo(json.dumps(doc, indent=1, default=_jsonable))
    else:
        for line in res.lines:
            click.echo(line)
        if res.error is not None:
            click.echo(f"error: {res.error}", err=True)
    sys.exit(res.exit_code)


def _jsonable(o: Any) -> Any:
    if hasattr(o, "tolist"):
        return o.tolist()
    if isinstance(o, (set, frozenset, tuple)):
        return sorted(o)
    return str(o)


def _run(ctx: click.Context, name: str, fn) -> None:
    opts: Options = ctx.obj
    try:
        res = fn()
    except DOMAIN_ERRORS as exc:
        res = CommandResult(name, False, error=str(exc))
    _emit(opts, res)


def _parse_set(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from exc


@click.group()
@click.option("--format", "fmt", type=click.Choice(["text", "json-report"]), default="text", show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--qubit-cap", type=click.IntRange(1, 30), default=DEFAULT_QUBIT_CAP, show_default=True)
@click.pass_context
def main(ctx: click.Context, fmt: str, seed: int, tol: float, qubit_cap: int) -> None:
    """Geometrically local QAC circuits: synthesis, compilation, analysis, experiments."""
    ctx.obj = Options(fmt, seed, tol, qubit_cap)


# ---------------------------------------------------------------------------
# synth

SYNTH_KINDS = ["cat1d", "parity-line", "parity-width2", "parity-recursive", "fanout", "appendix-d"]


def _summary(c) -> dict[str, Any]:
    return {"depth": c.depth, "qubits": c.num_qubits, "layout": c.layout.kind, "cz_gates": c.cz_count()}


@main.command()
@click.argument("kind", type=click.Choice(SYNTH_KINDS))
@click.option("--n", type=click.IntRange(min=1), help="Number of qubits or inputs.")
@click.option("--k", type=click.IntRange(min=1), help="Fan-out levels or counterexample size.")
@click.option("--delta", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=0.5, show_default=True)
@click.option("--base", type=click.Choice(["line", "width2"]), default="line", show_default=True)
@click.option("--base-n", type=click.IntRange(min=2), default=2, show_default=True)
@click.option("--clean", is_flag=True, help="Uncompute garbage in parity-recursive.")
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def synth(ctx, kind, n, k, delta, base, base_n, clean, out):
    """Build a circuit and write it to OUT."""
    if kind in ("fanout", "appendix-d"):
        if k is None:
            raise click.UsageError(f"{kind} needs --k")
    elif n is None:
        raise click.UsageError(f"{kind} needs --n")

    def go() -> CommandResult:
        extra: dict[str, Any] = {}
        if kind == "cat1d":
            c = cat_1d(n, strict=False)
        elif kind == "parity-line":
            c = parity_line(n)
        elif kind == "parity-width2":
            c = parity_width2(n)
        elif kind == "parity-recursive":
            b = parity_line(base_n) if base == "line" else parity_width2(base_n)
            c = parity_recursive_2d(n, b, clean=clean)
        elif kind == "fanout":
            c = restricted_fanout(k)
        else:
            D, C, pred = appendix_d_counterexample(k, delta)
            ref = Path(out).with_name(Path(out).stem + "-reference" + Path(out).suffix)
            codec.save(C, ref)
            c = D
            extra = {"predicted_error": pred, "reference_path": str(ref), "reference": _summary(C)}
        codec.save(c, out)
        info = {"kind": kind, "path": out, **_summary(c), **extra}
        lines = [f"{kind}: depth {c.depth}, {c.num_qubits} qubits -> {out}"]
        if "predicted_error" in extra:
            lines.append(f"reference circuit -> {extra['reference_path']}")
            lines.append(f"predicted_error {extra['predicted_error']:.12g}")
        return CommandResult("synth", True, info, lines)

    _run(ctx, "synth", go)


# ---------------------------------------------------------------------------
# compile


@main.command(name="compile")
@click.argument("in_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True)
@click.option("--verify", is_flag=True, help="Check fidelity on random input states.")
@click.option("--trials", type=click.IntRange(min=1), default=10, show_default=True)
@click.pass_context
def compile_cmd(ctx, in_path, out, verify, trials):
    """Embed an all-to-all circuit into an (n+1) x n lattice."""
    opts: Options = ctx.obj

    def go() -> CommandResult:
        src = codec.load(in_path)
        v = embed_circuit_2d(src)
        codec.save(v, out)
        info: dict[str, Any] = {
            "source_depth": src.depth,
            "depth": v.depth,
            "layers_per_cz_layer": LAYERS_PER_CZ_LAYER,
            "rows": v.layout.rows,
            "cols": v.layout.n,
            "path": out,
        }
        lines = [f"depth {src.depth} -> {v.depth} ({LAYERS_PER_CZ_LAYER} x {src.depth}) on {v.layout.rows}x{v.layout.n} lattice -> {out}"]
        ok = True
        if verify:
            chk = verify_embedding(src, v, trials=trials, seed=opts.seed)
            ok = chk.min_fidelity >= 1 - opts.tol and chk.max_ancilla_leak <= opts.tol
            info["verify"] = {"min_fidelity": chk.min_fidelity, "max_ancilla_leak": chk.max_ancilla_leak, "trials": trials, "passed": ok}
            lines.append(f"verify: min fidelity {chk.min_fidelity:.15f}, ancilla leak {chk.max_ancilla_leak:.3g} ({'ok' if ok else 'FAILED'})")
        return CommandResult("compile", ok, info, lines)

    _run(ctx, "compile", go)


# ---------------------------------------------------------------------------
# analyze

ANALYSES = ["lightcone", "separable", "restrict", "contiguous-restrict", "width2-select"]


@main.command()
@click.argument("in_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("what", type=click.Choice(ANALYSES))
@click.option("--qubit", type=click.IntRange(min=0))
@click.option("--direction", type=click.Choice(["forward", "backward"]), default="forward", show_default=True)
@click.option("--set", "qset", help="Comma-separated qubit ids (default: all inputs).")
@click.option("--epsilon", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=0.05, show_default=True)
@click.option("--s", "s", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--layer", type=click.IntRange(min=0), help="Layer index for width2-select (default: last CZ layer).")
@click.option("--empirical", is_flag=True, help="Also measure the error by simulation.")
@click.option("--out", "out", type=click.Path(dir_okay=False), help="Write the approximate circuit with its report.")
@click.pass_context
def analyze(ctx, in_path, what, qubit, direction, qset, epsilon, s, layer, empirical, out):
    """Light-cone and restriction analyses of a circuit file."""
    opts: Options = ctx.obj
    if what == "lightcone" and qubit is None:
        raise click.UsageError("lightcone needs --qubit")
    chosen = _parse_set(qset) if qset else None

    def go() -> CommandResult:
        c = codec.load(in_path)
        I = chosen if chosen is not None else list(c.inputs)
        if what == "lightcone":
            cone = (forward_lightcone if direction == "forward" else backward_lightcone)(c, qubit)
            return CommandResult("analyze", True, {"analysis": what, "origin": qubit, "direction": direction, "members": list(cone.members)},
                                 [f"{direction} cone of {qubit}: {{{', '.join(map(str, cone.members))}}}"])
        if what == "separable":
            cert = check_separable(c, I)
            line = "separable" if cert else f"not separable: witness {cert.witness}"
            return CommandResult("analyze", True, {"analysis": what, **cert.to_dict()}, [line])
        if what == "width2-select":
            czl = c.cz_layers()
            if not czl:
                raise AnalysisError("circuit has no CZ layer")
            li = czl[-1] if layer is None else layer
            if li >= len(c.layers):
                raise AnalysisError(f"layer {li} out of range")
            prefix = c.with_layers(c.layers[:li])
            sel = width2_structure_select(prefix, I, c.layers[li], s)
            bound = math.ceil(len(I) / (8 * s * s))
            info = {"analysis": what, "layer": li, "s": s, "kept": list(sel.kept), "size_bound": bound, "separable": bool(sel.certificate)}
            return CommandResult("analyze", True, info, [f"kept {len(sel.kept)} of {len(I)} (bound {bound}): {list(sel.kept)}"])
        if what == "restrict":
            outc = restriction_pipeline_1d(c, epsilon, empirical=empirical, seed=opts.seed)
        else:
            outc = contiguous_restriction(c, s, empirical=empirical, seed=opts.seed)
        rep = outc.to_dict()
        if out:
            codec.save(outc.approx_circuit, out, restriction_report=rep)
            rep = {**rep, "path": out}
        lines = [
            f"s = {outc.s}, erased {len(outc.erased_gates)} gate(s), surviving {list(outc.surviving_set)}",
            f"analytic error bound {outc.analytic_error_bound:.6g}",
        ]
        if outc.empirical_error is not None:
            lines.append(f"empirical error {outc.empirical_error:.6g}")
        return CommandResult("analyze", True, {"analysis": what, "restriction_report": rep}, lines)

    _run(ctx, "analyze", go)


# ---------------------------------------------------------------------------
# experiment

SUITES = ["parity-bound", "majority-bound", "tv-gap", "unitary-gap", "nekomata", "fourier"]


def _pipeline_pairs(seed: int, epsilon: float, count: int = 6):
    for i in range(count):
        n, d = 4 + i % 3, 1 + i % 2
        c = random_line_circuit(n, d, seed * 1000 + i, max_support=5)
        yield f"pair-{i}", c, restriction_pipeline_1d(c, epsilon).approx_circuit


def _suite(name: str, opts: Options, *, fn: str, n: int, epsilon: float, circuit, circuit2) -> tuple[list[BoundReport], dict]:
    seed = opts.seed
    reports: list[BoundReport] = []
    if name == "fourier":
        f = by_name(fn, n)
        sp = spectrum(f)
        return [], {"fn": f.name, "n": n, "W0": weight(sp, 0), "W1": weight(sp, 1),
                    "W_le1": weight(sp, lambda m: m <= 1), "total": sp.total()}
    if name in ("parity-bound", "majority-bound"):
        which = "parity" if name == "parity-bound" else "majority"
        if circuit is not None:
            members = [("circuit", circuit, n)]
        else:
            members = [(m.name, m.circuit, m.n) for d in (1, 2) for m in parity_line_family(d, seed=seed)]
        for label, c, nn in members:
            r = bound_experiment(c, by_name(which, nn), which, seed=seed, qubit_cap=opts.qubit_cap)
            r.name = label
            reports.append(r)
    elif name in ("tv-gap", "unitary-gap"):
        if circuit is not None:
            pairs = [("circuit", circuit, circuit2 if circuit2 is not None else circuit)]
            eps = None if circuit2 is None else epsilon
        else:
            pairs = list(_pipeline_pairs(seed, epsilon))
            eps = epsilon
        for label, a, b in pairs:
            if name == "tv-gap":
                r = tv_gap(a, b, list(a.inputs), epsilon=eps, seed=seed, qubit_cap=opts.qubit_cap)
            else:
                r = unitary_gap(a, b, epsilon=eps, seed=seed)
            r.name = label
            reports.append(r)
    elif name == "nekomata":
        r = nekomata_distance(nekomata_circuit(n), seed=seed)
        r.name = f"exact-cat-{n}"
        reports.append(r)
        for i in range(4):
            c = circuit if circuit is not None else random_line_circuit(n, 1 + i % 2, seed * 1000 + i)
            r = nekomata_distance(c, epsilon=epsilon, seed=seed)
            r.name = "circuit" if circuit is not None else f"line-{i}"
            reports.append(r)
            if circuit is not None:
                break
    for r in reports:
        r.suite = name
    return reports, {}


@main.command()
@click.argument("suite", type=click.Choice(SUITES))
@click.option("--fn", type=click.Choice(["parity", "maj"]), default="parity", show_default=True)
@click.option("--n", type=click.IntRange(1, 16), default=4, show_default=True)
@click.option("--epsilon", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=0.5, show_default=True)
@click.option("--circuit", "circuit_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--circuit2", "circuit2_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write one CSV row per report.")
@click.pass_context
def experiment(ctx, suite, fn, n, epsilon, circuit_path, circuit2_path, csv_path):
    """Run an experiment suite; exits 1 if any bound is violated."""
    opts: Options = ctx.obj

    def go() -> CommandResult:
        c1 = codec.load(circuit_path) if circuit_path else None
        c2 = codec.load(circuit2_path) if circuit2_path else None
        reports, extra = _suite(suite, opts, fn=fn, n=n, epsilon=epsilon, circuit=c1, circuit2=c2)
        if suite == "fourier":
            lines = [f"{extra['fn']}: W^{{=0}} = {extra['W0']:.12g}, W^{{=1}} = {extra['W1']:.12g}, W^{{<=1}} = {extra['W_le1']:.12g}"]
            return CommandResult("experiment", True, {"suite": suite, **extra}, lines)
        if csv_path:
            Path(csv_path).write_text(reports_to_csv(reports))
        ok = all(r.satisfied for r in reports)
        lines = [
            f"{r.name}: n={r.params.get('n')} d={r.params.get('d')} empirical {r.empirical:.6g} <= analytic {r.analytic:.6g} "
            f"[{'ok' if r.satisfied else 'VIOLATED'}]"
            for r in reports
        ]
        return CommandResult("experiment", ok, {"suite": suite, "reports": [r.to_dict() for r in reports], "all_satisfied": ok}, lines)

    _run(ctx, "experiment", go)


if __name__ == "__main__":
    main()
