"""Explicit circuit constructions.

Parity circuits follow one convention: ``inputs`` lists the n data qubits
followed by the target qubit b, and the circuit maps |x, b> to
|x, b xor parity(x)> with every ancilla returned to its initial value
(except where a construction documents garbage).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gates
from .circuit import (
    Circuit,
    CircuitBuilder,
    CircuitError,
    Layer,
    Layout,
    MultiCZGate,
    SingleQubitGate,
    compose,
    ensure_valid,
    inverse,
)
from .simulator import run


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


# ---------------------------------------------------------------------------
# fan-out and cat states


def _fanout_schedule(k: int) -> list[list[tuple[int, int]]]:
    """Per level, (block start, half size) pairs of the F_k recursion."""
    out = []
    for level in range(k):
        half = 1 << (k - 1 - level)
        out.append([(o, half) for o in range(0, 1 << k, 2 * half)])
    return out


def _emit_fanout(b: CircuitBuilder, k: int, limit: int) -> None:
    for blocks in _fanout_schedule(k):
        tofs = []
        for o, half in blocks:
            t = o + half
            if t >= limit:
                continue
            b.x(t)
            tofs.append((range(o, t), t))
        b.layer(toffolis=tofs)


def restricted_fanout(k: int) -> Circuit:
    """Copies qubit 0 onto 2**k - 1 qubits prepared in |1>; depth k."""
    if k < 1:
        raise CircuitError("restricted_fanout needs k >= 1")
    n = 1 << k
    b = CircuitBuilder(Layout.line(n), inputs=(0,), ancilla=[(q, "one") for q in range(1, n)])
    _emit_fanout(b, k, n)
    return b.build()


def cat_1d(n: int, *, strict: bool = True) -> Circuit:
    """(|0^n> + |1^n>)/sqrt(2) on a line with no ancilla, depth ceil(log2 n).

    For n not a power of two, ``strict=False`` runs the fan-out for the next
    power of two and drops every gate aimed past the end of the line.
    """
    if n < 2:
        raise CircuitError("cat_1d needs n >= 2")
    if not _is_pow2(n) and strict:
        raise CircuitError(f"cat_1d requires a power of two, got {n} (pass strict=False to truncate)")
    k = max(1, math.ceil(math.log2(n)))
    b = CircuitBuilder(Layout.line(n), ancilla=[(q, "zero") for q in range(n)])
    b.h(0)
    for q in range(1, n):
        b.x(q)
    _emit_fanout(b, k, n)
    return b.build()


def cat_state(n: int) -> np.ndarray:
    v = np.zeros(1 << n, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return v


# ---------------------------------------------------------------------------
# parity


def parity_line(n: int) -> Circuit:
    """Parity on a line of n + 1 qubits with no ancilla and depth exactly n.

    The target sits in the middle of the line.  Two CNOT ladders fold the
    left and right inputs toward it, each deposits its running parity on the
    target, and the ladders are then undone.
    """
    if n < 1:
        raise CircuitError("parity_line needs n >= 1")
    a = n // 2
    c = n - a
    sched: dict[int, list[tuple[int, int]]] = {}

    def put(t: int, ctrl: int, tgt: int) -> None:
        sched.setdefault(t, []).append((ctrl, tgt))

    # right side: positions a+1..n, accumulate toward a+1
    for j in range(1, c):
        put(j, n - j + 1, n - j)
        put(2 * c - j, n - j + 1, n - j)
    put(c, a + 1, a)
    # left side: positions 0..a-1, accumulate toward a-1
    hit = a if a < c else c + 1
    for j in range(1, a):
        put(j, j - 1, j)
        put(hit + a - j, j - 1, j)
    if a:
        put(hit, a - 1, a)

    inputs = list(range(a)) + list(range(a + 1, n + 1)) + [a]
    b = CircuitBuilder(Layout.line(n + 1), inputs=inputs)
    for t in sorted(sched):
        b.cnots(sched[t])
    return b.build()


WIDTH2_DEPTH_CONSTANT = 15


def parity_width2_depth(n: int) -> int:
    """Depth upper bound 8 * ceil(log2 n) + 7 of :func:`parity_width2`."""
    return 8 * max(1, math.ceil(math.log2(n))) + 7


def _tree_rounds(n: int) -> list[list[tuple[int, int]]]:
    rounds = []
    r = 1
    while (1 << (r - 1)) < n:
        size = 1 << r
        gates_ = []
        for start in range(0, n, size):
            src = start + size // 2 - 1
            dst = min(start + size - 1, n - 1)
            if dst > src:
                gates_.append((src, dst))
        rounds.append(gates_)
        r += 1
    return rounds


def parity_width2(n: int) -> Circuit:
    """Parity on a 2 x (n+1) lattice with depth at most 8*ceil(log2 n) + 7.

    Row 0 holds x_0..x_{n-1} and the target in the last column; row 1 is
    ancilla prepared in |1>.  A binary CNOT tree folds the inputs into
    column n-1, one CNOT hands the result to the target, and the tree is
    undone.  Every tree CNOT runs in row 1: its endpoints are swapped down,
    and the CNOT is a row Toffoli controlled through the |1> qubits between
    them.
    """
    if n < 2:
        raise CircuitError("parity_width2 needs n >= 2")
    lay = Layout.lattice(2, n + 1)
    top = lambda col: lay.qid(0, col)  # noqa: E731
    bot = lambda col: lay.qid(1, col)  # noqa: E731
    rounds = _tree_rounds(n)
    steps = rounds + [[(n - 1, n)]] + list(reversed(rounds))
    b = CircuitBuilder(
        lay,
        inputs=[top(j) for j in range(n + 1)],
        ancilla=[(bot(j), "one") for j in range(n + 1)],
    )

    def swap(cols) -> None:
        if not cols:
            return
        cols = sorted(cols)
        b.cnots([(top(j), bot(j)) for j in cols])
        b.cnots([(bot(j), top(j)) for j in cols])
        b.cnots([(top(j), bot(j)) for j in cols])

    out: set[int] = set()
    for step in steps:
        want = {j for g in step for j in g}
        swap(out ^ want)
        out = want
        b.layer(toffolis=[([bot(j) for j in range(src, dst)], bot(dst)) for src, dst in step])
    swap(out)
    return b.build()


@dataclass
class _Block:
    """A parity circuit laid out on a lattice with bookkeeping for recursion."""

    rows: int
    cols: int
    layers: list[Layer]
    x_cols: list[int]  # input columns, all in row 0
    trow: int
    tcol: int
    init: dict[int, str]  # (row*cols+col) -> ancilla init for non-inputs


def _base_block(base: Circuit, m: int) -> _Block:
    lay = base.layout
    if lay.kind == "line":
        rows, cols = 1, lay.n
    elif lay.kind == "lattice":
        rows, cols = lay.rows, lay.n
    else:
        raise CircuitError("recursive parity base must use a line or lattice layout")
    if len(base.inputs) != m + 1:
        raise CircuitError("base must declare m data inputs followed by a target")
    coords = [divmod(q, cols) for q in base.inputs]
    if any(r != 0 for r, _ in coords[:m]) or coords[m][0] != 0:
        raise CircuitError("base inputs and target must lie in row 0")
    x_cols = [c for _, c in coords[:m]]
    tcol = coords[m][1]
    init = {q: v for q, v in base.ancilla}
    for r in range(1, rows):
        if init.get(r * cols + tcol) != "one":
            raise CircuitError("base qubits below the target must be ancilla prepared in |1>")
    return _Block(rows, cols, list(base.layers), x_cols, 0, tcol, init)


def _place(layers: list[Layer], mapping) -> list[Layer]:
    return [
        Layer(
            tuple(SingleQubitGate(mapping(g.target), g.u) for g in L.singles),
            tuple(MultiCZGate.of(mapping(q) for q in g.support) for g in L.czs),
        )
        for L in layers
    ]


def _parallel(parts: list[list[Layer]]) -> list[Layer]:
    depth = max(len(p) for p in parts)
    out = []
    for i in range(depth):
        singles, czs = [], []
        for p in parts:
            if i < len(p):
                singles.extend(p[i].singles)
                czs.extend(p[i].czs)
        out.append(Layer(tuple(singles), tuple(czs)))
    return out


def _lift(prev: _Block, base: _Block, m: int, clean: bool) -> _Block:
    W, R = prev.cols, base.rows
    anchors = [j * W + prev.tcol for j in range(m)]
    order = sorted(range(m), key=lambda j: base.x_cols[j])
    if [base.x_cols[j] for j in order] != [base.x_cols[j] for j in range(m)]:
        raise CircuitError("base inputs must appear left to right in input order")
    pos: dict[int, int] = {}
    for j in range(m):
        pos[base.x_cols[j]] = anchors[j]
    first = base.x_cols[0]
    for col in range(first - 1, -1, -1):
        pos[col] = pos[col + 1] - 1
    for col in range(first + 1, base.cols):
        if col in pos:
            if pos[col] <= pos[col - 1]:
                raise CircuitError("base input spacing does not fit the block width")
        else:
            pos[col] = pos[col - 1] + 1
    if pos[0] < 0:
        raise CircuitError("base has too many columns left of its first input")
    width = max(m * W, pos[base.cols - 1] + 1)
    rows = prev.rows + R
    band = prev.rows
    qid = lambda r, c: r * width + c  # noqa: E731

    # m copies of the previous level side by side
    copies = []
    init: dict[int, str] = {}
    for j in range(m):
        off = j * W
        mp = lambda q, off=off: qid(q // W, q % W + off)  # noqa: E731
        copies.append(_place(prev.layers, mp))
        for q, v in prev.init.items():
            init[mp(q)] = v
        init[qid(prev.trow, off + prev.tcol)] = "zero"
    # copy each block result down its column into the band
    copy_layer = CircuitBuilder(Layout.lattice(rows, width))
    copy_layer.layer(
        toffolis=[
            ([qid(r, t) for r in range(prev.trow, band)], qid(band, t))
            for t in anchors
        ]
    )
    copy_layers = list(copy_layer.build().layers)
    # base circuit stretched across the band; gaps filled with |1>
    imgs = {pos[c] for c in range(base.cols)}
    for r in range(R):
        for col in range(pos[0], pos[base.cols - 1] + 1):
            if col not in imgs:
                init[qid(band + r, col)] = "one"
    for q, v in base.init.items():
        r, c = divmod(q, base.cols)
        init[qid(band + r, pos[c])] = v
    for j in range(m):
        init[qid(band, anchors[j])] = "zero"
    band_layers = []
    for L in base.layers:
        czs = []
        for g in L.czs:
            cs = [divmod(q, base.cols) for q in g.support]
            if len({r for r, _ in cs}) == 1 and len(cs) > 1:
                r = cs[0][0]
                lo, hi = pos[min(c for _, c in cs)], pos[max(c for _, c in cs)]
                czs.append(MultiCZGate.of(qid(band + r, c) for c in range(lo, hi + 1)))
            else:
                czs.append(MultiCZGate.of(qid(band + r, pos[c]) for r, c in cs))
        singles = tuple(
            SingleQubitGate(qid(band + g.target // base.cols, pos[g.target % base.cols]), g.u) for g in L.singles
        )
        band_layers.append(Layer(singles, tuple(czs)))
    compute = _parallel(copies) + copy_layers
    layers = compute + band_layers
    if clean:
        tmp = Circuit(Layout.lattice(rows, width), (), (), tuple(compute))
        layers = layers + list(inverse(tmp).layers)
    x_cols = [j * W + c for j in range(m) for c in prev.x_cols]
    tcol = pos[base.tcol]
    init.pop(qid(band, tcol), None)
    for c in x_cols:
        init.pop(qid(0, c), None)
    return _Block(rows, width, layers, x_cols, band, tcol, init)


def parity_recursive_2d(n: int, base: Circuit, *, clean: bool = False) -> Circuit:
    """Parity on n = m**k inputs built from a base parity circuit on m inputs.

    Level j runs m copies of level j-1 side by side, copies each block parity
    straight down its column into a new band of rows, and runs the base
    circuit across that band.  Depth is k * depth(base) + (k - 1).

    Block parities stay behind in ancilla qubits.  With ``clean=True`` every
    level is uncomputed after its band, which restores all ancilla at the
    cost of extra depth.
    """
    m = len(base.inputs) - 1
    if m < 2:
        raise CircuitError("base must act on at least two inputs")
    k, p = 0, 1
    while p < n:
        p *= m
        k += 1
    if p != n or k < 1:
        raise CircuitError(f"n = {n} is not a positive power of m = {m}")
    ensure_valid(base)
    blk = _base_block(base, m)
    cur = blk
    for _ in range(k - 1):
        cur = _lift(cur, blk, m, clean)
    lay = Layout.lattice(cur.rows, cur.cols)
    inputs = [lay.qid(0, c) for c in cur.x_cols] + [lay.qid(cur.trow, cur.tcol)]
    ancilla = sorted((q, v) for q, v in cur.init.items() if q not in set(inputs))
    return Circuit(lay, tuple(inputs), tuple(ancilla), tuple(cur.layers))


# ---------------------------------------------------------------------------
# amplitude calibration


@dataclass(frozen=True)
class AmplitudeCalibration:
    p: float
    a: complex
    b: complex
    k: int
    alpha: complex
    beta: complex
    theta: float
    k_formula: int

    @property
    def sin_theta(self) -> float:
        return math.sin(self.theta)

    @property
    def gamma(self) -> float:
        """Real amplitude completing (alpha, beta) to a unit vector."""
        return math.sqrt(max(0.0, 1.0 - abs(self.alpha) ** 2 - abs(self.beta) ** 2))


def calibration_k_formula(p: float) -> int:
    return max(1, math.ceil(math.sqrt(2) / (4 * math.pi * (math.sqrt(2 * p) - 1))))


def amplitude_calibration(p: float, a: complex, b: complex) -> AmplitudeCalibration:
    """Choose k and rotation amplitudes with a*alpha = b*beta = sin(pi/(4k+2)).

    k starts from the closed-form estimate and is raised while
    |alpha|^2 + |beta|^2 would exceed 1.
    """
    if not 0.5 < p <= 1:
        raise CircuitError("calibration needs 1/2 < p <= 1")
    a, b = complex(a), complex(b)
    floor = math.sqrt(2 * p) - 1
    if abs(a) < floor or abs(b) < floor or a == 0 or b == 0:
        raise CircuitError(f"amplitudes must have modulus >= sqrt(2p) - 1 = {floor:.6g}")
    k0 = calibration_k_formula(p)
    need = 1 / abs(a) ** 2 + 1 / abs(b) ** 2
    k = k0
    while math.sin(math.pi / (4 * k + 2)) ** 2 * need > 1:
        k += 1
    theta = math.pi / (4 * k + 2)
    s = math.sin(theta)
    return AmplitudeCalibration(p, a, b, k, s / a, s / b, theta, k0)


def _c1_amplitudes(c1: Circuit) -> tuple[complex, complex]:
    st = run(c1)
    n = c1.num_qubits
    cat = set(c1.inputs)
    ones = sum(1 << (n - 1 - q) for q in cat)
    return complex(st.amps[0]), complex(st.amps[ones])


def build_c2(c1: Circuit, cal: AmplitudeCalibration, *, tol: float = 1e-8) -> Circuit:
    """Flag the balanced branch of a biased cat-like state.

    ``c1`` prepares a|0..0> + b|1^n 0^anc> + (rest) from all-zero ancilla,
    where its declared inputs are the n cat qubits.  The result acts on
    [A, B, c1 qubits..., flag]: (A, B) is prepared in
    alpha|00> + gamma|01> + beta|11>, and the flag ends in |0> exactly on
    |00, 0..0> and |11, 1^n 0^anc>, each with amplitude sin(theta).
    """
    a, b = _c1_amplitudes(c1)
    if abs(a - cal.a) > tol or abs(b - cal.b) > tol:
        raise CircuitError(f"c1 amplitudes ({a:.6g}, {b:.6g}) do not match calibration ({cal.a:.6g}, {cal.b:.6g})")
    if abs(cal.alpha) ** 2 + abs(cal.beta) ** 2 > 1 + 1e-12:
        raise CircuitError("calibration is infeasible: |alpha|^2 + |beta|^2 > 1")
    n1 = c1.num_qubits
    N = n1 + 3
    A, B, F = 0, 1, N - 1
    sh = lambda q: q + 2  # noqa: E731
    cat = [sh(q) for q in c1.inputs]
    anc = [sh(q) for q in range(n1) if q not in set(c1.inputs)]

    # two-qubit preparation of alpha|00> + gamma|01> + beta|11>
    ma, mb = abs(cal.alpha), abs(cal.beta)
    gamma = cal.gamma
    phi_b = 2 * math.acos(min(1.0, ma))
    r = math.sqrt(gamma ** 2 + mb ** 2)
    phi = 2 * math.acos(min(1.0, gamma / r)) if r > 0 else 0.0
    prep = CircuitBuilder(Layout.all_to_all(N))
    prep.single(B, gates.ry(phi_b))
    prep.single(A, gates.ry(phi / 2))
    prep.layer(czs=[(A, B)], negated=[B])
    prep.single(A, gates.ry(phi / 2))
    prep.single(B, gates.diag(np.exp(1j * np.angle(cal.alpha)), 1))
    prep.single(A, gates.diag(1, np.exp(1j * np.angle(cal.beta))))
    q_layers = list(prep.build().layers)
    c1_layers = _place(list(c1.layers), sh)
    head = _parallel([q_layers, c1_layers])

    b_ = CircuitBuilder(Layout.all_to_all(N), ancilla=[(q, "zero") for q in range(N)])
    b_.extend(head)
    b_.x(F)
    others = [q for q in range(N) if q != F]
    b_.layer(toffolis=[(others, F)], negated=others)
    b_.layer(toffolis=[(others, F)], negated=anc)
    return b_.build()


def c2_flag_branch(c2: Circuit) -> np.ndarray:
    """Unnormalized state of all non-flag qubits conditioned on flag = 0."""
    st = run(c2)
    return st.amps.reshape(-1, 2)[:, 0].copy()


def toy_c1(amp: float = 0.7) -> Circuit:
    """Three-qubit state (|00> + |11>)/sqrt2 (x) (sqrt2*amp |0> + ... |1>).

    Cat qubits are 0 and 1; qubit 2 is an ancilla.  The |0..0> and |11 0>
    amplitudes both equal ``amp``, and the remainder has the ancilla in |1>.
    """
    if not 0 < amp * math.sqrt(2) <= 1:
        raise CircuitError("toy amplitude must lie in (0, 1/sqrt2]")
    b = CircuitBuilder(Layout.all_to_all(3), inputs=(0, 1), ancilla=[(2, "zero")])
    b.single(0, gates.ry(math.pi / 2))
    b.single(2, gates.ry(2 * math.acos(amp * math.sqrt(2))))
    b.cnots([(0, 1)])
    return b.build()


# ---------------------------------------------------------------------------
# light-cone counterexample


@dataclass(frozen=True)
class CounterexampleSpec:
    k: int
    delta: float

    @property
    def n(self) -> int:
        return 2 * self.k

    @property
    def predicted_error(self) -> float:
        dk = self.delta ** self.k
        return 4 * math.sqrt(dk * (1 - dk))


def appendix_d_counterexample(spec: CounterexampleSpec | int, delta: float | None = None):
    """Width-2 circuit whose erased final row CZ changes the state by a lot.

    Returns (D, C, predicted_error).  C prepares, for every pair i, the state
    |z>_a (sqrt(delta)|11> + sqrt(1-delta)|0z>)_{bc} with z = x_{2i};
    D appends one CZ across all of row 1.
    """
    if not isinstance(spec, CounterexampleSpec):
        spec = CounterexampleSpec(int(spec), float(delta))
    k, d = spec.k, spec.delta
    if not 1 <= k <= 6:
        raise CircuitError("counterexample supports 1 <= k <= 6")
    if not 0 < d < 1:
        raise CircuitError("delta must lie in (0, 1)")
    lay = Layout.lattice(2, 2 * k)
    row0 = [lay.qid(0, j) for j in range(2 * k)]
    row1 = [lay.qid(1, j) for j in range(2 * k)]
    b = CircuitBuilder(lay, inputs=row0, ancilla=[(q, "zero") for q in row1])
    trip = [(lay.qid(0, 2 * i), lay.qid(1, 2 * i), lay.qid(1, 2 * i + 1)) for i in range(k)]
    phi_p = 2 * math.acos(math.sqrt(1 - d))
    b.cnots([(a, bq) for a, bq, _ in trip])
    b.cnots([(bq, c) for _, bq, c in trip])
    b.cnots([(c, bq) for _, bq, c in trip])
    for _, bq, _ in trip:
        b.single(bq, gates.ry(phi_p / 2))
    b.layer(czs=[(bq, c) for _, bq, c in trip])
    for _, bq, _ in trip:
        b.single(bq, gates.ry(phi_p / 2))
    b.cnots([(bq, c) for _, bq, c in trip])
    for _, bq, _ in trip:
        b.single(bq, gates.ry(phi_p / 2))
    b.cnots([(a, bq) for a, bq, _ in trip])
    for _, bq, _ in trip:
        b.single(bq, gates.ry(-phi_p / 2))
    b.cnots([(a, bq) for a, bq, _ in trip])
    c = b.build()
    dcirc = compose(c, c.with_layers([Layer((), (MultiCZGate.of(row1),))]))
    return dcirc, c, spec.predicted_error
