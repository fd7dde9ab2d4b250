"""JSON model files: parsing, serialization, and conversion to simulators.

Schema: {"n_qubits": n, "hamiltonian": MAT, "jumps": [MAT, ...],
"alphas": {"hamiltonian": a0, "jumps": [a1, ...]} (optional),
"time_dependence": {"times": [...], "hamiltonian": [MAT per time],
"jumps": [[MAT per time] per jump], "jdot_bound": x} (optional)}.

MAT is either a row-major nested list of [re, im] pairs or
{"pauli_sum": "expression"}. Time dependence is piecewise-linear
interpolation between the tabulated matrices, held constant outside the
table. Omitted bounds are derived: sup norms from the table knots (linear
interpolation cannot exceed endpoint norms) and the generator derivative
bound from per-panel slopes.
"""
from __future__ import annotations

import bisect
import json
from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .linalg import dag, spectral_norm
from .models import Lindbladian
from .pauli import PauliSumExpr, materialize, parse_pauli_sum, serialize_pauli_sum
from .timedep import TimeDependentLindbladian


def matrix_from_json(obj, dim: int, what: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != dim:
        raise ModelError(f"{what}: expected {dim} rows")
    out = np.zeros((dim, dim), dtype=complex)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != dim:
            raise ModelError(f"{what}: row {i} must have {dim} entries")
        for j, cell in enumerate(row):
            if (not isinstance(cell, list) or len(cell) != 2
                    or not all(isinstance(x, (int, float)) for x in cell)):
                raise ModelError(f"{what}: entry ({i},{j}) must be a [re, im] pair")
            out[i, j] = complex(cell[0], cell[1])
    return out


def matrix_to_json(mat: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(mat, complex)]


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """A dense matrix or a Pauli-sum expression, as written in the file."""

    dense: np.ndarray | None
    pauli: PauliSumExpr | None

    def matrix(self) -> np.ndarray:
        return self.dense if self.dense is not None else materialize(self.pauli)

    def to_json(self):
        if self.dense is not None:
            return matrix_to_json(self.dense)
        return {"pauli_sum": serialize_pauli_sum(self.pauli)}


def _parse_operator(obj, n_qubits: int, what: str) -> OperatorSpec:
    dim = 2 ** n_qubits
    if isinstance(obj, dict):
        if set(obj.keys()) != {"pauli_sum"} or not isinstance(obj["pauli_sum"], str):
            raise ModelError(f"{what}: operator object must be {{'pauli_sum': str}}")
        return OperatorSpec(dense=None, pauli=parse_pauli_sum(obj["pauli_sum"], n_qubits))
    return OperatorSpec(dense=matrix_from_json(obj, dim, what), pauli=None)


@dataclass(frozen=True, eq=False)
class TimeTable:
    """Piecewise-linear tables for H(t) and the jumps on a shared time grid."""

    times: tuple
    hamiltonians: tuple | None
    jump_tables: tuple | None
    jdot_bound: float | None

    def interpolate(self, mats, t: float) -> np.ndarray:
        ts = self.times
        if t <= ts[0]:
            return mats[0]
        if t >= ts[-1]:
            return mats[-1]
        i = bisect.bisect_right(ts, t) - 1
        frac = (t - ts[i]) / (ts[i + 1] - ts[i])
        return mats[i] + frac * (mats[i + 1] - mats[i])


@dataclass(frozen=True, eq=False)
class ParsedModel:
    n_qubits: int
    hamiltonian: OperatorSpec
    jumps: tuple
    alpha0: float | None
    alphas: tuple | None
    table: TimeTable | None

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def is_time_dependent(self) -> bool:
        return self.table is not None

    def to_lindbladian(self) -> Lindbladian:
        if self.is_time_dependent:
            raise ModelError("model declares time dependence; use to_time_dependent")
        return Lindbladian(self.hamiltonian.matrix(),
                           [j.matrix() for j in self.jumps],
                           alpha0=self.alpha0, alphas=self.alphas)

    def to_time_dependent(self) -> TimeDependentLindbladian:
        tb = self.table
        if tb is None:
            lind = self.to_lindbladian()
            H, Ls = lind.hamiltonian, lind.jumps
            return TimeDependentLindbladian(lambda t: (H, Ls), lind.alpha0,
                                            lind.alphas, 0.0)
        H0 = self.hamiltonian.matrix()
        Ls0 = [j.matrix() for j in self.jumps]

        def sampler(t: float):
            H = tb.interpolate(tb.hamiltonians, t) if tb.hamiltonians else H0
            if tb.jump_tables:
                Ls = [tb.interpolate(jt, t) for jt in tb.jump_tables]
            else:
                Ls = Ls0
            return H, Ls

        a0, alphas, jdot = _table_bounds(tb, H0, Ls0)
        if self.alpha0 is not None:
            a0 = self.alpha0
        if self.alphas is not None:
            alphas = self.alphas
        if tb.jdot_bound is not None:
            jdot = tb.jdot_bound
        return TimeDependentLindbladian(sampler, a0, alphas, jdot)


def _table_bounds(tb: TimeTable, H0, Ls0):
    """Sup-norm and slope bounds from the knots; linear panels cannot exceed them."""
    hs = list(tb.hamiltonians) if tb.hamiltonians else [H0]
    a0 = max(spectral_norm(H) for H in hs)
    jts = [list(jt) for jt in tb.jump_tables] if tb.jump_tables else [[L] for L in Ls0]
    alphas = tuple(max(spectral_norm(L) for L in col) for col in jts)
    jdot = 0.0
    for i in range(len(tb.times) - 1):
        dt = tb.times[i + 1] - tb.times[i]
        slope = 0.0
        if tb.hamiltonians:
            slope += spectral_norm(hs[i + 1] - hs[i]) / dt
        if tb.jump_tables:
            for col in jts:
                ldot = spectral_norm(col[i + 1] - col[i]) / dt
                lmax = max(spectral_norm(col[i]), spectral_norm(col[i + 1]))
                slope += ldot * lmax
        jdot = max(jdot, slope)
    return a0, alphas, jdot


def parse_model(obj: dict) -> ParsedModel:
    if not isinstance(obj, dict):
        raise ModelError("model file must contain a JSON object")
    if "n_qubits" not in obj or not isinstance(obj["n_qubits"], int) or obj["n_qubits"] < 1:
        raise ModelError("n_qubits must be a positive integer")
    n = obj["n_qubits"]
    known = {"n_qubits", "hamiltonian", "jumps", "alphas", "time_dependence"}
    extra = set(obj.keys()) - known
    if extra:
        raise ModelError(f"unknown model fields: {sorted(extra)}")
    if "hamiltonian" not in obj:
        raise ModelError("model needs a hamiltonian")
    ham = _parse_operator(obj["hamiltonian"], n, "hamiltonian")
    jumps = tuple(_parse_operator(j, n, f"jumps[{i}]")
                  for i, j in enumerate(obj.get("jumps", [])))
    alpha0 = None
    alphas = None
    if "alphas" in obj:
        al = obj["alphas"]
        if not isinstance(al, dict) or set(al) - {"hamiltonian", "jumps"}:
            raise ModelError("alphas must be {'hamiltonian': x, 'jumps': [...]}")
        if "hamiltonian" in al:
            alpha0 = float(al["hamiltonian"])
        if "jumps" in al:
            if len(al["jumps"]) != len(jumps):
                raise ModelError("alphas.jumps length must match jumps")
            alphas = tuple(float(a) for a in al["jumps"])
    table = None
    if "time_dependence" in obj:
        table = _parse_table(obj["time_dependence"], n, len(jumps))
    return ParsedModel(n_qubits=n, hamiltonian=ham, jumps=jumps,
                       alpha0=alpha0, alphas=alphas, table=table)


def _parse_table(obj, n_qubits: int, num_jumps: int) -> TimeTable:
    dim = 2 ** n_qubits
    if not isinstance(obj, dict):
        raise ModelError("time_dependence must be an object")
    extra = set(obj.keys()) - {"times", "hamiltonian", "jumps", "jdot_bound"}
    if extra:
        raise ModelError(f"unknown time_dependence fields: {sorted(extra)}")
    times = obj.get("times")
    if (not isinstance(times, list) or len(times) < 2
            or not all(isinstance(t, (int, float)) for t in times)):
        raise ModelError("time_dependence.times must list at least two numbers")
    times = tuple(float(t) for t in times)
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ModelError("time_dependence.times must be strictly increasing")
    hams = None
    if "hamiltonian" in obj:
        rows = obj["hamiltonian"]
        if not isinstance(rows, list) or len(rows) != len(times):
            raise ModelError("time_dependence.hamiltonian must have one matrix per time")
        hams = tuple(matrix_from_json(mj, dim, f"time_dependence.hamiltonian[{i}]")
                     for i, mj in enumerate(rows))
    jts = None
    if "jumps" in obj:
        cols = obj["jumps"]
        if not isinstance(cols, list) or len(cols) != num_jumps:
            raise ModelError("time_dependence.jumps must have one table per jump")
        jts = []
        for j, col in enumerate(cols):
            if not isinstance(col, list) or len(col) != len(times):
                raise ModelError(f"time_dependence.jumps[{j}] must have one matrix per time")
            jts.append(tuple(matrix_from_json(mj, dim, f"time_dependence.jumps[{j}][{i}]")
                             for i, mj in enumerate(col)))
        jts = tuple(jts)
    if hams is None and jts is None:
        raise ModelError("time_dependence declares no varying operator")
    jdot = obj.get("jdot_bound")
    if jdot is not None:
        jdot = float(jdot)
        if jdot < 0:
            raise ModelError("jdot_bound must be nonnegative")
    return TimeTable(times=times, hamiltonians=hams, jump_tables=jts, jdot_bound=jdot)


def serialize_model(pm: ParsedModel) -> dict:
    out = {"n_qubits": pm.n_qubits, "hamiltonian": pm.hamiltonian.to_json()}
    if pm.jumps:
        out["jumps"] = [j.to_json() for j in pm.jumps]
    if pm.alpha0 is not None or pm.alphas is not None:
        al = {}
        if pm.alpha0 is not None:
            al["hamiltonian"] = pm.alpha0
        if pm.alphas is not None:
            al["jumps"] = list(pm.alphas)
        out["alphas"] = al
    if pm.table is not None:
        tb = pm.table
        td = {"times": list(tb.times)}
        if tb.hamiltonians:
            td["hamiltonian"] = [matrix_to_json(H) for H in tb.hamiltonians]
        if tb.jump_tables:
            td["jumps"] = [[matrix_to_json(L) for L in col] for col in tb.jump_tables]
        if tb.jdot_bound is not None:
            td["jdot_bound"] = tb.jdot_bound
        out["time_dependence"] = td
    return out


def load_model(path) -> ParsedModel:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as ex:
            raise ModelError(f"{path}: invalid JSON: {ex}")
    return parse_model(obj)


def save_model(pm: ParsedModel, path):
    with open(path, "w") as fh:
        json.dump(serialize_model(pm), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_density(path, dim: int) -> np.ndarray:
    """Density matrix from JSON: a bare matrix or {'rho0': matrix}."""
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as ex:
            raise ModelError(f"{path}: invalid JSON: {ex}")
    if isinstance(obj, dict):
        if "rho0" not in obj:
            raise ModelError(f"{path}: expected a matrix or {{'rho0': matrix}}")
        obj = obj["rho0"]
    return matrix_from_json(obj, dim, "rho0")
