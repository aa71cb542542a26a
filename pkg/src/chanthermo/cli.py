"""Command-line front end: analyze a channel spec, run the property suites, or
emit a random channel spec.

Exit codes: 0 success, 1 parse or validation error, 2 numerical failure,
3 property violation.
"""

from __future__ import annotations

import os

_threads = os.environ.get("CHANTHERMO_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import json  # noqa: E402
import math  # noqa: E402
import sys  # noqa: E402
import time  # noqa: E402
from typing import Any  # noqa: E402

import numpy as np  # noqa: E402

from . import __version__  # noqa: E402
from .algebra import MultiMatrixAlgebra, State, validate_state  # noqa: E402
from .channel import (Channel, channel_from_kraus, homomorphism_channel, random_channel,  # noqa: E402
                      validate_channel)
from .numerics import SingularityError, ValidationError  # noqa: E402
from .thermo import ThermoConfig, ThermoReport, landauer_verdict  # noqa: E402

FORMAT = 1
SIGNIFICANT = 12
# magnitudes below this are round-off and print as 0 so reports stay byte-stable
ZERO_FLOOR = 1e-12


class SpecError(ValueError):
    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


class PropertyViolation(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# JSON encoding


def round_float(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError("non-finite value in report")
    if abs(x) < ZERO_FLOOR:
        return 0.0
    return float(f"{x:.{SIGNIFICANT - 1}e}")


def encode_complex_matrix(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


def canonical(obj: Any) -> Any:
    """Round floats to fixed significant digits and convert numpy types."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return canonical(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_float(float(obj))
    return obj


def dumps(doc: Any) -> str:
    return json.dumps(canonical(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# spec parsing


def _matrix(value: Any, path: str, shape: tuple[int, int]) -> np.ndarray:
    try:
        rows = list(value)
        out = np.zeros(shape, dtype=complex)
        if len(rows) != shape[0]:
            raise SpecError(path, f"expected {shape[0]} rows, got {len(rows)}")
        for r, row in enumerate(rows):
            row = list(row)
            if len(row) != shape[1]:
                raise SpecError(f"{path}[{r}]", f"expected {shape[1]} entries, got {len(row)}")
            for c, v in enumerate(row):
                if isinstance(v, (int, float)) and not isinstance(v, bool):
                    out[r, c] = float(v)
                elif isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
                    out[r, c] = complex(float(v[0]), float(v[1]))
                else:
                    raise SpecError(f"{path}[{r}][{c}]", "entry must be a number or a [re, im] pair")
    except TypeError:
        raise SpecError(path, "expected a nested array") from None
    if not np.all(np.isfinite(out)):
        raise SpecError(path, "non-finite entry")
    return out


def _blocks(doc: dict, key: str) -> MultiMatrixAlgebra:
    try:
        dims = doc[key]["blocks"]
    except (KeyError, TypeError):
        raise SpecError(f"{key}.blocks", "missing") from None
    if not isinstance(dims, list) or not dims or not all(isinstance(n, int) and not isinstance(n, bool) and n > 0 for n in dims):
        raise SpecError(f"{key}.blocks", "must be a nonempty list of positive integers")
    return MultiMatrixAlgebra(tuple(dims))


def parse_channel(doc: dict, src: MultiMatrixAlgebra, tgt: MultiMatrixAlgebra) -> Channel:
    spec = doc.get("channel")
    if not isinstance(spec, dict) or len(spec) != 1:
        raise SpecError("channel", "must hold exactly one of kraus, choi, homomorphism")
    kind, value = next(iter(spec.items()))
    if kind == "kraus":
        if not isinstance(value, list) or not value:
            raise SpecError("channel.kraus", "must be a nonempty list of operators")
        ops = [_matrix(v, f"channel.kraus[{a}]", (tgt.size, src.size)) for a, v in enumerate(value)]
        try:
            alpha = channel_from_kraus(src, tgt, ops)
        except ValidationError as exc:
            raise SpecError("channel.kraus", str(exc)) from None
    elif kind == "choi":
        if not isinstance(value, list) or len(value) != src.num_blocks:
            raise SpecError("channel.choi", f"expected {src.num_blocks} rows of blocks")
        rows = []
        for i, n in enumerate(src.block_dims):
            if not isinstance(value[i], list) or len(value[i]) != tgt.num_blocks:
                raise SpecError(f"channel.choi[{i}]", f"expected {tgt.num_blocks} blocks")
            rows.append(tuple(_matrix(value[i][j], f"channel.choi[{i}][{j}]", (n * q, n * q))
                              for j, q in enumerate(tgt.block_dims)))
        alpha = Channel(src, tgt, tuple(rows))
    elif kind == "homomorphism":
        try:
            emb = [[(int(i), int(k)) for i, k in entries] for entries in value]
        except (TypeError, ValueError):
            raise SpecError("channel.homomorphism", "expected per-target-block lists of [source_block, multiplicity]") from None
        for j, entries in enumerate(emb):
            for i, k in entries:
                if not (0 <= i < src.num_blocks) or k < 1:
                    raise SpecError(f"channel.homomorphism[{j}]", f"invalid entry [{i}, {k}]")
        try:
            alpha = homomorphism_channel(src, tgt, emb)
        except ValidationError as exc:
            raise SpecError("channel.homomorphism", str(exc)) from None
    else:
        raise SpecError("channel", f"unknown channel kind {kind!r}")
    try:
        return validate_channel(alpha)
    except ValidationError as exc:
        raise SpecError(f"channel.{kind}", str(exc)) from None


def parse_state(doc: dict, alg: MultiMatrixAlgebra) -> State:
    st = doc.get("input_state")
    if not isinstance(st, dict):
        raise SpecError("input_state", "missing")
    weights = st.get("weights")
    if not isinstance(weights, list) or len(weights) != alg.num_blocks:
        raise SpecError("input_state.weights", f"expected {alg.num_blocks} numbers")
    try:
        w = np.array([float(x) for x in weights])
    except (TypeError, ValueError):
        raise SpecError("input_state.weights", "entries must be numbers") from None
    if np.any(w <= 0):
        raise SpecError("input_state.weights", "weights must be positive for a faithful state")
    dens = st.get("densities")
    if not isinstance(dens, list) or len(dens) != alg.num_blocks:
        raise SpecError("input_state.densities", f"expected {alg.num_blocks} matrices")
    mats = [_matrix(d, f"input_state.densities[{i}]", (n, n)) for i, (d, n) in enumerate(zip(dens, alg.block_dims))]
    for i, r in enumerate(mats):
        path = f"input_state.densities[{i}]"
        try:
            State(alg, w, tuple(mats))  # shape check
            lam = np.linalg.eigvalsh((r + r.conj().T) / 2)
        except ValidationError as exc:
            raise SpecError(path, str(exc)) from None
        if np.linalg.norm(r - r.conj().T) > 1e-9 * (1 + np.linalg.norm(r)):
            raise SpecError(path, "density is not Hermitian")
        if lam[0] < -1e-9 * max(1.0, abs(lam[-1])):
            raise SpecError(path, f"density has negative eigenvalue {lam[0]:.3e}")
        if lam[0] <= 1e-10 * lam[-1]:
            raise SpecError(path, "density is singular; the input state must be faithful")
    try:
        return validate_state(State(alg, w, tuple(mats)), require_faithful=True)
    except ValidationError as exc:
        raise SpecError("input_state", str(exc)) from None


def parse_config(doc: dict) -> ThermoConfig:
    beta = doc.get("beta", 1.0)
    k = doc.get("boltzmann", 1.0)
    for name, v in (("beta", beta), ("boltzmann", k)):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0 or not math.isfinite(v):
            raise SpecError(name, "must be a positive finite number")
    return ThermoConfig(beta=float(beta), boltzmann=float(k))


def parse_spec(doc: Any) -> tuple[Channel, State, ThermoConfig, str]:
    if not isinstance(doc, dict):
        raise SpecError("$", "document must be a JSON object")
    if doc.get("format", FORMAT) != FORMAT:
        raise SpecError("format", f"unsupported format {doc.get('format')!r}")
    src, tgt = _blocks(doc, "source"), _blocks(doc, "target")
    alpha = parse_channel(doc, src, tgt)
    phi = parse_state(doc, tgt)
    cfg = parse_config(doc)
    name = doc.get("id", "channel")
    if not isinstance(name, str):
        raise SpecError("id", "must be a string")
    return alpha, phi, cfg, name


# ---------------------------------------------------------------------------
# documents


def report_document(report: ThermoReport, cfg: ThermoConfig, seed: Any = None) -> dict:
    minus_f = -report.free_energy
    return {
        "format": FORMAT,
        "tool": {"name": "chanthermo", "version": __version__},
        "seed": seed,
        "config": {"beta": cfg.beta, "boltzmann": cfg.boltzmann},
        "tolerances": {"free_energy_routes": 1e-8, "entropy_sign": 1e-9, "landauer": 1e-9},
        "report": {
            "channel_id": report.channel_id,
            "multiplicity": report.multiplicity.tolist(),
            "scalar_dimension": report.scalar_dimension,
            "index": report.index,
            "entropy": report.entropy,
            "mean_energy": report.mean_energy,
            "free_energy": report.free_energy,
            "free_energy_check": report.free_energy_check,
            "minus_free_energy_in_landauer_units": minus_f / report.landauer_bound,
            "free_energy_infimum": report.free_energy_infimum,
            "infimum_attained": report.infimum_attained,
            "landauer_bound": report.landauer_bound,
            "reversible": report.reversible,
            "bound_satisfied": report.bound_satisfied,
            "factorial": report.factorial,
        },
    }


def markdown(doc: dict) -> str:
    r = doc["report"]
    lines = [f"# {r['channel_id']}", "", "| quantity | value |", "|---|---|"]
    for key in ("multiplicity", "scalar_dimension", "index", "entropy", "mean_energy", "free_energy",
                "minus_free_energy_in_landauer_units", "free_energy_infimum", "infimum_attained",
                "landauer_bound", "reversible", "bound_satisfied", "factorial"):
        lines.append(f"| {key} | {canonical(r[key])} |")
    return "\n".join(lines) + "\n"


def random_spec(source: tuple[int, ...], target: tuple[int, ...], rank: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    src, tgt = MultiMatrixAlgebra(source), MultiMatrixAlgebra(target)
    alpha = random_channel(src, tgt, rank, rng)
    if not alpha.is_faithful():
        raise ValidationError(f"rank {rank} channel from {source} to {target} is not faithful")
    from .channel import kraus_decompose

    ops = kraus_decompose(alpha).operators
    phi = tgt.random_state(rng)
    return {
        "format": FORMAT,
        "id": f"random-{seed}",
        "seed": seed,
        "source": {"blocks": list(source)},
        "target": {"blocks": list(target)},
        "channel": {"kraus": [encode_complex_matrix(t) for t in ops]},
        "input_state": {"weights": [float(w) for w in phi.weights],
                        "densities": [encode_complex_matrix(d) for d in phi.densities]},
        "beta": 1.0,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecError(args.file, f"cannot read: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{args.file}:{exc.lineno}:{exc.colno}", exc.msg) from None
    alpha, phi, cfg, name = parse_spec(doc)
    start = time.perf_counter()
    report = landauer_verdict(alpha, phi, cfg, name)
    out = report_document(report, cfg, doc.get("seed"))
    if args.timing:
        out["timing"] = {"seconds": time.perf_counter() - start}
    problems = report.violations()
    sys.stdout.write(markdown(out) if args.markdown else dumps(out))
    if problems:
        raise PropertyViolation("; ".join(problems))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    from .suites import SUITES, trial_rng

    if args.trials < 1:
        raise SpecError("--trials", "must be positive")
    if args.max_dim < 1:
        raise SpecError("--max-dim", "must be positive")
    if not args.tol > 0:
        raise SpecError("--tol", "must be positive")
    start = time.perf_counter()
    for index, suite in enumerate(SUITES):
        if args.suite and suite.name not in args.suite:
            continue
        passed = 0
        for trial in range(args.trials):
            residuals: dict[str, float] = {}
            error = None
            try:
                residuals = suite.run(trial_rng(args.seed, index, trial), args.max_dim)
            except (ValidationError, SingularityError, np.linalg.LinAlgError) as exc:
                error = f"{type(exc).__name__}: {exc}"
            failing = {k: v for k, v in residuals.items() if not v <= args.tol}
            if error or failing:
                print(f"{suite.name}: {passed}/{args.trials} passed before failure at trial {trial}")
                artifact = {
                    "format": FORMAT, "suite": suite.name, "suite_index": index, "seed": args.seed,
                    "trial": trial, "max_dim": args.max_dim, "tol": args.tol,
                    "residuals": residuals, "failing": sorted(failing), "error": error,
                    "replay": f"chanthermo verify --seed {args.seed} --max-dim {args.max_dim} "
                              f"--trials {trial + 1} --tol {args.tol} --suite {suite.name}",
                }
                with open(args.replay, "w", encoding="utf-8") as fh:
                    fh.write(json.dumps(artifact, sort_keys=True, indent=2) + "\n")
                raise PropertyViolation(f"suite {suite.name} failed at trial {trial}; replay artifact written to {args.replay}")
            passed += 1
        print(f"{suite.name}: {passed}/{args.trials} passed")
    if args.timing:
        print(f"elapsed: {time.perf_counter() - start:.2f} s")
    return 0


def _dims(text: str, flag: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise SpecError(flag, f"expected comma-separated positive integers, got {text!r}") from None
    if not dims or any(n < 1 for n in dims):
        raise SpecError(flag, "block dimensions must be positive")
    return dims


def cmd_random(args: argparse.Namespace) -> int:
    if args.rank < 1:
        raise SpecError("--rank", "must be positive")
    src, tgt = _dims(args.source, "--source"), _dims(args.target, "--target")
    sys.stdout.write(json.dumps(random_spec(src, tgt, args.rank, args.seed), sort_keys=True, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chanthermo", description="Thermodynamics of quantum channels at finite dimension.")
    p.add_argument("--version", action="version", version=f"chanthermo {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyze a channel spec file")
    a.add_argument("file")
    fmt = a.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="canonical JSON report (default)")
    fmt.add_argument("--markdown", action="store_true", help="human-readable table")
    a.add_argument("--timing", action="store_true", help="add wall-clock timing to the report")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run the randomized property suites")
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--max-dim", type=int, default=4)
    v.add_argument("--trials", type=int, default=25)
    v.add_argument("--tol", type=float, default=1e-7)
    v.add_argument("--suite", action="append", help="restrict to the named suite (repeatable)")
    v.add_argument("--replay", default="verify-failure.json", help="where to write the failing instance")
    v.add_argument("--timing", action="store_true")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("random", help="emit a random faithful channel spec")
    r.add_argument("--source", required=True)
    r.add_argument("--target", required=True)
    r.add_argument("--rank", type=int, required=True)
    r.add_argument("--seed", type=int, required=True)
    r.set_defaults(func=cmd_random)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SingularityError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except PropertyViolation as exc:
        print(f"property violation: {exc}", file=sys.stderr)
        return 3
