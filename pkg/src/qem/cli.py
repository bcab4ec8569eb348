"""Command-line interface.

Subcommands:

    qem check      --input bundle.json        hypothesis report
    qem invariant  --input bundle.json        obstruction integrals, all chi
    qem construct  --input bundle.json        build a profile, emit CSV table
    qem verify     --input bundle.json        residual + boundary report
    qem sweep      --input bundle.json        closing function over an e_star grid
    qem example                               built-in end-to-end demo

Outputs are deterministic: no timestamps, floats printed with 17
significant digits, JSON keys sorted.  Exact rationals are printed as
"num/den" strings.  Run metadata goes to a ``<output>.meta.json`` sidecar,
never into data files.  Exit codes: 0 success, 1 input error, 2 hypothesis
failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .bundle import (BundleInput, BundleSpec, Case, ChiVector, FanoFactor,
                     load_bundle_json, validate_bundle, enumerate_chi)
from .construct import (closing_integral, closing_scale, closing_sweep,
                        construct_expanding, construct_shrinking,
                        construct_steady, MetricProfile)
from .errors import HypothesisError, InputError, NumericalError, QemError
from .invariants import (admissibility_integral, futaki_integral,
                         find_admissible_chi)
from .verifier import (boundary_check, residuals, write_profile_csv,
                       profile_table)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_HYPOTHESIS = 2
EXIT_NUMERICAL = 3


@dataclass
class RunConfig:
    command: str
    input_path: Optional[str] = None
    tol: float = 1e-12
    grid: int = 512
    format: str = "json"
    output_path: Optional[str] = None
    chi: Optional[tuple[int, ...]] = None
    e_star: Optional[float] = None
    branch: str = "plus"
    m_override: Optional[float] = None
    e_min: float = 1e-3
    e_max: float = 1e6
    points: int = 61

    def __post_init__(self):
        if self.tol <= 0.0:
            raise InputError("tol must be positive")
        if self.grid < 16:
            raise InputError("grid must be at least 16")
        if self.format not in ("json", "csv"):
            raise InputError("format must be json or csv")

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in self.__dict__.items() if v is not None}


def _apply_thread_cap() -> None:
    """Honor QEM_THREADS when the numba backend is active."""
    cap = os.environ.get("QEM_THREADS")
    if not cap or _kernels.backend() != "numba":
        return
    try:
        import numba
        numba.set_num_threads(max(1, min(int(cap),
                                         numba.config.NUMBA_NUM_THREADS)))
    except (ImportError, ValueError):
        pass


def _json_dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)


def _emit_text(text: str, config: RunConfig) -> None:
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
        _write_sidecar(config)
    else:
        print(text)


def _write_sidecar(config: RunConfig) -> None:
    meta = {"command": config.command, "config": config.to_dict()}
    with open(config.output_path + ".meta.json", "w", encoding="utf-8") as fh:
        fh.write(_json_dump(meta) + "\n")


def _load(config: RunConfig) -> BundleInput:
    if not config.input_path:
        raise InputError(f"{config.command} requires --input")
    inp = load_bundle_json(config.input_path)
    m = config.m_override if config.m_override is not None else inp.m
    chi = ChiVector(config.chi) if config.chi is not None else inp.chi
    return BundleInput(inp.spec, float(m), chi)


def _pick_chi(spec: BundleSpec, inp_chi: Optional[ChiVector]) -> ChiVector:
    if inp_chi is not None:
        return inp_chi
    admissible = find_admissible_chi(spec)
    if not admissible:
        raise HypothesisError(
            "no sign vector makes the admissibility integral negative; "
            "the compact construction does not apply to this bundle")
    return admissible[0]


def _default_e_star(spec: BundleSpec, case: Case) -> float:
    if case is Case.STEADY:
        return 2.0 * (spec.n1 + 1)          # kappa0 = 1, pure homothety
    return float((spec.n1 + 1) ** 2)        # middle of the expanding window


def _build_profile(inp: BundleInput, config: RunConfig) -> MetricProfile:
    spec, m = inp.spec, inp.m
    if spec.case is Case.STEADY:
        e = config.e_star if config.e_star is not None \
            else _default_e_star(spec, spec.case)
        return construct_steady(spec, m, e)
    if spec.case is Case.EXPANDING:
        e = config.e_star if config.e_star is not None \
            else _default_e_star(spec, spec.case)
        return construct_expanding(spec, m, e, branch=config.branch)
    chi = _pick_chi(spec, inp.chi)
    if config.e_star is not None:
        # Diagnostic profile at a pinned e_star, without closing the end.
        from .construct import _assemble, _shrinking_parameters
        kappa0, A, s_star = _shrinking_parameters(spec, config.e_star, chi)
        return _assemble(spec, Case.SHRINKING, m, config.e_star, kappa0, A,
                         s_star, chi=chi)
    return construct_shrinking(spec, m, chi, tol=config.tol)


# ---------------------------------------------------------------------------
# Commands.
# ---------------------------------------------------------------------------

def cmd_check(config: RunConfig) -> int:
    inp = _load(config)
    report = validate_bundle(inp.spec, inp.m)
    _emit_text(_json_dump(report.to_dict()), config)
    return EXIT_OK if report.admissible_for_case else EXIT_HYPOTHESIS


def cmd_invariant(config: RunConfig) -> int:
    inp = _load(config)
    spec = inp.spec
    fut = futaki_integral(spec)
    rows = []
    for chi in enumerate_chi(spec):
        res = admissibility_integral(spec, chi)
        rows.append({"chi": list(chi.signs),
                     "value": f"{res.value.numerator}/{res.value.denominator}",
                     "value_float": float(res.value),
                     "sign": res.sign,
                     "admissible": res.value < 0})
    if config.format == "csv":
        lines = ["chi,value,value_float,sign,admissible"]
        for row in rows:
            chi_str = " ".join(str(s) for s in row["chi"])
            lines.append(f"{chi_str},{row['value']},"
                         f"{row['value_float']:.17g},{row['sign']},"
                         f"{str(row['admissible']).lower()}")
        _emit_text("\n".join(lines), config)
    else:
        doc = {"futaki": fut.to_dict(), "admissibility": rows}
        _emit_text(_json_dump(doc), config)
    return EXIT_OK


def cmd_construct(config: RunConfig) -> int:
    inp = _load(config)
    profile = _build_profile(inp, config)
    summary = profile.summary()
    summary["m"] = inp.m
    if profile.case is Case.SHRINKING and profile.chi is not None:
        value = closing_integral(inp.spec, inp.m, profile.e_star, profile.chi)
        scale = closing_scale(inp.spec, inp.m, profile.e_star, profile.chi)
        summary["closing_residual"] = value / scale
    if config.output_path:
        write_profile_csv(profile, config.output_path)
        _write_sidecar(config)
        print(_json_dump(summary))
    else:
        print(_json_dump(summary))
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    inp = _load(config)
    profile = _build_profile(inp, config)
    rep = residuals(profile, grid_size=config.grid)
    bnd = boundary_check(profile)
    doc = {"profile": profile.summary(),
           "residuals": rep.to_dict(full=False),
           "boundary": bnd.to_dict()}
    _emit_text(_json_dump(doc), config)
    return EXIT_OK


def cmd_sweep(config: RunConfig) -> int:
    inp = _load(config)
    spec = inp.spec
    if spec.case is not Case.SHRINKING:
        raise InputError("sweep applies to shrinking bundles")
    chi = _pick_chi(spec, inp.chi)
    grid = np.geomspace(config.e_min, config.e_max, config.points)
    rows = closing_sweep(spec, inp.m, chi, grid)
    lines = ["e_star,closing_integral,valid"]
    for e, value, valid in rows:
        val = f"{value:.17g}" if math.isfinite(value) else "nan"
        lines.append(f"{e:.17g},{val},{str(valid).lower()}")
    _emit_text("\n".join(lines), config)
    return EXIT_OK


def example_bundle(m: float = 2.0) -> BundleInput:
    """Built-in demo data: four factors with two interior complex surfaces."""
    spec = BundleSpec((FanoFactor(0, 1, 1), FanoFactor(2, 3, 1),
                       FanoFactor(2, 3, -2), FanoFactor(0, 1, 1)),
                      Case.SHRINKING)
    return BundleInput(spec, m, None)


def cmd_example(config: RunConfig) -> int:
    m = config.m_override if config.m_override is not None else 2.0
    inp = example_bundle(m)
    spec = inp.spec
    report = validate_bundle(spec, m)
    print(f"hypotheses admissible (shrinking): "
          f"{report.admissible['shrinking']}")
    fut = futaki_integral(spec)
    print(f"futaki integral: {fut.value.numerator}/{fut.value.denominator}"
          f" (= {float(fut.value)})")
    admissible = find_admissible_chi(spec)
    for chi in enumerate_chi(spec):
        res = admissibility_integral(spec, chi)
        mark = "  <- admissible" if res.value < 0 else ""
        print(f"chi = {list(chi.signs)}: integral = "
              f"{res.value.numerator}/{res.value.denominator} "
              f"(= {float(res.value)}){mark}")
    chi = admissible[0]
    profile = construct_shrinking(spec, m, chi, tol=config.tol)
    value = closing_integral(spec, m, profile.e_star, chi)
    scale = closing_scale(spec, m, profile.e_star, chi)
    print(f"shrinking construction at m = {m}: e_star = "
          f"{profile.e_star:.12g}, s_star = {profile.s_star:.12g}")
    print(f"closing residual (scaled): {value / scale:.3e}")
    rep = residuals(profile, grid_size=config.grid)
    bnd = boundary_check(profile)
    print(f"worst equation residual: {rep.worst:.3e}; "
          f"worst boundary defect: {bnd.worst:.3e}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing.
# ---------------------------------------------------------------------------

def _parse_chi(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"cannot parse chi list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qem",
        description="Construct and verify quasi-Einstein metric profiles "
                    "on circle-bundle hypersurface families.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True,
                           help="bundle JSON document")
        p.add_argument("--tol", type=float, default=1e-12,
                       help="relative bisection bracket width")
        p.add_argument("--grid", type=int, default=512,
                       help="verification grid size")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", default=None, help="output file path")
        p.add_argument("--m", type=float, default=None,
                       help="override m from the input document")

    p = sub.add_parser("check", help="hypothesis report")
    common(p)
    p = sub.add_parser("invariant", help="obstruction integrals for all chi")
    common(p)
    p = sub.add_parser("construct", help="build a metric profile")
    common(p)
    p.add_argument("--chi", type=str, default=None,
                   help="comma-separated signs, e.g. 1,1,-1,-1")
    p.add_argument("--e-star", type=float, default=None, dest="e_star")
    p.add_argument("--branch", choices=("plus", "minus"), default="plus")
    p = sub.add_parser("verify", help="residual and boundary report")
    common(p)
    p.add_argument("--chi", type=str, default=None)
    p.add_argument("--e-star", type=float, default=None, dest="e_star")
    p.add_argument("--branch", choices=("plus", "minus"), default="plus")
    p = sub.add_parser("sweep", help="closing function over an e_star grid")
    common(p)
    p.add_argument("--chi", type=str, default=None)
    p.add_argument("--e-min", type=float, default=1e-3, dest="e_min")
    p.add_argument("--e-max", type=float, default=1e6, dest="e_max")
    p.add_argument("--points", type=int, default=61)
    p = sub.add_parser("example", help="built-in end-to-end demo")
    common(p, needs_input=False)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        input_path=getattr(args, "input", None),
        tol=args.tol,
        grid=args.grid,
        format=args.format,
        output_path=args.output,
        chi=_parse_chi(args.chi) if getattr(args, "chi", None) else None,
        e_star=getattr(args, "e_star", None),
        branch=getattr(args, "branch", "plus"),
        m_override=args.m,
        e_min=getattr(args, "e_min", 1e-3),
        e_max=getattr(args, "e_max", 1e6),
        points=getattr(args, "points", 61),
    )


_COMMANDS = {
    "check": cmd_check,
    "invariant": cmd_invariant,
    "construct": cmd_construct,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "example": cmd_example,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _apply_thread_cap()
    try:
        config = config_from_args(args)
        return _COMMANDS[args.command](config)
    except InputError as exc:
        _print_error("input", exc, EXIT_INPUT)
        return EXIT_INPUT
    except HypothesisError as exc:
        _print_error("hypothesis", exc, EXIT_HYPOTHESIS)
        return EXIT_HYPOTHESIS
    except NumericalError as exc:
        _print_error("numerical", exc, EXIT_NUMERICAL)
        return EXIT_NUMERICAL
    except QemError as exc:
        _print_error("error", exc, EXIT_INPUT)
        return EXIT_INPUT


def _print_error(kind: str, exc: Exception, code: int) -> None:
    doc = {"error": {"kind": kind, "message": str(exc), "exit_code": code}}
    print(_json_dump(doc), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
