"""Command-line entry point for cubicdyn.

Every subcommand writes its machine output (JSON, CSV, JSONL, PPM) to
stdout or ``--out`` and status lines to stderr. Exit codes: 0 when every
contract of the command held, 1 when a computation failed or a check did
not pass, 2 for unusable arguments or paths.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from cubicdyn import __version__
from cubicdyn.action import orbit_csv, orbit_trace
from cubicdyn.cascade import MARKOFF_EPSILON, dm_cascade, markoff_cascade
from cubicdyn.config import apply_overrides, load_run_config, resolve_workers
from cubicdyn.console import configure_logging, get_logger, status
from cubicdyn.errors import ConfigError, CubicDynError
from cubicdyn.fatou import bq_orbit_test, certify_monotone_escape, fatou_seed
from cubicdyn.fibers import fiber_table, grid_values
from cubicdyn.fixed_points import (
    SeedStrategy,
    newton_fixed_points,
    property_p_screen,
    shear_census,
)
from cubicdyn.infinity import build_gamma_ij, escape_cascade
from cubicdyn.models import FatouStatus, Precision, format_complex, parse_complex
from cubicdyn.picard import (
    hyperbolic_locus_check,
    singular_jacobian_identities,
    verify_semiconjugacy,
)
from cubicdyn.scan import (
    ScanEngine,
    append_record,
    prepare_resume,
    read_records,
    write_header,
    write_heatmap,
)
from cubicdyn.surface import parse_family
from cubicdyn.words import ElementKind, classify, cyclic_reduce, ind_attr, parse_word, to_g, to_sl2

log = get_logger("cubicdyn.cli")

SEMICONJUGACY_TOL = 1e-9


class UsageError(Exception):
    """Arguments that parse but cannot be used; exit code 2."""


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _point(text: str) -> list[complex]:
    parts = [s for s in text.split(",") if s.strip()]
    if len(parts) != 3:
        raise UsageError(f"--point needs three comma-separated values, got {text!r}")
    try:
        return [parse_complex(s) for s in parts]
    except ValueError as e:
        raise UsageError(str(e)) from e


def _params(text: str):
    try:
        return parse_family(text)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _word(text: str):
    try:
        return parse_word(text)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _default(obj: Any) -> Any:
    if isinstance(obj, complex):
        return format_complex(obj)
    if hasattr(obj, "item"):
        return obj.item()
    return str(obj)


def _json(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_default) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as e:
            raise UsageError(f"cannot write {out}: {e}") from e
        status(f"wrote {out}")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_classify_word(args: argparse.Namespace) -> int:
    w = _word(args.word)
    cls = classify(w)
    core, conj = cyclic_reduce(w)
    payload: dict[str, Any] = {
        "word": w.spelling,
        "length": len(w),
        "kind": cls.kind.value,
        "core": core.spelling,
        "conjugator": conj.spelling,
    }
    if w.in_gamma:
        M = to_sl2(w)
        payload["g_word"] = to_g(w)
        payload["matrix"] = list(M.as_tuple())
        payload["trace"] = M.trace
    if cls.kind == ElementKind.HYPERBOLIC and conj.is_identity:
        ind, attr = ind_attr(w)
        payload["ind"], payload["attr"] = ind.value, attr.value
    _emit(_json(payload), args.out)
    return 0


def cmd_orbit(args: argparse.Namespace) -> int:
    p = _params(args.params)
    w = _word(args.word)
    rows = orbit_trace(p, w, _point(args.point))
    _emit(orbit_csv(rows), args.out)
    if len(rows) <= len(w):
        status(f"orbit escaped after {len(rows) - 1} letters")
        return 1
    return 0


def cmd_certify_fatou(args: argparse.Namespace) -> int:
    p = _params(args.params)
    if args.point:
        cert = certify_monotone_escape(p, _point(args.point), args.depth, args.precision)
        payload = cert.model_dump(mode="json")
    else:
        seed = fatou_seed(p, args.depth, args.precision)
        cert = seed.certificate
        payload = cert.model_dump(mode="json")
        payload["seed"] = seed.to_dict()
    _emit(_json(payload), args.out)
    status(f"{cert.status.value} at depth {cert.depth} ({cert.words_checked} words)")
    return 0 if cert.status == FatouStatus.CERTIFIED else 1


def cmd_bq_test(args: argparse.Namespace) -> int:
    report = bq_orbit_test(_params(args.params), _point(args.point), args.depth)
    _emit(_json(report.model_dump(mode="json")), args.out)
    return 0 if report.condition1 and report.condition2_violations == 0 else 1


def cmd_cascade(args: argparse.Namespace) -> int:
    name, _, body = args.family.partition(":")
    if name == "markoff":
        report = markoff_cascade(
            args.levels, args.samples, args.eps or MARKOFF_EPSILON, args.seed, args.precision
        )
        payload = report.model_dump(mode="json")
    elif name == "dm":
        try:
            a = float(body)
        except ValueError as e:
            raise UsageError(f"dm family needs a real parameter, got {body!r}") from e
        dm, report = dm_cascade(
            a, args.levels, args.samples, epsilon=args.eps or 0.05, seed=args.seed,
            precision=args.precision,
        )
        payload = report.model_dump(mode="json")
        payload["dm_seed"] = {"k": dm.k, "conditioning": dm.conditioning}
    else:
        raise UsageError(f"cascade supports markoff and dm:a, not {args.family!r}")
    payload["budget_line"] = [report.budget.K / 2**n for n in range(len(report.levels))]
    _emit(_json(payload), args.out)
    status("decay within K/2^n" if report.decay_ok else "decay budget exceeded")
    return 0 if report.decay_ok else 1


def cmd_escape(args: argparse.Namespace) -> int:
    p = _params(args.params)
    gammas = build_gamma_ij(args.style, args.k)
    cert = escape_cascade(p, gammas, _point(args.point), args.levels)
    _emit(_json(cert.model_dump(mode="json", by_alias=True)), args.out)
    ok = all(lv.bound_ok for lv in cert.levels)
    if not ok:
        status("measured distance above the lambda^(4^n) bound")
    return 0 if ok else 1


def cmd_picard_verify(args: argparse.Namespace) -> int:
    w = _word(args.word)
    residual = verify_semiconjugacy(w, args.samples, args.seed)
    payload: dict[str, Any] = {"word": w.spelling, "semiconjugacy_residual": residual}
    ok = residual < SEMICONJUGACY_TOL
    if w.in_gamma and not w.is_identity:
        ident = singular_jacobian_identities(to_sl2(w))
        payload["jacobian_identities"] = ident
        ok = ok and ident["ok"]
    if args.locus:
        payload["locus"] = hyperbolic_locus_check(w)
    _emit(_json(payload), args.out)
    if not ok:
        status(f"residual {residual:.3e} or identity check failed")
    return 0 if ok else 1


def cmd_fixed_points(args: argparse.Namespace) -> int:
    p = _params(args.params)
    strategy = SeedStrategy(grid_n=args.grid, random=args.random, seed=args.seed)
    search = newton_fixed_points(p, _word(args.word), strategy)
    payload = {
        "seeds": search.seeds,
        "converged": search.converged,
        "records": [r.model_dump(mode="json") for r in search.records],
    }
    _emit(_json(payload), args.out)
    return 0


def cmd_property_p(args: argparse.Namespace) -> int:
    flags = property_p_screen(_params(args.params), args.maxlen)
    _emit(_json([r.model_dump(mode="json") for r in flags]), args.out)
    status(f"{len(flags)} borderline fixed points")
    return 0


def cmd_fiber_table(args: argparse.Namespace) -> int:
    p = _params(args.params)
    if args.values:
        try:
            values = [parse_complex(s) for s in args.values.split(",") if s.strip()]
        except ValueError as e:
            raise UsageError(str(e)) from e
    else:
        values = list(grid_values(args.grid))
    _emit(fiber_table(p, args.axis, values), args.out)
    return 0


def cmd_shear_census(args: argparse.Namespace) -> int:
    report = shear_census(_params(args.params), args.axis, args.c, args.samples, args.seed)
    _emit(_json(report), args.out)
    counts = report["counts"]
    return 0 if counts["other"] == 0 else 1


def cmd_scan(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    config = apply_overrides(
        config,
        {"seed": args.seed, "precision": args.precision, "workers": args.workers, "output": args.out},
    )
    out = config.output
    if not out:
        raise UsageError("scan needs --out or an output path in the config")
    done: set[int] = set()
    path = Path(out)
    if args.resume and path.exists():
        done = prepare_resume(path, config)
        mode = "a"
    else:
        mode = "w"
    engine = ScanEngine(config, workers=resolve_workers(config))
    errors = 0
    written = 0
    with open(path, mode, encoding="utf-8") as f:
        if mode == "w":
            write_header(f, config)
        for record in engine.run(done):
            append_record(f, record)
            written += 1
            for name in config.probes:
                entry = getattr(record, name)
                if entry and entry.get("status") == "error":
                    errors += 1
    status(f"{written} cells written to {out} ({len(done)} resumed, {errors} probe errors)")
    return 0 if errors == 0 else 1


def cmd_heatmap(args: argparse.Namespace) -> int:
    try:
        _, records = read_records(args.records)
    except OSError as e:
        raise UsageError(f"cannot read {args.records}: {e}") from e
    size = write_heatmap(args.out, records, args.field, lo=args.lo, hi=args.hi)
    status(f"wrote {args.out} ({size} bytes, {len(records)} cells)")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add(
    sub: Any, name: str, func: Callable[[argparse.Namespace], int], help: str
) -> argparse.ArgumentParser:
    p = sub.add_parser(name, help=help)
    p.set_defaults(func=func)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cubicdyn", description="Dynamics on cubic surfaces")
    parser.add_argument("--version", action="version", version=f"cubicdyn {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, params: Optional[str] = "markoff") -> None:
        if params is not None:
            p.add_argument("--params", default=params, help="Parameter family, e.g. markoff, dm:0")
        p.add_argument("--out", help="Output file (default stdout)")

    precision = dict(choices=[m.value for m in Precision], default=Precision.DD.value)

    p = _add(sub, "classify-word", cmd_classify_word, "Classify a word of the group")
    p.add_argument("word")
    common(p, None)

    p = _add(sub, "orbit", cmd_orbit, "Letter-by-letter orbit of a point as CSV")
    common(p)
    p.add_argument("--word", required=True)
    p.add_argument("--point", required=True)

    p = _add(sub, "certify-fatou", cmd_certify_fatou, "Monotone-escape certificate")
    common(p)
    p.add_argument("--point", help="Start point; default is the diagonal escape seed")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--precision", **precision)

    p = _add(sub, "bq-test", cmd_bq_test, "Orbit conditions on even words")
    common(p)
    p.add_argument("--point", required=True)
    p.add_argument("--depth", type=int, default=8)

    p = _add(sub, "cascade", cmd_cascade, "Commutator cascade decay")
    common(p, None)
    p.add_argument("--family", default="markoff", help="markoff or dm:a")
    p.add_argument("--eps", type=float)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--precision", **precision)

    p = _add(sub, "escape", cmd_escape, "Escape cascade towards the triangle at infinity")
    common(p)
    p.add_argument("--point", default="10000,2,3")
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--style", choices=["markoff", "dm"], default="markoff")
    p.add_argument("--k", type=int, default=1)

    p = _add(sub, "picard-verify", cmd_picard_verify, "Exact checks at (0, 0, 0, 4)")
    common(p, None)
    p.add_argument("--word", required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--locus", action="store_true", help="Also run the fixed-point confinement check")

    p = _add(sub, "fixed-points", cmd_fixed_points, "Newton search for fixed points of a word")
    common(p)
    p.add_argument("--word", required=True)
    p.add_argument("--grid", type=int, default=20)
    p.add_argument("--random", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)

    p = _add(sub, "property-p", cmd_property_p, "Screen hyperbolic words for non-saddle fixed points")
    common(p)
    p.add_argument("--maxlen", type=int, default=4)

    p = _add(sub, "fiber-table", cmd_fiber_table, "Classify fibers as CSV")
    common(p)
    p.add_argument("--axis", choices=["x", "y", "z"], default="x")
    p.add_argument("--values", help="Comma-separated fiber constants")
    p.add_argument("--grid", choices=["shear", "periodic"], default="periodic")

    p = _add(sub, "shear-census", cmd_shear_census, "Classify points of a periodic fiber")
    common(p)
    p.add_argument("--axis", choices=["x", "y", "z"], default="x")
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    p = _add(sub, "scan", cmd_scan, "Run a parameter scan from a YAML config")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--precision", choices=[m.value for m in Precision])
    p.add_argument("--resume", action="store_true")

    p = _add(sub, "heatmap", cmd_heatmap, "Render one scan field as a PPM image")
    p.add_argument("records")
    p.add_argument("--field", required=True, help="Dotted path, e.g. cascade.levels.2")
    p.add_argument("--out", required=True)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console entry point for ``cubicdyn``."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as e:
        status(f"error: {e}")
        return 2
    except CubicDynError as e:
        status(f"{type(e).__name__}: {e}")
        log.debug("context: %s", e.context)
        return 1


if __name__ == "__main__":
    sys.exit(main())
