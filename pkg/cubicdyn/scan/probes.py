"""Built-in scan probes."""
from __future__ import annotations

from typing import Any, Dict

from ..cascade import (
    MARKOFF_EPSILON,
    budget_for,
    fit_epsilon,
    run_cascade,
    seed_dm,
    seed_markoff,
    summarize as summarize_cascade,
)
from ..fatou import fatou_seed
from ..fixed_points import SeedStrategy, property_p_screen, screen_words
from ..infinity import build_gamma_ij, escape_cascade, summarize as summarize_escape
from ..models import RunConfig, format_complex
from .base import Cell, CellProbe

DM_TAU = 0.01
DM_EPSILON = 0.05


class FatouProbe:
    name = "fatou"

    def run(self, cell: Cell, config: RunConfig) -> Dict[str, Any]:
        return fatou_seed(cell.params, config.fatou_depth, config.precision).to_dict()


class CascadeProbe:
    """Markoff seeds around the origin, or DM seeds around (a, 2, 2)."""

    name = "cascade"

    def run(self, cell: Cell, config: RunConfig) -> Dict[str, Any]:
        p = cell.params
        family = config.family.split(":", 1)[0].lower()
        samples = config.cascade_samples
        if family == "markoff":
            eps = config.cascade_epsilon or MARKOFF_EPSILON
            center = (0j, 0j, 0j)
            level0 = seed_markoff(p, center, eps, samples, cell.seed)
            budget = budget_for(eps)
            extra: Dict[str, Any] = {}
        elif cell.dm_a is not None:
            dm = seed_dm(cell.dm_a, DM_TAU)
            center = dm.base_point
            level0 = dm.level
            budget = fit_epsilon(
                level0, p, center, config.cascade_epsilon or DM_EPSILON, samples, cell.seed
            )
            extra = {"k": dm.k}
        else:
            return {"status": "skipped", "reason": f"no seed words for family {family!r}"}
        report = run_cascade(
            level0,
            p,
            budget,
            center,
            config.cascade_levels,
            samples,
            cell.seed,
            precision=config.precision,
        )
        out = summarize_cascade(report)
        out.update(extra)
        return out


class EscapeProbe:
    name = "escape"

    def run(self, cell: Cell, config: RunConfig) -> Dict[str, Any]:
        cert = escape_cascade(
            cell.params,
            build_gamma_ij("markoff"),
            config.escape_point,
            config.escape_levels,
        )
        return summarize_escape(cert)


class PropertyPProbe:
    name = "property_p"

    def run(self, cell: Cell, config: RunConfig) -> Dict[str, Any]:
        strategy = SeedStrategy(grid_n=6, random=60, seed=cell.seed)
        flags = property_p_screen(cell.params, config.property_p_max_len, strategy)
        return {
            "status": "ok",
            "words": len(screen_words(config.property_p_max_len)),
            "flags": len(flags),
            "flagged": [
                {
                    "word": rec.word,
                    "trace": format_complex(rec.restricted.trace) if rec.restricted else None,
                }
                for rec in flags
            ],
        }


PROBES: Dict[str, CellProbe] = {
    probe.name: probe
    for probe in (FatouProbe(), CascadeProbe(), EscapeProbe(), PropertyPProbe())
}
