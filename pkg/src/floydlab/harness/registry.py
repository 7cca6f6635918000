"""Named experiments and the config keys each one accepts."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..floyd import parse_scaling
from ..lab import experiments as cx
from ..lab import system_experiments as sx

__all__ = ["Experiment", "REGISTRY", "resolve_kwargs"]


@dataclass(frozen=True)
class Experiment:
    name: str
    fn: Callable
    kwargs: dict                      # config key -> function keyword
    defaults: dict = field(default_factory=dict)   # beat shared defaults, lose to explicit values
    convert: dict = field(default_factory=dict)    # config key -> value converter
    summary: str = ""

    @property
    def keys(self) -> set:
        return set(self.kwargs)


def _single(v):
    if len(v) != 1:
        raise ValueError("d takes a single value here")
    return int(v[0])


def _pair(v):
    if len(v) != 2 or v[0] > v[1]:
        raise ValueError("level_range needs two word lengths LO <= HI")
    return tuple(v)


_F = {"f": parse_scaling}

REGISTRY: dict[str, Experiment] = {e.name: e for e in [
    Experiment("fwgeod", cx.experiment_fwgeod,
               {"groups": "groups", "r": "rs", "lambdas": "lams"},
               summary="Floyd geodesics versus graph geodesics, exhaustive on small balls"),
    Experiment("theoremC", cx.experiment_theoremC,
               {"group": "group", "factor": "factor", "lambdas": "lams", "radii": "radii",
                "pool_radius": "pool_radius", "samples": "samples"},
               summary="R(H) for exact-certified Floyd geodesics between subgroup elements"),
    Experiment("injectivity", cx.experiment_injectivity_bound,
               {"group": "group", "factor": "factor", "f": "f", "kappa": "kappa", "lam": "lam",
                "radii": "radii", "samples": "samples", "level_range": "level_range",
                "hop": "hop"},
               convert={**_F, "level_range": _pair},
               summary="best constant c* with delta_G >= c* delta_H on subgroup pairs"),
    Experiment("overlap", cx.overlap_survey,
               {"group": "group", "factor": "factor", "d": "ds", "radii": "radii"},
               summary="e(d): overlap diameters of coset neighbourhoods"),
    Experiment("quasiconvexity", cx.experiment_graph_quasiconvexity,
               {"group": "group", "factor": "factor", "radii": "radii", "samples": "samples",
                "coset": "coset"},
               summary="M: distance of graph geodesics between coset elements to the coset"),
    Experiment("theoremB", cx.experiment_theoremB,
               {"group": "group", "factor": "factor", "radii": "radii", "l": "l", "c": "c",
                "d": "d", "e": "e", "samples": "samples"},
               convert={"d": _single},
               summary="w0: non-horospherical vertices of tight curves near the geodesic"),
    Experiment("system", sx.system_summary,
               {"generators": "generators", "rho": "rho", "center": "center", "L": "L",
                "N": "N", "k": "k", "m": "m", "samples": "samples"},
               summary="orbit entourage system: accounting, separation, graph export"),
    Experiment("horosphere", sx.experiment_horosphere_classification,
               {"rho": "rho", "center": "center", "N": "N", "L": "L", "k": "k",
                "levels": "levels", "samples": "samples", "sample_levels": "sample_levels",
                "conical_target": "conical_target"},
               defaults={"N": 4096},
               summary="parabolic fixed point versus random points by horosphere counts"),
    Experiment("separation", sx.experiment_separation_constants,
               {"truncations": "Ls", "N": "N", "k": "k", "samples": "samples", "mu": "mu"},
               summary="Floyd separation floors nu and rho on the linked-pairs graph"),
    Experiment("projection", sx.experiment_projection_bounds,
               {"truncations": "Ls", "N": "N", "k": "k", "samples": "samples"},
               summary="projection constants D, L, M, E on the linked-pairs graph"),
    Experiment("finiteness", sx.survey_finiteness,
               {"truncations": "Ls", "N": "N", "k": "k", "max_pairs": "max_pairs"},
               summary="non-refinable pairs, projected horospheres and overlaps"),
]}


def resolve_kwargs(exp: Experiment, cfg) -> dict:
    """Keyword arguments: section value > explicit shared value > experiment default > shared default."""
    from .config import DEFAULTS

    section = cfg.sections.get(exp.name, {})
    out = {}
    for key, kw in exp.kwargs.items():
        if key in section:
            v = section[key]
        elif key in cfg.params:
            v = cfg.params[key]
        elif key in exp.defaults:
            v = exp.defaults[key]
        elif key in DEFAULTS:
            v = DEFAULTS[key]
        else:
            continue
        if key in exp.convert:
            v = exp.convert[key](v)
        out[kw] = v
    out["seed"] = cfg.seed
    return out
