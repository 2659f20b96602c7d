"""Analyses behind the CLI and the ``run`` report.

Every analysis returns an :class:`AnalysisResult`: a JSON-ready ``data``
tree plus the ids of any must-pass assertions that failed.  Results are
deterministic for a fixed config and seed; wall-times are recorded only on
request so that reports can be compared byte for byte.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import __version__
from . import ccr as ccr_mod
from . import conditions, export, kernel, sa_analysis
from .config import RunConfig
from .errors import ConfigError
from .spectra import Exactness, Spectrum, with_exactness
from .timeop import (
    PerturbationSequence,
    build_truncation,
    parse_alpha,
    perturb,
    sample_perturbations,
)

# Float64 slack on the norm-bound and spectral-reality assertions.
NORM_BOUND_ATOL = 1e-12
IMAG_RTOL = 1e-10
# Float64 tolerance on CCR residuals, relative to hbar * ||phi||.
CCR_FLOAT_RTOL = 1e-12
# Float64 tolerance when comparing perturbed and unperturbed residuals.
CLASS_GEN_ATOL = 1e-13
KERNEL_RTOL = 1e-8


@dataclass
class AnalysisResult:
    kind: str
    params: dict
    data: dict
    failures: list = field(default_factory=list)
    wall_time: Optional[float] = None

    def to_dict(self, timings: bool = False) -> dict:
        out = {"kind": self.kind, "params": self.params, "result": self.data,
               "failures": list(self.failures)}
        if timings:
            out["wall_time_s"] = self.wall_time
        return out


def _float_spec(spec: Spectrum) -> Spectrum:
    return spec if not spec.is_exact else with_exactness(spec, Exactness.FLOAT64)


def _alpha(text, exact: bool) -> Optional[PerturbationSequence]:
    return None if text in (None, "") else parse_alpha(str(text), exact)


# ---------------------------------------------------------------------------
# individual analyses
# ---------------------------------------------------------------------------

def analyse_check(spec: Spectrum, horizon: int, condition: str = "both") -> AnalysisResult:
    reports = {}
    if condition in ("both", "inverse_square"):
        reports["inverse_square"] = conditions.inverse_square_sum(spec, horizon).to_dict()
    if condition in ("both", "hilbert_schmidt"):
        reports["hilbert_schmidt"] = conditions.hilbert_schmidt_sum(spec, horizon).to_dict()
    if not reports:
        raise ConfigError("condition", f"unknown condition {condition!r}")
    data = reports if condition == "both" else next(iter(reports.values()))
    return AnalysisResult("check", {"horizon": horizon, "condition": condition}, data)


def analyse_build(spec: Spectrum, N: int, alpha: Optional[str] = None,
                  out: Optional[Path] = None) -> AnalysisResult:
    T = build_truncation(spec, N)
    a = _alpha(alpha, spec.is_exact)
    if a is not None:
        T = perturb(T, a)
    data = export.sidecar(T)
    data["nonzeros"] = len(T.nonzeros())
    data["hermitian"] = T.is_hermitian()
    failures = [] if data["hermitian"] else ["build.not_hermitian"]
    if out is not None:
        export.export_matrix(T, out)
        data["matrix_path"] = str(out)
        data["sidecar_path"] = str(export.sidecar_path(out))
    return AnalysisResult("build", {"N": N, "alpha": alpha}, data, failures)


def ccr_rows(spec: Spectrum, suite, alpha: Optional[PerturbationSequence] = None,
             closure_levels: int = 10) -> tuple[list, list]:
    """Residual table for a generator suite and the failed assertion ids.

    The quantity that must vanish is the residual against ``i hbar phi`` at
    ``M = 1`` and the defect against ``i hbar rowmix(phi)`` for ``M >= 2``.
    """
    rows, failures = [], []
    hbar = float(spec.hbar)
    for name, elem in suite:
        phi = elem.expansion
        res = ccr_mod.ccr_residual(spec, phi, alpha)
        target = res.residual if spec.M == 1 else res.defect_vector
        if spec.is_exact:
            ok = target.is_zero()
            closure = ccr_mod.closure_holds(spec, phi, closure_levels, alpha)
            ok = ok and closure
        else:
            ok = target.norm() <= CCR_FLOAT_RTOL * hbar * phi.norm()
            closure = None
        rows.append({
            "generator": name,
            "residual_norm": res.residual_norm,
            "defect_norm": res.defect_norm,
            "exact_zero": res.exact_zero,
            "defect_zero": res.defect_zero,
            "closure": closure,
            "verdict": "pass" if ok else "fail",
        })
        if not ok:
            tag = "residual" if spec.M == 1 else "defect"
            mode = "exact" if spec.is_exact else "float"
            failures.append(f"ccr.{mode}_{tag}_nonzero:{name}")
    return rows, failures


def analyse_ccr(spec: Spectrum, L: int, exact: bool = False, n_random: int = 0,
                seed: int = 0, alpha: Optional[str] = None) -> AnalysisResult:
    if exact:
        spec = with_exactness(spec, Exactness.EXACT)
    suite = ccr_mod.generator_suite(L, spec.M, spec.is_exact, random.Random(seed), n_random)
    rows, failures = ccr_rows(spec, suite, _alpha(alpha, spec.is_exact))
    data = {"arithmetic": spec.exactness.value, "M": spec.M, "L": L,
            "must_vanish": "residual" if spec.M == 1 else "defect_vector", "rows": rows}
    return AnalysisResult("ccr", {"L": L, "exact": exact, "n_random": n_random,
                                  "seed": seed, "alpha": alpha}, data, failures)


def analyse_spectrum(spec: Spectrum, N_list: Sequence[int], top: int = 5) -> AnalysisResult:
    rows, failures = [], []
    for row in sa_analysis.convergence_study(_float_spec(spec), list(N_list), top):
        if row.max_imag_part > IMAG_RTOL * (1 + row.extreme_abs):
            failures.append(f"spectrum.imaginary_part:N={row.N}")
        if row.extreme_abs > row.norm_bound + NORM_BOUND_ATOL:
            failures.append(f"spectrum.norm_bound:N={row.N}")
        rows.append({
            "N": row.N,
            "leading": [float(x) for x in row.leading],
            "diffs": None if row.diffs is None else [float(x) for x in row.diffs],
            "max_imag": row.max_imag_part,
            "extreme_abs": row.extreme_abs,
            "norm_bound": row.norm_bound,
        })
    return AnalysisResult("spectrum", {"N": list(N_list), "top": top}, {"rows": rows}, failures)


def spectrum_csv(result: AnalysisResult) -> str:
    K = result.params["top"]
    header = ["N"] + [f"lambda_{k}" for k in range(1, K + 1)] + ["max_imag", "extreme_abs",
                                                                "norm_bound"]
    lines = [",".join(header)]
    for row in result.data["rows"]:
        lead = [export.fmt_float(x) for x in row["leading"]] + [""] * (K - len(row["leading"]))
        cells = [str(row["N"])] + lead + [export.fmt_float(row[k])
                                          for k in ("max_imag", "extreme_abs", "norm_bound")]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def analyse_deficiency(spec: Spectrum, N: int, R: Optional[int] = None, sign: int = 1,
                       channel: str = "full") -> AnalysisResult:
    probe = sa_analysis.deficiency_probe(_float_spec(spec), N, R, sign, channel)
    data = probe.to_dict()
    data["consistent"] = probe.sigma_min >= 1 - 1e-10
    return AnalysisResult("deficiency", {"N": N, "R": probe.rows, "sign": sign,
                                         "channel": channel}, data)


def analyse_kernel(spec: Spectrum, N: int, nodes: int, length: float = 1.0,
                   dump_grid: Optional[Path] = None) -> AnalysisResult:
    basis = kernel.box_basis(length, N, spec.M)
    fspec = _float_spec(spec)
    probe = kernel.hs_identity_check(basis, fspec, N, nodes)
    data = probe.to_dict()
    failures = [] if probe.rel_err <= KERNEL_RTOL else ["kernel.hs_identity"]
    if dump_grid is not None:
        kernel.dump_grid(basis, fspec, N, nodes, dump_grid)
        data["grid_path"] = str(dump_grid)
    return AnalysisResult("kernel", {"N": N, "nodes": nodes, "length": length}, data, failures)


def analyse_class_gen(spec: Spectrum, K: int, L: int, N: Optional[int] = None,
                      alpha: Optional[str] = None, seed: int = 0,
                      n_random: int = 0) -> AnalysisResult:
    """Build ``K`` perturbed truncations and re-run the CCR suite under each.

    Passing means every perturbed truncation is Hermitian and every suite
    residual is unchanged (exactly, or to ``CLASS_GEN_ATOL`` in float mode).
    """
    rng = random.Random(seed)
    N = N if N is not None else max(2 * L, 2)
    base = _alpha(alpha, spec.is_exact)
    members = sample_perturbations(rng, K, spec.is_exact, base)
    suite = ccr_mod.generator_suite(L, spec.M, spec.is_exact, rng, n_random)
    reference = [ccr_mod.ccr_residual(spec, e.expansion).residual for _, e in suite]
    T0 = build_truncation(spec, N)
    rows, failures = [], []
    for idx, a in enumerate(members):
        hermitian = perturb(T0, a).is_hermitian()
        worst = 0.0
        for (name, elem), ref in zip(suite, reference):
            perturbed = ccr_mod.ccr_residual(spec, elem.expansion, a).residual
            worst = max(worst, float((perturbed - ref).max_abs()))
        unchanged = worst == 0 if spec.is_exact else worst <= CLASS_GEN_ATOL
        if not hermitian:
            failures.append(f"class_gen.not_hermitian:{idx}")
        if not unchanged:
            failures.append(f"class_gen.residual_changed:{idx}")
        rows.append({"index": idx, "alpha": a.describe(), "alpha_id": a.alpha_id,
                     "bound": a.bound, "hermitian": hermitian,
                     "max_residual_change": worst, "unchanged": unchanged})
    data = {"N": N, "L": L, "suite_size": len(suite), "rows": rows}
    return AnalysisResult("class_gen", {"K": K, "L": L, "N": N, "alpha": alpha, "seed": seed},
                          data, failures)


# ---------------------------------------------------------------------------
# config-driven run
# ---------------------------------------------------------------------------

def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _require(analysis: dict, key: str, loc: str):
    if key not in analysis:
        raise ConfigError(f"{loc}.{key}", "required")
    return analysis[key]


def dispatch(cfg: RunConfig, analysis: dict, loc: str) -> AnalysisResult:
    spec, kind = cfg.spectrum, analysis["kind"]
    path = (lambda key: None if analysis.get(key) is None else cfg.base_dir / analysis[key])
    if kind == "check":
        horizon = analysis.get("horizon", analysis.get("N"))
        if horizon is None:
            raise ConfigError(f"{loc}.horizon", "required")
        return analyse_check(spec, horizon, analysis.get("condition", "both"))
    if kind == "build":
        return analyse_build(spec, _require(analysis, "N", loc), analysis.get("alpha"),
                             path("out"))
    if kind == "ccr":
        return analyse_ccr(spec, _require(analysis, "L", loc), bool(analysis.get("exact", False)),
                           analysis.get("n_random", 0), cfg.seed, analysis.get("alpha"))
    if kind == "spectrum":
        return analyse_spectrum(spec, _as_list(_require(analysis, "N", loc)),
                                analysis.get("top", 5))
    if kind == "deficiency":
        sign = analysis.get("sign", 1)
        if sign not in (1, -1, "+", "-"):
            raise ConfigError(f"{loc}.sign", "must be +1, -1, '+' or '-'")
        sign = {"+": 1, "-": -1}.get(sign, sign)
        return analyse_deficiency(spec, _require(analysis, "N", loc), analysis.get("R"), sign,
                                  analysis.get("channel", "full"))
    if kind == "kernel":
        return analyse_kernel(spec, _require(analysis, "N", loc), _require(analysis, "nodes", loc),
                              float(analysis.get("length", 1.0)), path("dump_grid"))
    if kind == "class_gen":
        return analyse_class_gen(spec, _require(analysis, "K", loc), _require(analysis, "L", loc),
                                 analysis.get("N"), analysis.get("alpha"), cfg.seed,
                                 analysis.get("n_random", 0))
    raise ConfigError(f"{loc}.kind", f"unknown analysis {kind!r}")


def run(cfg: RunConfig, timings: bool = False,
        progress: Optional[Callable[[str], None]] = None) -> dict:
    """Execute the configured analyses in declared order; returns the report tree."""
    results = []
    for idx, analysis in enumerate(cfg.analyses):
        if progress:
            progress(f"analysis[{idx}] {analysis['kind']}")
        start = time.perf_counter()
        res = dispatch(cfg, analysis, f"analysis[{idx}]")
        res.wall_time = time.perf_counter() - start
        results.append(res)
    failures = [f for r in results for f in r.failures]
    return {
        "tool": "chronolab",
        "version": __version__,
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "spectrum": {"spectrum_id": cfg.spectrum.spectrum_id, **cfg.spectrum.to_dict()},
        "analyses": [r.to_dict(timings) for r in results],
        "failures": failures,
        "status": "pass" if not failures else "fail",
    }
