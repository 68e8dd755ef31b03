"""Config-driven verification runs with CSV output.

A config is a YAML mapping::

    slack: 1.0e-9                 # ratio <= 1 + slack passes
    family: grid_aligned          # or dyadic_only
    max_cell_visits: 100000000
    corpus:                       # corpus specs; ``repeat: k`` adds seeds seed..seed+k-1
      - {kind: log, dim: 1, level: 8, half_side: 1}
      - {kind: random_pcf, dim: 2, level: 5, half_side: 1, repeat: 50, params: {seed: 100}}
    checks:
      - theorem: T4_Lp_BMO
        exponents: [[1, 2], [2, 8]]   # (p, q) pairs
        kinds: [log, random_pcf]      # optional filter on corpus kinds
      - theorem: T5_Morrey_Linf
        exponents: [[1, 2]]
        kappa: [0.25, 0.5]
      - theorem: JN
        max_cube_level: 3
      - theorem: BILINEAR_LEBESGUE
        r: [1, 2]
        pairs: {kind: random_pcf, dim: 1, level: 8, half_side: 1, repeat: 100, params: {seed: 0}}
      - theorem: BILINEAR_MORREY
        r: [1]
        kappa: [0.5]
        pairs: {...}                  # pair i uses seeds seed+2i and seed+2i+1

Relative ``path`` entries of ``file`` corpus specs resolve against the
config file's directory.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import yaml

from ..corpus import CorpusSpec
from ..lattice import FieldFileError, PiecewiseConstantField
from ..norms import DEFAULT_MAX_CELL_VISITS, CubeFamily, bmo_norm
from .checks import (
    INTERPOLATION,
    MORREY_IDS,
    SLACK,
    TheoremId,
    VerificationReport,
    check_bilinear,
    check_interpolation,
    check_jn_family,
)

CSV_HEADER = ("theorem", "function", "p", "q", "kappa", "n", "level", "lhs", "rhs", "constant", "ratio", "pass", "vacuous")
DEFAULT_CONFIG = "default.yaml"


class ConfigError(ValueError):
    """The config cannot be read or is malformed."""


@dataclass
class SuiteResult:
    reports: list[VerificationReport]

    @property
    def failures(self) -> list[VerificationReport]:
        return [r for r in self.reports if not r.passed]

    @property
    def vacuous(self) -> int:
        return sum(r.vacuous for r in self.reports)

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def summary(self) -> str:
        lines = []
        by_theorem: dict[str, list[VerificationReport]] = {}
        for r in self.reports:
            by_theorem.setdefault(str(r.theorem), []).append(r)
        for name, reps in by_theorem.items():
            bad = sum(not r.passed for r in reps)
            worst = max((r.ratio for r in reps if not r.vacuous), default=0.0)
            lines.append(f"{name:<18} {len(reps):5d} checks  {bad:3d} failed  max ratio {worst:.6g}")
        lines.append(
            f"total {len(self.reports)} checks, {len(self.failures)} failed, {self.vacuous} vacuous"
        )
        for r in self.failures:
            lines.append(f"FAIL {r.theorem} {r.function} p={r.p} q={r.q} kappa={r.kappa} ratio={r.ratio!r} {r.note}")
        return "\n".join(lines)


def default_config_path() -> Path:
    return Path(str(resources.files("interpineq") / "data" / DEFAULT_CONFIG))


def load_config(path: str | os.PathLike) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror or exc}") from exc
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    cfg.setdefault("base_dir", str(path.parent))
    return cfg


def _expand(entry: Mapping[str, Any], base_dir: str | None) -> list[CorpusSpec]:
    if not isinstance(entry, Mapping) or "kind" not in entry:
        raise ConfigError(f"corpus entry needs a kind: {entry!r}")
    entry = dict(entry)
    repeat = int(entry.pop("repeat", 1))
    params = dict(entry.get("params", {}))
    out = []
    for i in range(repeat):
        p = dict(params)
        if repeat > 1:
            p["seed"] = int(p.get("seed", 0)) + i
        try:
            spec = CorpusSpec.from_dict(dict(entry, params=p))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad corpus entry {entry!r}: {exc}") from exc
        out.append(replace(spec, base_dir=base_dir) if base_dir else spec)
    return out


def _build(spec: CorpusSpec) -> PiecewiseConstantField:
    try:
        return spec.build()
    except FieldFileError:
        raise
    except OSError as exc:
        raise FieldFileError(spec.params.get("path", "?"), exc.strerror or str(exc)) from exc


def _family(cfg: Mapping[str, Any]) -> CubeFamily:
    try:
        return CubeFamily(
            cfg.get("family", "grid_aligned"),
            int(cfg.get("max_cell_visits", DEFAULT_MAX_CELL_VISITS)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _theorem(check: Mapping[str, Any]) -> TheoremId:
    try:
        return TheoremId(check["theorem"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"check needs a valid theorem id: {check!r}") from exc


def _cached_bmo(caches: dict, spec: CorpusSpec, f: PiecewiseConstantField, family: CubeFamily) -> float:
    cache = caches.setdefault(spec.name, {})
    key = ("bmo_norm", family)
    if key not in cache:
        cache[key] = bmo_norm(f, family)
    return cache[key]


def run_suite(cfg: Mapping[str, Any]) -> SuiteResult:
    """Run every configured check; reports are sorted deterministically.

    All fields are built before any check runs, so an unreadable field file
    fails the run before anything is computed or written.
    """
    family = _family(cfg)
    slack = float(cfg.get("slack", SLACK))
    base_dir = cfg.get("base_dir")
    checks = cfg.get("checks") or []
    if not isinstance(checks, list):
        raise ConfigError("checks must be a list")

    specs: list[CorpusSpec] = []
    for entry in cfg.get("corpus") or []:
        specs.extend(_expand(entry, base_dir))
    fields = [(s, _build(s)) for s in specs]
    pair_sets = []
    for check in checks:
        theorem = _theorem(check)
        if theorem in (TheoremId.BILINEAR_LEBESGUE, TheoremId.BILINEAR_MORREY):
            if "pairs" not in check:
                raise ConfigError(f"{theorem} check needs a pairs entry")
            pair_specs = _expand(dict(check["pairs"], repeat=2 * int(check["pairs"].get("repeat", 1))), base_dir)
            built = [(s, _build(s)) for s in pair_specs]
            pair_sets.append(list(zip(built[0::2], built[1::2])))
        else:
            pair_sets.append(None)

    caches: dict[str, dict] = {}
    reports: list[VerificationReport] = []
    for check, pairs in zip(checks, pair_sets):
        theorem = _theorem(check)
        kinds = check.get("kinds")
        selected = [(s, f) for s, f in fields if kinds is None or s.kind in kinds]
        if theorem in INTERPOLATION:
            exps = check.get("exponents")
            if not exps:
                raise ConfigError(f"{theorem} check needs exponents")
            kappas = check.get("kappa", [None]) if theorem in MORREY_IDS else [None]
            for spec, f in selected:
                cache = caches.setdefault(spec.name, {})
                for p, q in exps:
                    for kappa in kappas:
                        reports.append(
                            check_interpolation(
                                f, theorem, float(p), float(q), None if kappa is None else float(kappa),
                                family, function=spec.name, slack=slack, cache=cache,
                            )
                        )
        elif theorem is TheoremId.JN:
            level = int(check.get("max_cube_level", 3))
            for spec, f in selected:
                bmo = _cached_bmo(caches, spec, f, family)
                rep = check_jn_family(f, level, bmo=bmo, family=family, function=spec.name, slack=slack)
                reports.append(rep)
        else:
            rs = check.get("r", [1])
            kappas = check.get("kappa", [0.5]) if theorem is TheoremId.BILINEAR_MORREY else [None]
            for (sF, F), (sG, G) in pairs:
                bF = _cached_bmo(caches, sF, F, family)
                bG = _cached_bmo(caches, sG, G, family)
                for r in rs:
                    for kappa in kappas:
                        reports.append(
                            check_bilinear(
                                F, G, theorem, float(r), None if kappa is None else float(kappa), family,
                                function=f"{sF.name}|{sG.name}", bmo_F=bF, bmo_G=bG, slack=slack,
                            )
                        )
    reports.sort(key=VerificationReport.sort_key)
    return SuiteResult(reports)


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def reports_csv(reports: list[VerificationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(
            _cell(v)
            for v in (
                str(r.theorem), r.function, r.p, r.q, r.kappa, r.n, r.level,
                r.lhs, r.rhs, r.constant, r.ratio, r.passed, r.vacuous,
            )
        )
    return buf.getvalue()


def write_csv_atomic(text: str, path: str | os.PathLike) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
