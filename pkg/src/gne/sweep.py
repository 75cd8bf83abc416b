"""Convergence sweeps of ent / (N ln N) written as CSV rows.

Columns (entropies in nats, the normalized rate is base-free):

    model, params, N, nats, bits, normalized_rate, target_rate, stderr,
    method, e_series, seeds

Exact families never materialise a graph. The hybrid family runs the Monte
Carlo estimator once per seed (in a process pool capped by ``GNE_THREADS``)
and reports the finite-N series next to it.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .entropy import RateConstants
from .errors import ValidationError
from .hybrid import HybridParams, e_series, mc_entropy, rate_hybrid
from .models import MODEL_CLASSES, SmallWorld, exact_entropy, rate

COLUMNS = ["model", "params", "N", "nats", "bits", "normalized_rate", "target_rate",
           "stderr", "method", "e_series", "seeds"]

_PARAM_KEYS = {
    "er-binary": ("alpha",),
    "er-named": ("alpha", "beta", "A"),
    "smallworld": ("alpha", "gamma"),
    "hamming": ("alpha", "beta", "A", "d"),
    "tree-seq": (),
    "tree-uniform": (),
    "hybrid": ("alpha", "beta", "A"),
}


@dataclass
class SweepSpec:
    model: str
    params: dict = field(default_factory=dict)
    sizes: list = field(default_factory=list)  # N, or the torus side n for smallworld
    seeds: int = 1
    root_seed: int = 0
    link_samples: int = 32
    ordered: bool = True
    csv_path: str | None = None

    def validate(self):
        if self.model not in _PARAM_KEYS:
            raise ValidationError(f"unknown model {self.model!r}")
        missing = [k for k in _PARAM_KEYS[self.model] if k not in self.params]
        if missing:
            raise ValidationError(f"{self.model} sweep needs {', '.join(missing)}")
        if not self.sizes:
            raise ValidationError("size list is empty")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValidationError("size list must be strictly increasing")
        if self.seeds < 1:
            raise ValidationError("seeds must be >= 1")
        if self.model == "hybrid":
            if not self.ordered:
                raise ValidationError("the unordered hybrid entropy has no estimator; sweep the ordered model")
            if self.link_samples < 1:
                raise ValidationError("link_samples must be >= 1")
        for s in self.sizes:
            self.point(s, 0).validate()

    def point(self, size: int, seed: int):
        kw = {k: self.params[k] for k in _PARAM_KEYS[self.model]}
        if self.model == "hybrid":
            return HybridParams(N=size, seed=seed, ordered=self.ordered, **kw)
        if self.model == "smallworld":
            return SmallWorld(n=size, seed=seed, **kw)
        return MODEL_CLASSES[self.model](N=size, seed=seed, **kw)


def split_seeds(root_seed: int, size: int, count: int) -> list[int]:
    """Counter-based seeds: child (size, i) of the root SeedSequence."""
    return [int(np.random.SeedSequence(root_seed, spawn_key=(size, i)).generate_state(1, np.uint64)[0])
            for i in range(count)]


def worker_count(tasks: int) -> int:
    cap = os.environ.get("GNE_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValidationError("GNE_THREADS must be an integer") from None
    return max(1, min(n, tasks))


def _mc_task(args):
    params, link_samples = args
    rep = mc_entropy(params, link_samples)
    return rep.nats, rep.stderr


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _params_str(spec: SweepSpec) -> str:
    return ";".join(f"{k}={spec.params[k]}" for k in _PARAM_KEYS[spec.model])


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Compute one row per size; write them to ``spec.csv_path`` when set."""
    spec.validate()
    rows = []
    if spec.model == "hybrid":
        p = spec.params
        target = rate_hybrid(RateConstants(alpha=p["alpha"], beta=p["beta"], A=p["A"]))
        tasks, keys = [], []
        for s in spec.sizes:
            for sd in split_seeds(spec.root_seed, s, spec.seeds):
                tasks.append((spec.point(s, sd), spec.link_samples))
                keys.append((s, sd))
        workers = worker_count(len(tasks))
        if workers == 1:
            results = [_mc_task(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_mc_task, tasks))
        by_size: dict[int, list] = {}
        for (s, sd), res in zip(keys, results):
            by_size.setdefault(s, []).append((sd, res))
        for s in spec.sizes:
            got = by_size[s]
            vals = np.array([r[0] for _, r in got])
            nats = float(vals.mean())
            if len(vals) > 1:
                stderr = float(vals.std(ddof=1) / math.sqrt(len(vals)))
            else:
                stderr = got[0][1][1]
            es = e_series(s, RateConstants(alpha=p["alpha"], beta=p["beta"], A=p["A"]),
                          L=spec.point(s, 0).L).total
            rows.append(_row(spec, s, nats, target, stderr, "monte_carlo", es,
                             [sd for sd, _ in got]))
    else:
        target = rate(spec.point(spec.sizes[0], 0))
        for s in spec.sizes:
            rep = exact_entropy(spec.point(s, 0))
            rows.append(_row(spec, rep.N, rep.nats, target, None, "exact", None, []))
    if spec.csv_path:
        write_csv(spec.csv_path, rows)
    return rows


def _row(spec, N, nats, target, stderr, method, es, seeds) -> dict:
    return {
        "model": spec.model if spec.model != "hybrid" else "hybrid-ordered",
        "params": _params_str(spec),
        "N": N,
        "nats": nats,
        "bits": nats / math.log(2),
        "normalized_rate": nats / (N * math.log(N)),
        "target_rate": target,
        "stderr": stderr,
        "method": method,
        "e_series": es,
        "seeds": ";".join(str(x) for x in seeds),
    }


def write_csv(target, rows: list[dict]) -> None:
    """Write rows to a path or an open text stream."""
    if hasattr(target, "write"):
        _write_rows(target, rows)
        return
    with open(target, "w", newline="") as fh:
        _write_rows(fh, rows)


def _write_rows(fh, rows):
    w = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (_fmt(v) if isinstance(v, float) or v is None else v) for k, v in r.items()})
