"""Origami enumeration, the zero-Forni census, the diagram census, and the
pipeline with manifests.

Origamis are enumerated up to simultaneous conjugation: sigma_h runs over one
canonical representative per cycle type, sigma_v over all permutations, with
transitivity and stratum filtering before the canonical-form deduplication.
SL(2,Z)-orbit identification happens at screening time, where each orbit is
visited once and receives one Forni report.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
import hashlib
import json
import os
import time

from .errors import CapExceededError, ConfigError, ResumeMismatchError, UnsupportedStratumError
from .flat_core import Origami, origami_from_perms, singularity_data
from .diagrams import (
    _classification_label,
    canonical_key,
    enumerate_cylinder_diagrams,
    homologous_partition,
    pinch_all_core_curves,
    stratum_genus,
)
from .homology import core_curve_span
from .kz_monodromy import (
    canonical_with_map,
    forni_subspace,
    lyapunov_estimate,
    orbit_graph,
)

DEFAULT_N_CAP = 10


def _cycle_type_rep(partition):
    """Canonical permutation with the given cycle type (descending parts)."""
    img = []
    start = 0
    for size in partition:
        img.extend(list(range(start + 1, start + size)) + [start])
        start += size
    return tuple(img)


def _partitions_of(n):
    def rec(total, maxpart):
        if total == 0:
            yield ()
            return
        for first in range(min(total, maxpart), 0, -1):
            for rest in rec(total - first, first):
                yield (first,) + rest

    return list(rec(n, n))


def _transitive(h, v, n):
    seen = 1  # bitmask with square 0
    stack = [0]
    count = 1
    while stack:
        x = stack.pop()
        for y in (h[x], v[x]):
            bit = 1 << y
            if not seen & bit:
                seen |= bit
                count += 1
                stack.append(y)
    return count == n


def _stratum_of(h, v, n):
    """(genus, kappa) from the corner permutation, allocation-light."""
    hinv = [0] * n
    vinv = [0] * n
    for i, j in enumerate(h):
        hinv[j] = i
    for i, j in enumerate(v):
        vinv[j] = i
    c = [v[h[vinv[hinv[k]]]] for k in range(n)]
    seen = 0
    orders = []
    for start in range(n):
        if seen & (1 << start):
            continue
        size = 1
        seen |= 1 << start
        x = c[start]
        while x != start:
            size += 1
            seen |= 1 << x
            x = c[x]
        if size > 1:
            orders.append(size - 1)
    total = sum(orders)
    genus = total // 2 + 1
    return genus, tuple(sorted(orders, reverse=True))


def enumerate_origamis(n, stratum=None, n_cap=DEFAULT_N_CAP):
    """All connected n-square origamis up to simultaneous conjugation.

    Optionally filtered to one stratum (tuple of zero orders).  Returns
    canonical representatives sorted by their encoding.
    """
    if n > n_cap:
        raise CapExceededError("n=%d exceeds the cap %d" % (n, n_cap))
    target = None if stratum is None else tuple(sorted(stratum, reverse=True))
    found = {}
    for part in _partitions_of(n):
        h = _cycle_type_rep(part)
        for v in permutations(range(n)):
            if not _transitive(h, v, n):
                continue
            if target is not None and _stratum_of(h, v, n)[1] != target:
                continue
            canon, _ = canonical_with_map(Origami(n, h, tuple(v)))
            found[canon.key()] = canon
    return [found[k] for k in sorted(found)]


def count_origami_classes(n, n_cap=DEFAULT_N_CAP):
    """Number of connected n-square origami conjugation classes."""
    return len(enumerate_origamis(n, n_cap=n_cap))


# ---------------------------------------------------------------------------
# Zero-Forni census


@dataclass
class CensusRecord:
    origami: dict
    n: int
    stratum: tuple
    orbit_size: int
    forni: dict
    lyapunov: dict | None
    seconds: float
    conjugacy_classes_in_orbit: int

    def to_json(self):
        return {
            "origami": self.origami,
            "n": self.n,
            "stratum": list(self.stratum),
            "orbit_size": self.orbit_size,
            "conjugacy_classes_in_orbit": self.conjugacy_classes_in_orbit,
            "forni": self.forni,
            "lyapunov": self.lyapunov,
            "seconds": round(self.seconds, 4),
        }


@dataclass
class ForniCensus:
    records: list
    nontrivial: list
    inconclusive: list
    class_counts: dict  # n -> number of genus-3 conjugation classes
    orbit_counts: dict  # n -> number of SL(2,Z) orbits

    def to_json(self):
        return {
            "records": [r.to_json() for r in self.records],
            "nontrivial": [r.to_json() for r in self.nontrivial],
            "inconclusive": [r.to_json() for r in self.inconclusive],
            "class_counts": {str(k): v for k, v in self.class_counts.items()},
            "orbit_counts": {str(k): v for k, v in self.orbit_counts.items()},
        }


GENUS3_STRATA = ((4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1))


def genus3_classes(n, n_cap=DEFAULT_N_CAP):
    """Connected genus-3 origami classes with n squares."""
    if n > n_cap:
        raise CapExceededError("n=%d exceeds the cap %d" % (n, n_cap))
    found = {}
    for part in _partitions_of(n):
        h = _cycle_type_rep(part)
        for v in permutations(range(n)):
            if not _transitive(h, v, n):
                continue
            if _stratum_of(h, v, n)[0] != 3:
                continue
            canon, _ = canonical_with_map(Origami(n, h, tuple(v)))
            found[canon.key()] = canon
    return [found[k] for k in sorted(found)]


def zero_forni_census(n_max, n_cap=DEFAULT_N_CAP, caps=None, with_lyapunov=False,
                      lyap_steps=10 ** 5, progress=None):
    """Forni reports for every genus-3 origami orbit with at most n_max squares.

    Returns a ForniCensus with the per-orbit records, the orbits with a
    certified nontrivial Forni subspace, and the unresolved (inconclusive)
    orbits listed separately -- never silently dropped.
    """
    if n_max > n_cap:
        raise CapExceededError("n_max=%d exceeds the cap %d" % (n_max, n_cap))
    records = []
    class_counts = {}
    orbit_counts = {}
    visited = set()
    for n in range(1, n_max + 1):
        classes = genus3_classes(n, n_cap)
        class_counts[n] = len(classes)
        orbit_counts[n] = 0
        for o in classes:
            if o.key() in visited:
                continue
            t0 = time.time()
            graph = orbit_graph(o)
            for vtx in graph.vertices:
                visited.add(vtx.key())
            in_orbit = sum(1 for vtx in graph.vertices if vtx.n == n)
            report = forni_subspace(o, caps=caps, graph=graph)
            orbit_counts[n] += 1
            lyap = None
            if with_lyapunov:
                est = lyapunov_estimate(o, steps=lyap_steps, seed=0)
                lyap = est.to_json()
            rec = CensusRecord(
                origami=graph.base.to_json(),
                n=n,
                stratum=singularity_data(o)[1],
                orbit_size=graph.size,
                forni=report.to_json(),
                lyapunov=lyap,
                seconds=time.time() - t0,
                conjugacy_classes_in_orbit=in_orbit,
            )
            records.append(rec)
            if progress is not None:
                progress(rec)
    nontrivial = [r for r in records
                  if r.forni["dim_lower"] == r.forni["dim_upper"] and r.forni["dim_lower"] > 0]
    inconclusive = [r for r in records
                    if r.forni["dim_lower"] != r.forni["dim_upper"]]
    return ForniCensus(records, nontrivial, inconclusive, class_counts, orbit_counts)


# ---------------------------------------------------------------------------
# Diagram census


def diagram_census(stratum, with_reflection=True):
    """Listing and counts of cylinder diagrams for one stratum (genus <= 3).

    Returns (rows, summary): one row per diagram with its canonical form,
    configuration label, homological dimension and homologous partition;
    summary counts diagrams per (r, configuration).
    """
    stratum = tuple(sorted(stratum, reverse=True))
    g = stratum_genus(stratum)
    if g > 3:
        raise UnsupportedStratumError("diagram census is capped at genus 3")
    max_r = g + len(stratum) - 1 if stratum else 1
    rows = []
    summary = {}
    for r in range(1, max_r + 1):
        for d in enumerate_cylinder_diagrams(stratum, r, with_reflection):
            label = _classification_label(d)
            classes, dim = core_curve_span(d)
            report = homologous_partition(d)
            deg = pinch_all_core_curves(d)
            rows.append({
                "stratum": list(stratum),
                "r": r,
                "canonical": [list(map(list, cyl)) for cyl in d.cylinders],
                "configuration": label,
                "homological_dimension": dim,
                "part_genera": [p.genus for p in deg.parts],
                "blocks": [list(b) for b in report.blocks],
                "status": list(report.status),
            })
            summary[(r, label)] = summary.get((r, label), 0) + 1
    return rows, summary


def summary_csv(summary):
    lines = ["r,configuration,count"]
    for (r, label), count in sorted(summary.items()):
        lines.append("%d,%s,%d" % (r, label, count))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Pipeline and manifest


def parse_config(text):
    """Key-value config: one `key = value` per line, # comments."""
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("bad config line: %r" % line)
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def _sha256(data):
    return hashlib.sha256(data).hexdigest()


def _hash_file(path):
    with open(path, "rb") as fh:
        return _sha256(fh.read())


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def run_pipeline(config, out_dir=None, resume=True):
    """Execute the configured stages with checkpointing.

    config is a dict (already parsed).  Stages: "diagrams" (needs stratum),
    "origamis" (enumeration counts), "forni" (the zero-Forni census).
    Returns the manifest dict.  A completed run is reproducible from its
    manifest; resume verifies the config hash against the checkpoint.
    """
    stages = [s for s in config.get("stages", "").split(",") if s.strip()]
    out_dir = out_dir or config.get("out_dir", "relsurf_out")
    os.makedirs(out_dir, exist_ok=True)
    config_blob = json.dumps(config, sort_keys=True).encode()
    config_hash = _sha256(config_blob)
    ckpt_path = os.path.join(out_dir, "checkpoint.json")
    ckpt = {"config_hash": config_hash, "completed": {}}
    if resume and os.path.exists(ckpt_path):
        with open(ckpt_path) as fh:
            old = json.load(fh)
        if old.get("config_hash") != config_hash:
            raise ResumeMismatchError("checkpoint belongs to a different config")
        ckpt = old

    outputs = {}

    def done(unit):
        return unit in ckpt["completed"]

    def finish(unit, path):
        ckpt["completed"][unit] = _hash_file(path)
        outputs[unit] = {"path": os.path.basename(path),
                         "sha256": ckpt["completed"][unit]}
        _write_json(ckpt_path, ckpt)

    for stage in stages:
        stage = stage.strip()
        if stage == "diagrams":
            stratum = tuple(int(x) for x in config.get("stratum", "").split(",") if x)
            unit = "diagrams:%s" % (",".join(map(str, stratum)),)
            path = os.path.join(out_dir, "diagrams_%s.jsonl" %
                                "_".join(map(str, stratum)))
            csv_path = os.path.join(out_dir, "diagrams_%s.csv" %
                                    "_".join(map(str, stratum)))
            if not done(unit):
                rows, summary = diagram_census(
                    stratum, config.get("reflection", "1") != "0")
                with open(path, "w") as fh:
                    for row in rows:
                        fh.write(json.dumps(row, sort_keys=True) + "\n")
                with open(csv_path, "w") as fh:
                    fh.write(summary_csv(summary))
                finish(unit, path)
                finish(unit + ":csv", csv_path)
        elif stage == "origamis":
            n_max = int(config.get("n_max", "6"))
            n_cap = int(config.get("n_cap", str(DEFAULT_N_CAP)))
            for n in range(1, n_max + 1):
                unit = "origamis:%d" % n
                path = os.path.join(out_dir, "origamis_n%d.jsonl" % n)
                if done(unit):
                    continue
                classes = enumerate_origamis(n, n_cap=n_cap)
                with open(path, "w") as fh:
                    for o in classes:
                        rec = o.to_json()
                        g, kappa, _ = singularity_data(o)
                        rec["genus"] = g
                        rec["stratum"] = list(kappa)
                        fh.write(json.dumps(rec, sort_keys=True) + "\n")
                finish(unit, path)
        elif stage == "forni":
            n_max = int(config.get("n_max", "6"))
            n_cap = int(config.get("n_cap", str(DEFAULT_N_CAP)))
            unit = "forni:%d" % n_max
            path = os.path.join(out_dir, "forni_records.jsonl")
            if not done(unit):
                census = zero_forni_census(
                    n_max, n_cap=n_cap,
                    with_lyapunov=config.get("lyapunov", "0") == "1",
                    lyap_steps=int(config.get("lyap_steps", "100000")),
                )
                with open(path, "w") as fh:
                    for rec in census.records:
                        fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
                finish(unit, path)
        elif stage:
            raise ConfigError("unknown stage %r" % stage)

    manifest = {
        "config": config,
        "config_hash": config_hash,
        "seed": config.get("seed", "0"),
        "outputs": outputs,
        "version": _package_version(),
    }
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    return manifest


def _package_version():
    from . import __version__

    return __version__
