"""Tabulating empirical cancellation exponents over ranges of primes."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path

from sympy import divisors, primerange

from .config import as_fraction, frac_str, p_cap
from .errors import InvalidInput
from .expsum import max_nontrivial_fourier
from .field_core import make_field_context, subgroup

CSV_HEADER = ["p", "subgroup_order", "index", "alpha", "max_coeff", "beta_emp", "argmax_xi", "elapsed_ms"]
SUMMARY_PREFIX = "# summary"


@dataclass(frozen=True)
class ResultRow:
    p: int
    subgroup_order: int
    index: int
    alpha: float
    max_coeff: float
    beta_emp: float
    argmax_xi: int
    elapsed_ms: float

    def key(self) -> tuple[int, int]:
        return (self.p, self.index)


_INT_FIELDS = {"p", "subgroup_order", "index", "argmax_xi"}


def _coerce_row(values: dict) -> ResultRow:
    return ResultRow(**{
        f.name: int(values[f.name]) if f.name in _INT_FIELDS else float(values[f.name])
        for f in fields(ResultRow)
    })


@dataclass(frozen=True)
class ScanConfig:
    p_min: int = 3
    p_max: int = 101
    indices: tuple[int, ...] | None = None
    alpha_min: float | None = None
    eta: Fraction = Fraction(1, 4)
    output_path: str = "scan.csv"
    format: str = "csv"
    parallelism: int = 1

    def validate(self, cap: int | None = None) -> "ScanConfig":
        limit = p_cap(cap)
        if self.p_min > self.p_max:
            raise InvalidInput(f"p_min={self.p_min} exceeds p_max={self.p_max}")
        if self.p_max > limit:
            raise InvalidInput(f"p_max={self.p_max} exceeds the prime cap {limit}")
        if self.eta <= 0:
            raise InvalidInput("eta must be positive")
        if self.parallelism < 1:
            raise InvalidInput("parallelism must be >= 1")
        if self.format not in ("csv", "jsonl"):
            raise InvalidInput(f"unknown format {self.format!r}")
        if self.indices is not None and any(m < 1 for m in self.indices):
            raise InvalidInput("indices must be positive")
        return self


def parse_config_file(path) -> dict:
    """Read ``key=value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInput(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _parse_indices(value) -> tuple[int, ...] | None:
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value) or None
    value = str(value).strip()
    if value in ("", "all"):
        return None
    return tuple(int(v) for v in value.split(","))


def build_config(file_values: dict | None = None, **cli_values) -> ScanConfig:
    """Merge defaults < config file < CLI flags (``None`` CLI values are ignored)."""
    merged: dict = {}
    for source in (file_values or {}, {k: v for k, v in cli_values.items() if v is not None}):
        merged.update(source)
    if "index" in merged:
        merged["indices"] = merged.pop("index")
    if "output" in merged:
        merged["output_path"] = merged.pop("output")
    known = {f.name for f in fields(ScanConfig)}
    unknown = set(merged) - known
    if unknown:
        raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
    try:
        kwargs = {}
        for key, value in merged.items():
            if key in ("p_min", "p_max", "parallelism"):
                kwargs[key] = int(value)
            elif key == "indices":
                kwargs[key] = _parse_indices(value)
            elif key == "alpha_min":
                kwargs[key] = None if value in ("", None, "none") else float(value)
            elif key == "eta":
                kwargs[key] = as_fraction(value)
            else:
                kwargs[key] = str(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInput(f"bad config value: {exc}") from exc
    return ScanConfig(**kwargs)


def scan_prime(p: int, indices=None, alpha_min=None, cap=None) -> list[ResultRow]:
    ctx = make_field_context(p, cap)
    rows = []
    for m in divisors(p - 1):
        if indices is not None and m not in indices:
            continue
        start = time.perf_counter()
        H = subgroup(ctx, m)
        alpha = math.log(H.order) / math.log(p)
        if alpha_min is not None and alpha < alpha_min:
            continue
        bound = max_nontrivial_fourier(ctx, H)
        elapsed = (time.perf_counter() - start) * 1000
        rows.append(ResultRow(p, H.order, m, alpha, bound.max_nontrivial, bound.beta_emp, bound.argmax_xi, elapsed))
    return rows


def _scan_prime_args(args):
    return scan_prime(*args)


def run_scan(config: ScanConfig, cap: int | None = None) -> list[ResultRow]:
    config.validate(cap)
    primes = [p for p in primerange(max(3, config.p_min), config.p_max + 1)]
    jobs = [(p, config.indices, config.alpha_min, cap) for p in primes]
    if config.parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
            chunks = list(pool.map(_scan_prime_args, jobs))
    else:
        chunks = [_scan_prime_args(job) for job in jobs]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=ResultRow.key)
    return rows


def summary(rows: list[ResultRow]) -> dict:
    return {
        "rows": len(rows),
        "max_beta_emp": max((r.beta_emp for r in rows), default=None),
    }


def _render(rows: list[ResultRow], fmt: str, eta: Fraction | None = None) -> str:
    info = summary(rows)
    if eta is not None:
        info["eta"] = frac_str(eta)
    if fmt == "jsonl":
        lines = [json.dumps(asdict(r)) for r in rows]
        lines.append(json.dumps({"summary": info}))
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([repr(getattr(r, name)) for name in CSV_HEADER])
    tail = " ".join(f"{k}={'' if v is None else v}" for k, v in info.items())
    buf.write(f"{SUMMARY_PREFIX} {tail}\n")
    return buf.getvalue()


def write_rows(rows: list[ResultRow], path, fmt: str = "csv", eta: Fraction | None = None) -> Path:
    """Write atomically: a failed write leaves no partial file behind."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(_render(rows, fmt, eta))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_rows(path, fmt: str | None = None) -> list[ResultRow]:
    path = Path(path)
    fmt = fmt or ("jsonl" if path.suffix == ".jsonl" else "csv")
    text = path.read_text()
    if fmt == "jsonl":
        rows = []
        for line in text.splitlines():
            obj = json.loads(line)
            if "summary" not in obj:
                rows.append(_coerce_row(obj))
        return rows
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return [_coerce_row(rec) for rec in csv.DictReader(lines)]


def read_summary(path) -> dict:
    path = Path(path)
    last = path.read_text().splitlines()[-1]
    if last.startswith(SUMMARY_PREFIX):
        pairs = last[len(SUMMARY_PREFIX):].split()
        return dict(pair.split("=", 1) for pair in pairs)
    return json.loads(last)["summary"]


def determinism_hash(path) -> str:
    """SHA-256 of the file contents with the elapsed_ms column removed."""
    path = Path(path)
    h = hashlib.sha256()
    for line in path.read_text().splitlines():
        if line.startswith("{"):
            obj = json.loads(line)
            obj.pop("elapsed_ms", None)
            line = json.dumps(obj, sort_keys=True)
        elif not line.startswith("#"):
            line = line.rsplit(",", 1)[0]
        h.update(line.encode())
        h.update(b"\n")
    return h.hexdigest()


def cmd_scan(config: ScanConfig, cap: int | None = None) -> tuple[Path, dict]:
    rows = run_scan(config, cap)
    path = write_rows(rows, config.output_path, config.format, config.eta)
    info = summary(rows)
    info["determinism_hash"] = determinism_hash(path)
    info["output"] = str(path)
    return path, info
