"""CSV persistence for banking systems, plus run manifests and grid parsing.

Balance CSV columns: bank_id,total_assets,total_liabilities,liquid_assets.
Exposure CSV columns: from_id,to_id,amount, meaning "from borrowed amount
from to". Amounts are euros with up to two decimals; they are parsed to
integer cents and written back as canonical two-decimal euros, so a
save/load/save round trip is byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from pathlib import Path

from .balance import BalanceSheet, BankingSystem, ExposureMatrix, ValidationError

TOOL_VERSION = "0.1.0"


class ParseError(ValueError):
    """Malformed input row; message carries the file and line number."""


def parse_cents(text: str, *, where: str = "") -> int:
    """Euro amount with up to two decimals -> integer cents, exactly."""
    raw = text.strip()
    negative = raw.startswith("-")
    body = raw[1:] if negative else raw
    whole, dot, frac = body.partition(".")
    if not whole.isdigit() and not (whole == "" and frac.isdigit()):
        raise ParseError(f"{where}: not a currency amount: {text!r}")
    if dot and (not frac.isdigit() or len(frac) > 2):
        raise ParseError(f"{where}: at most two decimal places supported: {text!r}")
    cents = int(whole or "0") * 100 + (int(frac.ljust(2, "0")) if dot else 0)
    return -cents if negative else cents


def format_cents(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    cents = abs(cents)
    return f"{sign}{cents // 100}.{cents % 100:02d}"


def load_system(balance_csv: str | Path, exposures_csv: str | Path) -> BankingSystem:
    """Read and validate a system; raises ParseError or ValidationError."""
    balance_csv = Path(balance_csv)
    exposures_csv = Path(exposures_csv)

    sheets = []
    with open(balance_csv, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["bank_id", "total_assets", "total_liabilities", "liquid_assets"]:
            raise ParseError(f"{balance_csv}:1: unexpected balance header {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"{balance_csv}:{lineno}: expected 4 columns, got {len(row)}")
            where = f"{balance_csv}:{lineno}"
            try:
                sheets.append(BalanceSheet(
                    bank_id=row[0],
                    total_assets=parse_cents(row[1], where=where),
                    total_liabilities=parse_cents(row[2], where=where),
                    liquid_assets=parse_cents(row[3], where=where),
                ))
            except ValidationError as exc:
                raise ValidationError(f"{where}: {exc}") from exc

    index = {}
    for sheet in sheets:
        if sheet.bank_id in index:
            raise ValidationError(f"{balance_csv}: duplicate bank id {sheet.bank_id!r}")
        index[sheet.bank_id] = len(index)

    entries: dict[tuple[int, int], int] = {}
    first_line: dict[tuple[int, int], int] = {}
    with open(exposures_csv, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["from_id", "to_id", "amount"]:
            raise ParseError(f"{exposures_csv}:1: unexpected exposure header {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"{exposures_csv}:{lineno}: expected 3 columns, got {len(row)}")
            where = f"{exposures_csv}:{lineno}"
            for bank_id in row[:2]:
                if bank_id not in index:
                    raise ValidationError(f"{where}: unknown bank id {bank_id!r}")
            pair = (index[row[0]], index[row[1]])
            if pair in entries:
                raise ValidationError(
                    f"{where}: duplicate exposure {row[0]!r}->{row[1]!r} "
                    f"(first seen at line {first_line[pair]})"
                )
            entries[pair] = parse_cents(row[2], where=where)
            first_line[pair] = lineno

    try:
        return BankingSystem(
            balance_sheets=tuple(sheets),
            exposures=ExposureMatrix(n=len(sheets), entries=entries),
        )
    except ValidationError as exc:
        raise ValidationError(f"{balance_csv}/{exposures_csv}: {exc}") from exc


def save_system(system: BankingSystem, balance_csv: str | Path, exposures_csv: str | Path) -> None:
    """Canonical form: banks sorted by id, exposures sorted by (from, to)."""
    order = sorted(range(system.n), key=lambda i: system.balance_sheets[i].bank_id)
    with open(balance_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bank_id", "total_assets", "total_liabilities", "liquid_assets"])
        for i in order:
            sheet = system.balance_sheets[i]
            writer.writerow([
                sheet.bank_id,
                format_cents(sheet.total_assets),
                format_cents(sheet.total_liabilities),
                format_cents(sheet.liquid_assets),
            ])
    ids = [s.bank_id for s in system.balance_sheets]
    rows = sorted(
        (ids[i], ids[j], amount) for (i, j), amount in system.exposures.entries.items()
    )
    with open(exposures_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["from_id", "to_id", "amount"])
        for from_id, to_id, amount in rows:
            writer.writerow([from_id, to_id, format_cents(amount)])


def sha256_of(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(out_dir: str | Path, *, command: str, config: dict, rng_seed: int,
                   inputs: list[str | Path]) -> Path:
    """Reproducibility record emitted next to every result set."""
    manifest = {
        "command": command,
        "config": config,
        "rng_seed": rng_seed,
        "input_digests": {str(p): sha256_of(p) for p in inputs},
        "tool_version": TOOL_VERSION,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    path = Path(out_dir) / "run_manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def parse_grid(spec: str) -> tuple[float, ...]:
    """start:stop:step, endpoints inclusive within 1e-12."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be start:stop:step, got {spec!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"grid must be numeric, got {spec!r}") from exc
    if step <= 0 or stop < start:
        raise ValueError(f"grid must have step > 0 and stop >= start, got {spec!r}")
    values = []
    k = 0
    while True:
        value = start + k * step
        if value > stop + 1e-12:
            break
        values.append(min(value, stop))
        k += 1
    return tuple(values)
