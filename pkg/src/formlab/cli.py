"""Command-line surface: experiments in, reproducible reports out.

Exit codes: 0 success; 2 argument/validation problems; 3 when an exact
check contradicts a statement that should never fail (these are findings,
not crashes). Reports carry no timestamps, so regenerating from a warm
cache is byte-identical to a cold run.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from pathlib import Path

from . import bfree as bfree_mod
from . import gaps as gaps_mod
from . import nonvanish as nv_mod
from . import rankin as rankin_mod
from . import signs as signs_mod
from .errors import TheoremViolation
from .forms import BUILTIN_LABELS, FormRegistry
from .powersum import (
    PowerSumParams,
    find_normform,
    find_representation,
    find_representation_coprime,
    oracle_min_representation,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_FINDING = 3


def _json_int(v):
    """JSON numbers are only exact to 53 bits; bigger ones go out as strings."""
    if isinstance(v, int) and not isinstance(v, bool) and abs(v) >= 2**53:
        return str(v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return _json_int(obj)


def _emit(args, payload=None, rows=None, header=None) -> None:
    """Write the report as JSON (default) or CSV to --output / stdout."""
    if args.format == "csv" and rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _registry(args) -> FormRegistry:
    reg = FormRegistry(cache_dir=args.cache_dir)
    for path in args.newforms or ():
        reg.ingest(path)
    return reg


def _labels(spec: str) -> list[str]:
    return [s.strip() for s in spec.split(",") if s.strip()]


def _parse_eta(spec: str) -> list[tuple[int, int]]:
    factors = []
    for part in _labels(spec):
        d, _, r = part.partition(":")
        factors.append((int(d), int(r)))
    return factors


# --- subcommand handlers ----------------------------------------------------


def cmd_expand(args) -> None:
    from .qexp import EtaQuotient, eisenstein, eta_quotient_expand

    P = args.precision or 16
    if args.eta:
        series = eta_quotient_expand(EtaQuotient(tuple(_parse_eta(args.eta))), P)
        what = f"eta:{args.eta}"
    elif args.eisenstein:
        series = eisenstein(args.eisenstein, P)
        what = f"E{args.eisenstein}"
    else:
        form = _registry(args).get(args.form, P)
        series = None
        coeffs = form.coefficients(P)
        what = args.form
    coeffs = list(series.coeffs) if series is not None else coeffs
    _emit(
        args,
        payload={"series": what, "precision": P, "coefficients": coeffs},
        rows=list(enumerate(coeffs)),
        header=["n", "coefficient"],
    )


def cmd_forms(args) -> None:
    reg = _registry(args)
    if args.ingest:
        forms = reg.ingest(args.ingest)
        payload = [
            {"label": f.label, "level": f.level, "weight": f.weight, "cm": f.is_cm}
            for f in forms
        ]
        _emit(args, payload={"ingested": payload})
        return
    if args.warm:
        if not args.precision:
            raise ValueError("--warm needs --precision")
        paths = reg.warm(_labels(args.warm), args.precision)
        _emit(args, payload={"cache_files": [str(p) for p in paths]})
        return
    rows = []
    for label in reg.labels():
        f = reg.get(label)
        rows.append([f.label, f.level, f.weight, f.is_cm])
    _emit(
        args,
        payload={
            "forms": [
                {"label": a, "level": b, "weight": c, "cm": d} for a, b, c, d in rows
            ]
        },
        rows=rows,
        header=["label", "level", "weight", "cm"],
    )


def cmd_powersum(args) -> None:
    if args.normform:
        w = find_normform(args.n, args.normform)
        payload = {
            "n": w.n, "m": w.m, "a": w.a, "b": w.b, "D": w.D,
            "gap": w.gap, "constant": w.constant,
            "constant_note": "implementation-derived window constant",
        }
        _emit(args, payload=payload)
        return
    params = PowerSumParams(args.r, args.s)
    if args.badset:
        bad = tuple(int(p) for p in _labels(args.badset))
        w = find_representation_coprime(args.n, params, bad)
        payload = {
            "n": w.n, "m": w.m, "A": w.A, "B": w.B, "gap": w.gap,
            "r": params.r, "s": params.s, "K": w.K, "badset": list(w.badset),
        }
    else:
        w = find_representation(args.n, params)
        payload = {
            "n": w.n, "m": w.m, "A": w.A, "B": w.B, "gap": w.gap,
            "r": params.r, "s": params.s, "C": params.C,
            "alpha": f"{params.alpha.numerator}/{params.alpha.denominator}",
            "bound_hit": w.bound_hit,
        }
    if args.oracle:
        payload["oracle_min"] = oracle_min_representation(
            args.n, args.r, args.s, w.m + 1
        )
    _emit(args, payload=payload)


def _resolve_bset(args, reg: FormRegistry):
    if args.set == "prime-squares":
        return bfree_mod.prime_squares()
    if args.set:
        gens = [int(g) for g in _labels(args.set)]
        return bfree_mod.from_generators(gens)
    if args.pair:
        lf, lg = _labels(args.pair)
        pair = reg.pair(lf, lg, args.x + args.y)
        return bfree_mod.build_from_pair(pair, args.x + args.y)
    raise ValueError("bfree needs --set or --pair")


def cmd_bfree(args) -> None:
    reg = _registry(args)
    bset = _resolve_bset(args, reg)
    if args.progression:
        a, q = (int(v) for v in _labels(args.progression))
        res = bfree_mod.sieve_progression(bset, args.x, args.y, a, q)
        payload = res.summary()
        payload["set"] = bset.descriptor
        _emit(args, payload=payload)
        return
    res = bfree_mod.sieve_interval(bset, args.x, args.y)
    payload = res.summary()
    payload["set"] = bset.descriptor
    payload["reciprocal_partial_sum"] = bset.reciprocal_partial_sum(args.x + args.y)
    payload.update(bset.meta)
    if args.bitmap_out:
        bfree_mod.write_rle_bitmap(args.bitmap_out, res)
        payload["bitmap_file"] = str(args.bitmap_out)
    _emit(args, payload=payload)


def cmd_gaps(args) -> None:
    reg = _registry(args)
    if args.pair:
        lf, lg = _labels(args.pair)
        target = reg.pair(lf, lg, args.to)
    else:
        target = reg.get(args.form, args.to)
    if args.serre:
        rep = gaps_mod.serre_zero_count(target, args.to)
        _emit(args, payload=rep.__dict__)
        return
    records = gaps_mod.scan_gaps(target, args.start, args.to)
    if args.nonzero_only:
        records = [r for r in records if r.gap]
    if args.max_records and len(records) > args.max_records:
        rng = random.Random(args.seed)
        records = sorted(
            rng.sample(records, args.max_records), key=lambda r: r.n
        )
    rows = gaps_mod.gap_rows(records, target)
    payload = {
        "context": records[0].context if records else "",
        "records": [
            {"n": r.n, "gap": r.gap, "witness": r.witness} for r in records
        ],
    }
    if args.fit:
        fit = gaps_mod.exponent_fit(records)
        payload["fit"] = fit.__dict__
    _emit(args, payload=payload, rows=rows,
          header=["n", "gap", "witness", "c_witness_f", "c_witness_g"])


def cmd_signs(args) -> None:
    reg = _registry(args)
    lf, lg = _labels(args.pair)
    pair = reg.pair(lf, lg)
    if args.partial_sums:
        fit = signs_mod.partial_sums(pair, args.partial_sums, args.samples)
        payload = fit.to_dict()
        if args.delta is not None:
            payload["criterion"] = signs_mod.criterion_check(fit, args.delta).to_dict()
        _emit(args, payload=payload)
        return
    if args.sweep is not None:
        if args.delta is None:
            raise ValueError("--sweep needs --delta")
        grid = [int(v) for v in _labels(args.sweep)]
        sweep = signs_mod.window_sweep(pair, args.delta, grid)
        rows = [r.to_row() for r in sweep.reports]
        payload = {
            "delta": sweep.delta,
            "regime": sweep.regime,
            "fraction_with_change": sweep.fraction_with_change,
            "windows": [
                {
                    "x": r.x, "H": r.H, "count": r.count,
                    "first_change": r.first_change,
                    "positives": r.positives, "negatives": r.negatives,
                }
                for r in sweep.reports
            ],
            "cumulative": [
                {"x": x, "sign_changes": c, "reference_x_pow": ref}
                for x, c, ref in sweep.cumulative
            ],
        }
        _emit(args, payload=payload, rows=rows,
              header=["x", "H", "count", "first_change", "positives",
                      "negatives", "regime"])
        return
    x, H = (int(v) for v in _labels(args.scan))
    rep = signs_mod.scan_sign_changes(pair, x, H)
    _emit(
        args,
        payload={
            "x": rep.x, "H": rep.H, "count": rep.count,
            "first_change": rep.first_change, "positives": rep.positives,
            "negatives": rep.negatives, "regime": rep.regime,
        },
        rows=[rep.to_row()],
        header=["x", "H", "count", "first_change", "positives", "negatives",
                "regime"],
    )


def cmd_rankin(args) -> None:
    reg = _registry(args)
    lf, lg = _labels(args.pair)
    pair = reg.pair(lf, lg, args.length)
    coeffs, Q = rankin_mod.convolved_pair_coeffs(pair, args.M, args.length)
    report = rankin_mod.positivity_scan(coeffs, Q=Q)
    payload = report.to_dict()
    payload["pair"] = pair.label
    payload["M"] = args.M
    if report.first_negative is not None:
        payload["first_negative_value"] = coeffs[report.first_negative]
    _emit(args, payload=payload)


def cmd_nonvanish(args) -> None:
    reg = _registry(args)
    if args.hatada:
        form = reg.get(args.form, args.hatada)
        rep = nv_mod.check_hatada(form, args.hatada, args.power_bound or args.hatada)
        payload = {
            "form": form.label,
            "prime_bound": rep.prime_bound,
            "power_bound": rep.power_bound,
            "checked": rep.checked,
            "violations": [v.__dict__ for v in rep.violations],
            "ok": rep.ok,
        }
        _emit(args, payload=payload)
        return
    if args.simultaneous:
        labels = _labels(args.simultaneous)
        forms = [reg.get(lb) for lb in labels]
        m, coeffs = nv_mod.simultaneous_witness(forms, args.n)
        payload = {
            "n": args.n, "m": m, "gap": m - args.n,
            "forms": labels, "coefficients": coeffs,
        }
        _emit(args, payload=payload)
        return
    form = reg.get(args.form)
    w = nv_mod.nonvanishing_witness(form, args.n, K=args.K)
    _emit(args, payload=w.to_dict())


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="formlab",
        description="exact coefficient experiments on modular forms",
    )
    p.add_argument("--cache-dir", help="coefficient cache directory "
                   "(default: FORMLAB_CACHE_DIR or ~/.cache/formlab)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--precision", type=int, help="coefficient precision where relevant")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for report subsampling only; exact results never depend on it")
    p.add_argument("--newforms", action="append", help="newform JSON-lines file to ingest")
    p.add_argument("--output", help="write the report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("expand", help="q-expansions: eta quotients, Eisenstein, registered forms")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--eta", help="eta quotient as d:r,d:r,...")
    g.add_argument("--eisenstein", type=int, metavar="K")
    g.add_argument("--form", help="registered label, e.g. delta")
    q.set_defaults(func=cmd_expand)

    q = sub.add_parser("forms", help="list, ingest, or cache-warm registered forms")
    q.add_argument("--ingest", help="validate and report a newform file")
    q.add_argument("--warm", help="labels to warm (needs --precision)")
    q.set_defaults(func=cmd_forms)

    q = sub.add_parser("powersum", help="A^r + B^s (or a^2 + D b^2) in a short window")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--r", type=int, default=2)
    q.add_argument("--s", type=int, default=2)
    q.add_argument("--oracle", action="store_true",
                   help="also run the exhaustive minimal-representation oracle")
    q.add_argument("--badset", help="comma-separated primes the witness must avoid")
    q.add_argument("--normform", type=int, metavar="D",
                   help="search a^2 + D b^2 instead")
    q.set_defaults(func=cmd_powersum)

    q = sub.add_parser("bfree", help="B-free counts in short intervals / progressions")
    q.add_argument("--set", help='"prime-squares" or explicit generators "4,9,25"')
    q.add_argument("--pair", help="build B from a form pair: F,G")
    q.add_argument("--x", type=int, required=True)
    q.add_argument("--y", type=int, required=True)
    q.add_argument("--progression", metavar="A,Q", help="count only n = A (mod Q)")
    q.add_argument("--bitmap-out", help="write the RLE bitmap here")
    q.set_defaults(func=cmd_bfree)

    q = sub.add_parser("gaps", help="gap scans and zero-prime counts")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--form")
    g.add_argument("--pair", metavar="F,G")
    q.add_argument("--start", type=int, default=1)
    q.add_argument("--to", type=int, required=True)
    q.add_argument("--fit", action="store_true", help="attach the exponent fit")
    q.add_argument("--nonzero-only", action="store_true")
    q.add_argument("--max-records", type=int,
                   help="subsample the report to this many rows (seeded)")
    q.add_argument("--serre", action="store_true",
                   help="count zero prime coefficients instead of scanning gaps")
    q.set_defaults(func=cmd_gaps)

    q = sub.add_parser("signs", help="sign-change windows and partial-sum fits")
    q.add_argument("--pair", required=True, metavar="F,G")
    q.add_argument("--scan", metavar="X,H", help="single window (x, x+H]")
    q.add_argument("--sweep", metavar="X1,X2,...", help="window sweep grid")
    q.add_argument("--delta", type=float, help="window exponent for --sweep / criterion")
    q.add_argument("--partial-sums", type=int, metavar="XMAX")
    q.add_argument("--samples", type=int, default=64)
    q.set_defaults(func=cmd_signs)

    q = sub.add_parser("rankin", help="convolved coefficient positivity scan")
    q.add_argument("--pair", required=True, metavar="F,G")
    q.add_argument("--M", type=int, default=1, help="restrict to indices coprime to M")
    q.add_argument("--length", type=int, default=1000)
    q.set_defaults(func=cmd_rankin)

    q = sub.add_parser("nonvanish", help="congruence checks and nonvanishing witnesses")
    q.add_argument("--form", default="delta")
    q.add_argument("--n", type=int)
    q.add_argument("--K", type=int, default=nv_mod.DEFAULT_WITNESS_MULTIPLIER)
    q.add_argument("--hatada", type=int, metavar="X",
                   help="check congruences for primes <= X instead")
    q.add_argument("--power-bound", type=int,
                   help="separate bound for the prime-power branch")
    q.add_argument("--simultaneous", metavar="F1,F2,...",
                   help="witness shared by all listed forms")
    q.set_defaults(func=cmd_nonvanish)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except TheoremViolation as exc:
        print(f"THEOREM-VIOLATION FINDING: {exc}", file=sys.stderr)
        if exc.witness:
            print(json.dumps(_jsonable(exc.witness), sort_keys=True), file=sys.stderr)
        return EXIT_FINDING
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
