"""Command-line front end.

Exit codes: 0 success / valid, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import hd, pud
from .algorithms import PRESETS, AlgorithmSpec, preset
from .checksum import CodeWord, checksum, encode_codeword, verify_codeword
from .errors import ChecksumError
from .faults import DataModel, FractionTable, TrialConfig, sweep


class UsageError(Exception):
    pass


def parse_range(text: str) -> list[int]:
    """``A``, ``A:B`` or ``A:B:step``; bounds are inclusive."""
    parts = text.split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None
    if len(nums) == 1:
        return nums
    if len(nums) not in (2, 3) or (len(nums) == 3 and nums[2] < 1):
        raise UsageError(f"bad range {text!r}")
    step = nums[2] if len(nums) == 3 else 1
    return list(range(nums[0], nums[1] + 1, step))


def _spec_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("algorithm")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--family", help="SingleSum, DualSum, Koopman or KoopmanParity")
    g.add_argument("--modulus", type=int)
    g.add_argument("--k", type=int, help="check value bits")
    g.add_argument("--block", type=int, help="block size in bytes")
    g.add_argument("--seed", type=int)


def resolve_spec(args) -> AlgorithmSpec:
    if args.preset:
        base = preset(args.preset)
        changes = {
            name: value
            for name, value in (
                ("family", args.family),
                ("modulus", args.modulus),
                ("check_bits", args.k),
                ("block_bytes", args.block),
                ("seed", args.seed),
            )
            if value is not None
        }
        return base.replace(**changes) if changes else base
    if args.family is None or args.modulus is None or args.k is None:
        raise UsageError("give --preset or all of --family, --modulus and --k")
    return AlgorithmSpec(args.family, args.modulus, args.k, args.block or 1, args.seed or 0)


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _emit_text(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def cmd_sum(args) -> int:
    spec = resolve_spec(args)
    data = _read_input(args.input)
    if not data:
        raise UsageError("input is empty")
    print(f"{checksum(data, spec):0{2 * spec.check_bytes}x}")
    return 0


def cmd_encode(args) -> int:
    spec = resolve_spec(args)
    data = _read_input(args.input)
    if not data:
        raise UsageError("input is empty")
    raw = encode_codeword(data, spec).to_bytes()
    if args.out:
        Path(args.out).write_bytes(raw)
    else:
        sys.stdout.buffer.write(raw)
    return 0


def cmd_verify(args) -> int:
    spec = resolve_spec(args)
    cw = CodeWord.from_bytes(_read_input(args.input), spec)
    ok = verify_codeword(cw, spec)
    print("ok" if ok else "corrupt")
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    spec = resolve_spec(args)
    cfg = TrialConfig(args.trials, args.rng_seed, DataModel(args.data_model))
    table = sweep(
        spec,
        parse_range(args.lengths),
        parse_range(args.m),
        cfg,
        budget=args.budget,
        exhaustive=True if args.exhaustive else None,
        workers=args.workers,
    )
    _emit_text(table.to_csv(), args.out)
    return 0


def cmd_screen(args) -> int:
    rng = parse_range(args.range) if args.range else None
    bounds = (rng[0], rng[-1]) if rng else None
    result = hd.screen_moduli(args.k, bounds, args.hd)
    _emit_text(result.to_csv(), args.out)
    return 0


def cmd_rollover(args) -> int:
    report = hd.rollover_report(resolve_spec(args), args.max_bytes)
    _emit_text(report.to_csv(), args.out)
    return 0


def cmd_pud(args) -> int:
    ber = args.ber
    chunks = []
    if args.table:
        spec_k = args.k
        if spec_k is None and args.preset:
            spec_k = preset(args.preset).check_bits
        with open(args.table, newline="", encoding="utf-8") as fh:
            tables = FractionTable.from_csv(fh)
        for table in tables:
            k = spec_k
            if k is None and table.algorithm in PRESETS:
                k = PRESETS[table.algorithm].check_bits
            if k is None:
                raise UsageError(f"cannot infer k for {table.algorithm!r}; pass --k")
            lengths = parse_range(args.lengths) if args.lengths else table.lengths()
            curve = pud.curve_sweep(table.algorithm, table, lengths, ber, k, args.m_max)
            chunks.append(curve.to_csv(header=not chunks))
    for level in args.ideal_hd or []:
        if args.k is None or not args.lengths:
            raise UsageError("--ideal-hd needs --k and --lengths")
        curve = pud.ideal_curve(level, args.k, parse_range(args.lengths), ber)
        chunks.append(curve.to_csv(header=not chunks))
    if not chunks:
        raise UsageError("pud needs --table and/or --ideal-hd")
    _emit_text("".join(chunks), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modsum", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, help_ in (
        ("sum", cmd_sum, "print the hex check value of a file"),
        ("encode", cmd_encode, "append the check value to a file"),
        ("verify", cmd_verify, "check a code word file"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("input", nargs="?", default="-", help="file path or - for stdin")
        _spec_args(p)
        if name == "encode":
            p.add_argument("--out")
        p.set_defaults(func=fn)

    p = sub.add_parser("sweep", help="measure undetected-fault fractions")
    _spec_args(p)
    p.add_argument("--lengths", required=True)
    p.add_argument("--m", default="1:3")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--data-model", choices=[d.value for d in DataModel], default="RandomBytes")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("screen", help="rank moduli by HD-holding length")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--range")
    p.add_argument("--hd", type=int, choices=(3, 4), default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("rollover", help="report the HD-holding length of one algorithm")
    _spec_args(p)
    p.add_argument("--max-bytes", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rollover)

    p = sub.add_parser("pud", help="P_ud curves from a sweep table and/or ideal HD curves")
    p.add_argument("--table")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--k", type=int)
    p.add_argument("--ber", type=float, default=pud.DEFAULT_BER)
    p.add_argument("--m-max", type=int, default=pud.DEFAULT_M_MAX)
    p.add_argument("--lengths")
    p.add_argument("--ideal-hd", type=int, action="append")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pud)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ChecksumError, OSError, ValueError) as exc:
        print(f"modsum {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
