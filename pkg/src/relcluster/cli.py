"""Command-line entry point: ``relcluster run|repro|fmt``."""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .repro import DEFAULT_SEED, run_repro
from .runner import SCHEMA, run_document
from .specfile import SpecError, parse_field, parse_spec

EXIT_OK, EXIT_IO, EXIT_QUERY = 0, 1, 2


def _color(text: str, code: str, stream) -> str:
    if os.environ.get("NO_COLOR") is not None or not getattr(stream, "isatty", lambda: False)():
        return text
    return f"\033[{code}m{text}\033[0m"


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _text_value(value, indent: int) -> list:
    pad = " " * indent
    if isinstance(value, dict):
        lines = []
        for k in sorted(value):
            v = value[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines += _text_value(v, indent + 2)
            else:
                lines.append(f"{pad}{k}: {json.dumps(v, ensure_ascii=False) if not isinstance(v, str) else v}")
        return lines
    if isinstance(value, list):
        lines = []
        for v in value:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines += _text_value(v, indent + 2)
            else:
                lines.append(f"{pad}- {v}")
        return lines
    return [f"{pad}{value}"]


def report_text(report: dict, stream) -> str:
    lines = [f"relcluster {report['version']}  field {report['field']['name']}  seed {report['seed']}",
             f"input sha256 {report['input_sha256']}"]
    if report["field"]["characteristic"]:
        lines.append(report["field"]["note"])
    for fam, flags in sorted(report["assumptions"].items()):
        lines.append(f"family {fam} assumed: " + ", ".join(f"{k}={v}" for k, v in sorted(flags.items())))
    for r in report["results"]:
        tag = _color("ok", "32", stream) if r["status"] == "ok" else _color("error", "31", stream)
        lines.append(f"[{tag}] {r['query']}")
        if r["status"] == "ok":
            lines += _text_value(r["result"], 4)
        else:
            lines.append(f"    {r['error']}")
    return "\n".join(lines) + "\n"


def _write(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    try:
        fld = parse_field(args.field) if args.field else None
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        with open(args.spec, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {args.spec}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        doc = parse_spec(text, fld)
    except SpecError as exc:
        print(f"{args.spec}:{exc.line}:{exc.column}: {exc.message}", file=sys.stderr)
        return EXIT_IO
    report, failed = run_document(doc, text, seed=args.seed, max_degree=args.max_degree,
                                  max_pairs=args.max_pairs, timings=args.timings)
    stream = sys.stdout if not args.out else None
    body = report_text(report, stream) if args.text else dump_json(report)
    try:
        _write(body, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_QUERY if failed else EXIT_OK


def cmd_repro(args) -> int:
    checks = run_repro(args.example, args.seed)
    failed = sum(not c.passed for c in checks)
    if args.json:
        body = dump_json({"schema": SCHEMA, "tool": "relcluster", "version": __version__,
                          "example": args.example, "seed": args.seed,
                          "checks": [c.as_dict(args.timings) for c in checks],
                          "status": "FAIL" if failed else "PASS"})
    else:
        lines = []
        for c in checks:
            tag = _color("PASS", "32", sys.stdout) if c.passed else _color("FAIL", "31", sys.stdout)
            t = f" ({c.seconds:.2f}s)" if args.timings else ""
            lines.append(f"{tag} {args.example}: {c.name}{t}\n     {c.detail}")
        lines.append(f"{args.example}: {len(checks) - failed}/{len(checks)} checks passed")
        body = "\n".join(lines) + "\n"
    sys.stdout.write(body)
    return 1 if failed else 0


def cmd_fmt(args) -> int:
    try:
        with open(args.spec, encoding="utf-8") as fh:
            doc = parse_spec(fh.read())
    except OSError as exc:
        print(f"error: cannot read {args.spec}: {exc}", file=sys.stderr)
        return EXIT_IO
    except SpecError as exc:
        print(f"{args.spec}:{exc.line}:{exc.column}: {exc.message}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(doc.serialize())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relcluster", description="Exact blow-ups, sections and clusters of sections.")
    p.add_argument("--version", action="version", version=f"relcluster {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the queries of a spec file")
    r.add_argument("spec")
    r.add_argument("--out", help="write the report here instead of stdout")
    r.add_argument("--seed", type=int, default=0, help="seed for sampled parameter points (default 0)")
    r.add_argument("--field", help="Q or Fp:<prime>; overrides the spec file's field statement")
    r.add_argument("--max-degree", type=int, help="abort Groebner computations above this S-pair degree")
    r.add_argument("--max-pairs", type=int, help="abort Groebner computations after this many S-pairs")
    fmt = r.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON report (default)")
    fmt.add_argument("--text", action="store_true", help="human-readable report")
    r.add_argument("--timings", action="store_true", help="include per-query wall times (breaks byte-identity)")
    r.set_defaults(func=cmd_run)

    q = sub.add_parser("repro", help="run the built-in checks for one worked example")
    q.add_argument("example", choices=["ex1", "ex2", "ex3"])
    q.add_argument("--json", action="store_true")
    q.add_argument("--seed", type=int, default=DEFAULT_SEED)
    q.add_argument("--timings", action="store_true")
    q.set_defaults(func=cmd_repro)

    f = sub.add_parser("fmt", help="print a spec file in canonical form")
    f.add_argument("spec")
    f.set_defaults(func=cmd_fmt)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
