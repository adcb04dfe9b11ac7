"""Command-line front end: check, derive, eval, and test.

Exit codes: 0 success, 1 domain failure (diagnostics or a counterexample),
2 usage or I/O trouble.  All payload output is deterministic for fixed
inputs and flags.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

from .analysis import (
    GroupContext,
    analyze,
    classify,
    context_to_index,
    group_context,
    well_formed,
)
from .derivation import derive_group, nat_index_eligible
from .diagnostics import NestfoldError, ParseError
from .emitter import emit_agda, module_for_group
from .parser import (
    CtxApp,
    parse_program,
    parse_type_context,
    parse_value_literal,
    render_value,
)
from .properties import run_suite
from .runtime import RNat, RTree, catalogue, eval_nfold, typecheck_value


@dataclass(frozen=True)
class RunConfig:
    command: str
    decls: Path
    value: Path | None = None
    out: Path = Path(".")
    max_size: int = 6
    nat_index: bool = False
    algebra: str = "sum"
    backend: str = "agda"
    target: str | None = None


def _load_program(path: Path):
    text = path.read_text()
    return parse_program(text, source=str(path))


def _report(diags) -> bool:
    for d in diags:
        print(d.render(), file=sys.stderr)
    return bool(diags)


def _describe_group(ctx: GroupContext) -> str:
    names = ", ".join(ctx.group.decls)
    bits = [ctx.group.classification]
    if len(ctx.group.decls) > 1:
        bits.append("mutual")
    if ctx.group.nested:
        if nat_index_eligible(ctx):
            bits.append("index ≅ Nat")
        else:
            bits.append(f"index universe {ctx.spec.name}")
    return f"{names}: {', '.join(bits)}"


def cmd_check(cfg: RunConfig) -> int:
    program = _load_program(cfg.decls)
    if _report(well_formed(program)):
        return 1
    for group in classify(program):
        print(_describe_group(group_context(program, group)))
    return 0


def cmd_derive(cfg: RunConfig) -> int:
    program = _load_program(cfg.decls)
    if _report(well_formed(program)):
        return 1
    cfg.out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for ctx in analyze(program):
        group = derive_group(ctx, nat_index=cfg.nat_index)
        path = cfg.out / f"{group.name}.agda"
        path.write_text(emit_agda(module_for_group(group)))
        written.append(path)
        source = set(ctx.decls)
        derived = [d.name for d in group.defs if d.name not in source]
        print(f"{group.name}: derived {', '.join(derived)}")
        for note in group.notes:
            print(f"{group.name}: {note}")
        print(f"wrote {path}")
    return _agda_hook(written)


def _agda_hook(paths: list[Path]) -> int:
    """Optionally type-check the emitted files with an external Agda."""
    agda = os.environ.get("NESTFOLD_AGDA")
    if not agda:
        print("note: external agda check skipped (NESTFOLD_AGDA is not set)")
        return 0
    for path in paths:
        proc = subprocess.run([agda, str(path)], capture_output=True, text=True)
        if proc.returncode != 0:
            sys.stderr.write(proc.stdout + proc.stderr)
            print(f"error: agda rejected {path}", file=sys.stderr)
            return 1
        print(f"agda accepted {path}")
    return 0


def _default_target(program) -> str:
    decl = program.decls[0]
    return " ".join([decl.name] + ["Nat"] * len(decl.params))


def cmd_eval(cfg: RunConfig) -> int:
    program = _load_program(cfg.decls)
    if _report(well_formed(program)):
        return 1
    target = cfg.target or _default_target(program)
    tctx = parse_type_context(target, program)
    if not isinstance(tctx, CtxApp):
        print(f"error: target {target!r} must name a declaration", file=sys.stderr)
        return 2
    ctx = next(c for c in analyze(program) if tctx.head in c.group.decls)
    idx, universes = context_to_index(tctx, ctx)
    v = parse_value_literal(cfg.value.read_text(), program, target)
    if _report(typecheck_value(ctx, idx, universes, v)):
        return 1
    algs = catalogue(ctx)
    if cfg.algebra not in algs:
        options = ", ".join(algs)
        print(
            f"error: unknown algebra {cfg.algebra!r} (available: {options})",
            file=sys.stderr,
        )
        return 2
    result = eval_nfold(ctx, algs[cfg.algebra], idx, v)
    match result:
        case RNat(n):
            print(n)
        case RTree(value):
            print(render_value(value))
    return 0


def cmd_test(cfg: RunConfig) -> int:
    if cfg.max_size < 1:
        print("error: --max-size must be at least 1", file=sys.stderr)
        return 2
    program = _load_program(cfg.decls)
    if _report(well_formed(program)):
        return 1
    failed = False
    for ctx in analyze(program):
        report = run_suite(ctx, cfg.max_size)
        print(f"{ctx.name}: property suite at max size {cfg.max_size}")
        for r in report.results:
            status = "ok" if r.ok else "FAIL"
            print(
                f"  {r.name}: {status}, {r.cases} cases "
                f"({r.distinct} distinct value/algebra pairs)"
            )
        for r in report.results:
            if not r.ok:
                failed = True
                for line in r.counterexample.lines():
                    print(line, file=sys.stderr)
                break
    return 1 if failed else 0


_COMMANDS = {
    "check": cmd_check,
    "derive": cmd_derive,
    "eval": cmd_eval,
    "test": cmd_test,
}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nestfold",
        description=(
            "Derive folds, induction principles, and maps for data-type "
            "declarations, including nested ones."
        ),
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="parse and classify the declarations")
    c.add_argument("decls", type=Path, help="declaration file (.ndt)")

    d = sub.add_parser("derive", help="write <Group>.agda for every group")
    d.add_argument("decls", type=Path, help="declaration file (.ndt)")
    d.add_argument("--out", "-o", type=Path, default=Path("."), help="output directory")
    d.add_argument(
        "--nat-index",
        action="store_true",
        help="present the index universe as Nat (single self-nesting declaration)",
    )
    d.add_argument("--backend", choices=["agda"], default="agda")

    e = sub.add_parser("eval", help="run a catalogue algebra over a value literal")
    e.add_argument("decls", type=Path, help="declaration file (.ndt)")
    e.add_argument("value", type=Path, help="value-literal file (.ndv)")
    e.add_argument("--algebra", default="sum", help="catalogue algebra name")
    e.add_argument(
        "--type",
        dest="target",
        default=None,
        help='target type context, e.g. "Bush Nat" (default: first declaration over Nat)',
    )

    t = sub.add_parser("test", help="run the exhaustive property suite")
    t.add_argument("decls", type=Path, help="declaration file (.ndt)")
    t.add_argument("--max-size", type=int, default=6, help="value size bound (>= 1)")
    return p


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        decls=args.decls,
        value=getattr(args, "value", None),
        out=getattr(args, "out", Path(".")),
        max_size=getattr(args, "max_size", 6),
        nat_index=getattr(args, "nat_index", False),
        algebra=getattr(args, "algebra", "sum"),
        backend=getattr(args, "backend", "agda"),
        target=getattr(args, "target", None),
    )


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    cfg = _config(args)
    try:
        return _COMMANDS[cfg.command](cfg)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NestfoldError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
