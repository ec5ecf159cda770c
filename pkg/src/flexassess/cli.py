"""Command-line front end.

Exit codes: 0 success, 1 usage or I/O error, 2 model violations,
3 infeasible match, unfulfilled verdict or refused approval.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import audit
from .errors import (
    ApprovalRefusedError,
    InfeasibleMatchError,
    ModelSyntaxError,
    ModelValidationError,
    StaleReportError,
    UnratedFailureModeError,
)
from .fmea import LENIENT, STRICT, build_fmea, compare_processes
from .loader import build_repository, load_model
from .matching import can_manufacture, match_recipe
from .reports import (
    FORMATS,
    TABLE_TEXT,
    render_capability,
    render_comparison,
    render_fmea,
    render_match,
    render_risk,
)
from .risk import Verdict, approve, assess_process
from .validation import validate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_REJECTED = 3

log = logging.getLogger("flexassess")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flexassess", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--strict-schema", action="store_true",
        help="reject unknown keys in the model document instead of warning",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help_text, recipe=True, process=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("model", help="model document (JSON)")
        if recipe:
            p.add_argument("--recipe", required=True)
        if process:
            p.add_argument("--process", required=True)
        return p

    command("validate", "check a model document", recipe=False, process=False)
    command("match", "match a recipe against a process")
    p = command("fmea", "generate the process-FMEA")
    p.add_argument("--mode", choices=(STRICT, LENIENT), default=LENIENT)
    p.add_argument("--format", choices=FORMATS, default=TABLE_TEXT)
    p = command("compare", "rank processes by RPN", process=False)
    p.add_argument("--process", action="append", required=True, dest="processes")
    p.add_argument("--mode", choices=(STRICT, LENIENT), default=LENIENT)
    p = command("assess", "run the risk assessment")
    p.add_argument("--format", choices=FORMATS, default=TABLE_TEXT)
    p = command("approve", "approve a process whose risk assessment is fulfilled")
    p.add_argument("--approver", required=True)
    p.add_argument("--audit-log", default="approvals.log")
    p.add_argument("--timestamp", help="ISO-8601 approval time (default: now, UTC)")
    command("capability", "check whether the equipment can manufacture a recipe", process=False)
    return parser


def _recipe(repo, recipe_id):
    recipe = repo.recipe(recipe_id)
    if recipe is None:
        raise UsageError(f"unknown recipe {recipe_id}")
    return recipe


def _process(repo, process_id):
    process = repo.process(process_id)
    if process is None:
        raise UsageError(f"unknown process {process_id}")
    return process


def _cmd_validate(args, out) -> int:
    try:
        data = json.loads(Path(args.model).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    repo, violations = build_repository(data, strict=args.strict_schema)
    if repo is not None:
        violations = sorted(set(violations + validate(repo)))
    if violations:
        for v in violations:
            out.write(f"{v}\n")
        out.write(f"{len(violations)} violation(s)\n")
        return EXIT_INVALID
    out.write(
        f"OK: {len(repo.services)} services, {len(repo.recipes)} recipes, "
        f"{len(repo.equipment)} equipment, {len(repo.processes)} processes\n"
    )
    return EXIT_OK


def _cmd_match(args, repo, out) -> int:
    result = match_recipe(_recipe(repo, args.recipe), _process(repo, args.process), repo)
    out.write(render_match(result))
    if not result.feasible:
        for d in result.diagnostics:
            log.error(d)
        return EXIT_REJECTED
    return EXIT_OK


def _cmd_fmea(args, repo, out) -> int:
    report = build_fmea(_recipe(repo, args.recipe), _process(repo, args.process), repo, args.mode)
    out.write(render_fmea(report, args.format).text)
    return EXIT_OK


def _cmd_compare(args, repo, out) -> int:
    recipe = _recipe(repo, args.recipe)
    reports = [build_fmea(recipe, _process(repo, pid), repo, args.mode) for pid in args.processes]
    out.write(render_comparison(compare_processes(reports)))
    return EXIT_OK


def _cmd_assess(args, repo, out) -> int:
    report = assess_process(_recipe(repo, args.recipe), _process(repo, args.process), repo)
    out.write(render_risk(report, args.format).text)
    if report.verdict is not Verdict.FULFILLED:
        log.error("safety requirements not fulfilled; uncovered hazards: %s",
                  ", ".join(report.uncovered_hazards))
        return EXIT_REJECTED
    return EXIT_OK


def _cmd_approve(args, repo, out) -> int:
    report = assess_process(_recipe(repo, args.recipe), _process(repo, args.process), repo)
    timestamp = None
    if args.timestamp:
        try:
            timestamp = dt.datetime.fromisoformat(args.timestamp.replace("Z", "+00:00"))
        except ValueError:
            raise UsageError(f"invalid timestamp {args.timestamp!r}") from None
    try:
        approval = approve(report, args.approver, timestamp, repository=repo)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    audit.append_entry(args.audit_log, approval)
    out.write(
        f"approved process {approval.process_ref} by {approval.approver_id}\n"
        f"digest: {approval.report_digest}\n"
    )
    return EXIT_OK


def _cmd_capability(args, repo, out) -> int:
    recipe = _recipe(repo, args.recipe)
    result = can_manufacture(recipe, repo)
    out.write(render_capability(recipe.id, result))
    return EXIT_OK if result.capable else EXIT_REJECTED


COMMANDS = {
    "match": _cmd_match,
    "fmea": _cmd_fmea,
    "compare": _cmd_compare,
    "assess": _cmd_assess,
    "approve": _cmd_approve,
    "capability": _cmd_capability,
}


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = _build_parser().parse_args(argv)
        if args.command == "validate":
            return _cmd_validate(args, out)
        repo = load_model(args.model, strict=args.strict_schema)
        return COMMANDS[args.command](args, repo, out)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (OSError, ModelSyntaxError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (ModelValidationError, UnratedFailureModeError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except InfeasibleMatchError as exc:
        log.error("%s", exc)
        for d in exc.diagnostics:
            log.error("%s", d)
        return EXIT_REJECTED
    except ApprovalRefusedError as exc:
        log.error("%s", exc)
        return EXIT_REJECTED
    except StaleReportError as exc:
        log.error("%s", exc)
        return EXIT_REJECTED


run_cli = main


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
