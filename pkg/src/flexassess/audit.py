"""Plain-text approval audit log, one line per approval."""

from __future__ import annotations

import datetime as dt
import os
import re
from pathlib import Path
from typing import Dict, List, Union

from .risk import ProcessApproval

_FIELD = re.compile(r"(\w+)=(\S+)")


def format_entry(approval: ProcessApproval) -> str:
    ts = approval.timestamp.astimezone(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return (
        f"{ts} approver={approval.approver_id} process={approval.process_ref} "
        f"digest={approval.report_digest} verdict={approval.verdict.value}\n"
    )


def append_entry(path: Union[str, Path], approval: ProcessApproval) -> str:
    line = format_entry(approval)
    # a single O_APPEND write keeps concurrent appends from interleaving
    fd = os.open(os.fspath(path), os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
    try:
        os.write(fd, line.encode("utf-8"))
    finally:
        os.close(fd)
    return line


def read_entries(path: Union[str, Path]) -> List[Dict[str, str]]:
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        ts, _, rest = line.partition(" ")
        entry = {"timestamp": ts}
        entry.update(_FIELD.findall(rest))
        entries.append(entry)
    return entries
