"""Output bundle: JSON/CSV writers and the plain-text run manifest."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__

MANIFEST = "manifest.txt"


def write_json(path: Path, payload) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return path


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def emit_report(out_dir: Path, command: str = "", config_echo: str = "",
                phases: dict[str, float] | None = None, status: str = "ok") -> Path:
    """Write ``manifest.txt`` listing every other file in ``out_dir`` with its sha256.

    Wall-clock times live only in the manifest, so all other outputs stay
    byte-identical across reruns of the same config.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"fracsieve {__version__}", f"command: {command}", f"status: {status}", "", "[config]"]
    lines += config_echo.splitlines()
    lines += ["", "[phases]"]
    lines += [f"{name} {seconds:.3f}s" for name, seconds in (phases or {}).items()]
    lines += ["", "[files]"]
    for path in sorted(p for p in out_dir.rglob("*") if p.is_file() and p.name != MANIFEST):
        lines.append(f"{digest(path)}  {path.stat().st_size:>10}  {path.relative_to(out_dir)}")
    target = out_dir / MANIFEST
    target.write_text("\n".join(lines) + "\n")
    return target
