#!/usr/bin/env python3
"""Download TU benchmark datasets into ./data (requires network access).

Usage: python scripts/fetch_datasets.py [MUTAG PTC_MR ENZYMES ...]
"""

import io
import sys
import urllib.request
import zipfile
from pathlib import Path

BASE_URL = "https://www.chrsmrrs.com/graphkerneldatasets"
DEFAULT = ["MUTAG", "PTC_MR", "ENZYMES"]


def fetch(name: str, root: Path) -> None:
    target = root / name
    if (target / f"{name}_A.txt").exists():
        print(f"{name}: already present")
        return
    url = f"{BASE_URL}/{name}.zip"
    print(f"{name}: downloading {url}")
    with urllib.request.urlopen(url, timeout=120) as resp:
        payload = resp.read()
    with zipfile.ZipFile(io.BytesIO(payload)) as zf:
        zf.extractall(root)
    print(f"{name}: extracted to {target}")


def main() -> int:
    names = sys.argv[1:] or DEFAULT
    root = Path(__file__).resolve().parent.parent / "data"
    root.mkdir(exist_ok=True)
    for name in names:
        fetch(name, root)
    return 0


if __name__ == "__main__":
    sys.exit(main())
