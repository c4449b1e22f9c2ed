#!/usr/bin/env python3
"""Regenerate MANIFEST.sha256 over the package sources.

Run after any intentional change under src/cryptoshred/; the manifest pins
the shipped implementation so `cryptoshred verify MANIFEST.sha256` (and the
test suite) can detect tampering or accidental drift.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from cryptoshred import implsec  # noqa: E402

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))


def main() -> int:
    sources = []
    pkg = os.path.join(REPO_ROOT, "src", "cryptoshred")
    for name in sorted(os.listdir(pkg)):
        if name.endswith(".py"):
            sources.append(os.path.join(pkg, name))
    manifest = implsec.verihash_build(sources, base_dir=REPO_ROOT)
    out = os.path.join(REPO_ROOT, "MANIFEST.sha256")
    manifest.write(out)
    print(f"wrote {out} ({len(manifest.entries)} entries)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
