"""Operator-facing command line.

Subcommands:

* erase    - destroy every file under a directory tree (dry-run by default)
* selftest - primitive vectors, cipher conformance, live entropy check,
             memory audit, optional manifest verification
* bench    - corpus generation plus end-to-end erase timing
* verify   - check a build manifest against the current tree

Destruction is deliberately hard to trigger: without --force the erase
subcommand only lists what it would do, and deny-listed roots (filesystem
root, home, system directories) additionally require --i-understand.

Exit codes are a stable contract for scripting: 0 full success, 1 partial or
functional failure, 2 refused by an interlock or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from . import __version__, bench, entropy, implsec, primitives, protocol, sosemanuk, vectors

CONFIG_ENV_VAR = "CRYPTOSHRED_CONFIG"

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_REFUSED = 2


@dataclass
class CliConfig:
    block_size: int = protocol.DEFAULT_BLOCK_SIZE
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    alpha: float = entropy.DEFAULT_ALPHA
    min_entropy: float = entropy.DEFAULT_MIN_ENTROPY
    reseed_budget: int = entropy.DEFAULT_RESEED_BUDGET
    deny_list: tuple = field(default_factory=protocol.default_deny_list)
    escrow_path: str | None = None
    report_format: str = "text"


_INT_KEYS = {"block_size", "workers", "reseed_budget"}
_FLOAT_KEYS = {"alpha", "min_entropy"}


def load_config_file(path) -> dict:
    """Parse a plain-text key-value config file ("key = value" lines,
    '#' comments)."""
    values = {}
    with open(path, "r", encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key == "deny_list":
                values[key] = tuple(p for p in value.split(":") if p)
            elif key in {"escrow_path", "report_format"}:
                values[key] = value
            else:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    return values


def resolve_config(args) -> CliConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    cfg = CliConfig()
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if path:
        for key, value in load_config_file(path).items():
            setattr(cfg, key, value)
    if getattr(args, "block_size", None) is not None:
        cfg.block_size = args.block_size
    if getattr(args, "workers", None) is not None:
        cfg.workers = args.workers
    if getattr(args, "escrow", None) is not None:
        cfg.escrow_path = args.escrow
    if getattr(args, "format", None) is not None:
        cfg.report_format = args.format
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cryptoshred",
        description="Cryptographic file destruction with verifiable key erasure.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="path to a key=value config file "
                        f"(or set ${CONFIG_ENV_VAR})")
    sub = parser.add_subparsers(dest="command", required=True)

    p_erase = sub.add_parser("erase", help="destroy files under a directory tree")
    p_erase.add_argument("root", help="directory tree to destroy")
    p_erase.add_argument("--force", action="store_true",
                         help="actually destroy files (default is a dry-run listing)")
    p_erase.add_argument("--i-understand", action="store_true",
                         help="second interlock, required for deny-listed roots")
    p_erase.add_argument("--escrow", metavar="PATH",
                         help="append the job's master private key to this store "
                              "(recovery drills and tests only)")
    p_erase.add_argument("--workers", type=int, metavar="N")
    p_erase.add_argument("--block-size", type=int, metavar="BYTES")
    p_erase.add_argument("--format", choices=("text", "json"))

    p_self = sub.add_parser("selftest", help="run the built-in verification suite")
    p_self.add_argument("--manifest", metavar="PATH",
                        help="also verify this build manifest")
    p_self.add_argument("--sample-bytes", type=int, default=1 << 20,
                        help="entropy sample size for the randomness check")
    p_self.add_argument("--format", choices=("text", "json"))

    p_bench = sub.add_parser("bench", help="corpus generation and erase timing")
    p_bench.add_argument("--counts", type=int, nargs="+", default=list(bench.DEFAULT_COUNTS))
    p_bench.add_argument("--sizes", type=int, nargs="+", default=list(bench.DEFAULT_SIZES))
    p_bench.add_argument("--types", nargs="+", default=list(bench.FILE_TYPES),
                         choices=list(bench.FILE_TYPES))
    p_bench.add_argument("--seed", type=int, default=bench.DEFAULT_SEED)
    p_bench.add_argument("--workdir", help="scratch directory for the corpora")
    p_bench.add_argument("--workers", type=int, metavar="N")
    p_bench.add_argument("--block-size", type=int, metavar="BYTES")
    p_bench.add_argument("--format", choices=("text", "json"))

    p_verify = sub.add_parser("verify", help="verify a build manifest")
    p_verify.add_argument("manifest", help="manifest file to check")
    p_verify.add_argument("--base-dir", help="resolve manifest paths against this directory")
    p_verify.add_argument("--format", choices=("text", "json"))
    return parser


# --- erase ---

def _emit(doc: dict, text: str, fmt: str, out) -> None:
    if fmt == "json":
        print(json.dumps(doc, indent=2), file=out)
    else:
        print(text, file=out, end="" if text.endswith("\n") else "\n")


def cmd_erase(args, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    cfg = resolve_config(args)
    root = args.root
    if not os.path.isdir(root):
        print(f"error: {root!r} is not a directory", file=err)
        return EXIT_REFUSED

    denied = protocol.is_deny_listed(root, cfg.deny_list)
    if not args.force:
        warnings: list = []
        candidates = list(protocol.iter_tree(root, warnings))
        lines = [f"DRY RUN: {len(candidates)} candidate file(s) under {root}"]
        if denied:
            lines.append("note: root is deny-listed; a real run needs --force --i-understand")
        total = 0
        for path in candidates:
            size = os.path.getsize(path)
            total += size
            lines.append(f"  would erase {path} ({size} bytes)")
        lines += [f"total: {total} bytes", "no files were modified (pass --force to destroy)"]
        _emit({"dry_run": True, "root": root, "candidates": candidates,
               "total_bytes": total, "deny_listed": denied},
              "\n".join(lines), cfg.report_format, out)
        return EXIT_OK

    if denied and not args.i_understand:
        print(f"refused: {root!r} is deny-listed; pass --force --i-understand "
              "to override", file=err)
        return EXIT_REFUSED

    job = protocol.ErasureJob(
        root=root, block_size=cfg.block_size, workers=cfg.workers,
        escrow=cfg.escrow_path, force=args.i_understand, deny_list=cfg.deny_list)
    report = protocol.run_job(job, reseed_budget=cfg.reseed_budget)

    lines = [f"job {report.job_id} over {report.root}"]
    for rec in report.records:
        flag = "" if rec.status == "ok" else f"  [{rec.status.upper()}]"
        lines.append(f"  {rec.original_path} -> {rec.final_path} "
                     f"({rec.original_len} bytes, {rec.blocks_processed} blocks, "
                     f"{rec.duration:.3f}s){flag}")
    for path, reason in report.failures:
        lines.append(f"  FAILED {path}: {reason}")
    for warning in report.warnings:
        lines.append(f"  warning: {warning}")
    lines.append(f"summary: {len(report.records)} erased, {len(report.failures)} failed, "
                 f"{len(report.warnings)} warning(s), {report.duration:.3f}s")
    _emit(report.to_dict(), "\n".join(lines), cfg.report_format, out)
    return EXIT_OK if report.ok else EXIT_FAILURES


# --- selftest ---

def _selftest_primitives() -> tuple[bool, str]:
    zero_clamped = primitives.clamp(bytes(32))
    if zero_clamped != bytes(31) + b"\x40":
        return False, "clamp bit pattern wrong"
    for scalar_hex, u_hex, expect_hex in vectors.X25519_SCALARMULT_VECTORS:
        got = primitives.shared(primitives.clamp(bytes.fromhex(scalar_hex)),
                                bytes.fromhex(u_hex))
        if got.hex() != expect_hex:
            return False, f"scalar-mult vector failed for scalar {scalar_hex[:16]}..."
    a_priv = bytes.fromhex(vectors.X25519_A_PRIVATE)
    b_priv = bytes.fromhex(vectors.X25519_B_PRIVATE)
    if primitives.base_mul(primitives.clamp(a_priv)).hex() != vectors.X25519_A_PUBLIC:
        return False, "keypair vector A failed"
    if primitives.base_mul(primitives.clamp(b_priv)).hex() != vectors.X25519_B_PUBLIC:
        return False, "keypair vector B failed"
    got = primitives.shared(primitives.clamp(a_priv), bytes.fromhex(vectors.X25519_B_PUBLIC))
    if got.hex() != vectors.X25519_SHARED:
        return False, "key agreement vector failed"
    for msg, digest_hex in vectors.SHA256_VECTORS:
        if msg == "a*1000000":
            msg = b"a" * 1000000
        if primitives.sha256(msg).hex() != digest_hex:
            return False, f"hash vector failed for message of {len(msg)} octets"
    return True, "curve and hash vectors reproduced"


def _selftest_cipher() -> tuple[bool, str]:
    for key_hex, iv_hex, ks_hex in vectors.SOSEMANUK_KEYSTREAM_VECTORS:
        expect = bytes.fromhex(ks_hex)
        got = sosemanuk.keystream_bytes(bytes.fromhex(key_hex), bytes.fromhex(iv_hex),
                                        len(expect))
        if got != expect:
            return False, f"keystream vector failed for key {key_hex[:16]}..."
    return True, f"{len(vectors.SOSEMANUK_KEYSTREAM_VECTORS)} keystream vectors reproduced"


def _selftest_entropy(sample_bytes: int, alpha: float, min_entropy: float):
    report = entropy.rand_check(entropy.os_entropy(sample_bytes),
                                alpha=alpha, min_entropy=min_entropy)
    if not report.passed:  # rerun once: failures at rate alpha are expected
        report = entropy.rand_check(entropy.os_entropy(sample_bytes),
                                    alpha=alpha, min_entropy=min_entropy)
    return report.passed, report


def _selftest_memlife() -> tuple[bool, str]:
    report = implsec.memlife_audit(implsec.encrypt_fixture_action())
    if not report.passed:
        return False, f"residual secrets in: {', '.join(report.offending())}"
    negative = implsec.memlife_audit(implsec.encrypt_fixture_action(skip_zeroize=True))
    if negative.passed:
        return False, "negative control not detected: audit cannot see planted leaks"
    return True, (f"{len(report.regions)} regions zero after encryption; "
                  "planted leak detected")


def cmd_selftest(args, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    cfg = resolve_config(args)
    sections = {}
    ok_all = True

    ok, detail = _selftest_primitives()
    sections["primitives"] = {"passed": ok, "detail": detail}
    ok_all &= ok

    ok, detail = _selftest_cipher()
    sections["cipher"] = {"passed": ok, "detail": detail}
    ok_all &= ok

    try:
        ok, report = _selftest_entropy(args.sample_bytes, cfg.alpha, cfg.min_entropy)
        sections["randomness"] = {"passed": ok, "report": report.to_dict()}
    except Exception as exc:
        ok = False
        sections["randomness"] = {"passed": False, "detail": f"{type(exc).__name__}: {exc}"}
    ok_all &= ok

    ok, detail = _selftest_memlife()
    sections["memory"] = {"passed": ok, "detail": detail}
    ok_all &= ok

    if args.manifest:
        try:
            result = implsec.verihash_verify(
                implsec.Manifest.load(args.manifest),
                base_dir=os.path.dirname(os.path.abspath(args.manifest)) or None)
            sections["manifest"] = {"passed": result.passed, **result.to_dict()}
            ok_all &= result.passed
        except OSError as exc:
            sections["manifest"] = {"passed": False, "detail": str(exc)}
            ok_all = False

    lines = []
    for name, info in sections.items():
        status = "PASS" if info.get("passed") else "FAIL"
        detail = info.get("detail", "")
        lines.append(f"{name:12s} {status}  {detail}".rstrip())
    lines.append(f"selftest: {'PASS' if ok_all else 'FAIL'}")
    _emit({"sections": sections, "passed": ok_all}, "\n".join(lines),
          cfg.report_format, out)
    return EXIT_OK if ok_all else EXIT_FAILURES


# --- bench ---

def cmd_bench(args, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    cfg = resolve_config(args)
    try:
        report = bench.run_bench(
            counts=args.counts, sizes=args.sizes, types=args.types,
            seed=args.seed, workdir=args.workdir, workers=cfg.workers,
            block_size=cfg.block_size,
            on_cell=None if cfg.report_format == "json" else
            (lambda c: print(f"  {c.file_type} x{c.count} ({c.file_size}B): "
                             f"{c.seconds:.3f}s", file=err)))
    except Exception as exc:
        print(f"bench aborted: {exc}", file=err)
        return EXIT_FAILURES
    _emit(report.to_dict(), report.to_text(), cfg.report_format, out)
    return EXIT_OK


# --- verify ---

def cmd_verify(args, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    cfg = resolve_config(args)
    try:
        manifest = implsec.Manifest.load(args.manifest)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read manifest {args.manifest!r}: {exc}", file=err)
        return EXIT_REFUSED
    base = args.base_dir or os.path.dirname(os.path.abspath(args.manifest)) or None
    result = implsec.verihash_verify(manifest, base_dir=base)
    if result.passed:
        _emit(result.to_dict(), f"OK: {len(manifest.entries)} file(s) match",
              cfg.report_format, out)
        return EXIT_OK
    lines = ["manifest verification FAILED"]
    lines += [f"  mismatch: {p}" for p in result.mismatched]
    lines += [f"  missing:  {p}" for p in result.missing]
    _emit(result.to_dict(), "\n".join(lines), cfg.report_format, out)
    return EXIT_FAILURES


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code in (None, 0):
            return EXIT_OK
        return EXIT_REFUSED if code == 2 else int(code)
    handlers = {
        "erase": cmd_erase,
        "selftest": cmd_selftest,
        "bench": cmd_bench,
        "verify": cmd_verify,
    }
    return handlers[args.command](args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
