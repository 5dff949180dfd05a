"""Command-line entry point.

Exit codes: 0 success, 2 invalid arguments, 3 key-file error,
4 dimension or geometry mismatch, 5 I/O failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Callable, List, Optional

import numpy as np

from . import bench, cipher, metrics
from .cgii import cgii_pickup, ciir_reconstruct
from .errors import (DepthNotConvertible, DimensionMismatch, ImageFormatError,
                     KeyParseError, NonPositiveDistance)
from .imaging import ElementalImageArray
from .netpbm import read_image, write_image
from .smartmap import as_depth_converted, conversion_distance, depth_convert

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_KEY = 3
EXIT_GEOMETRY = 4
EXIT_IO = 5


class UsageError(Exception):
    pass


class KeyFileError(Exception):
    pass


def _load_key(path: str) -> cipher.KeyMaterial:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise KeyFileError(f"cannot read key file {path}: {exc.strerror}") from exc
    try:
        return cipher.parse_key(text)
    except KeyParseError as exc:
        raise KeyFileError(f"{path}: {exc}") from exc


def _per_channel(img: np.ndarray, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    if img.ndim == 2:
        return fn(img)
    return np.stack([fn(img[:, :, c]) for c in range(img.shape[2])], axis=-1)


def _stages(text: str) -> cipher.StageSelection:
    names = {s.strip() for s in text.split(",") if s.strip()}
    unknown = names - {"mask", "scramble"}
    if unknown or not names:
        raise UsageError(f"--stages takes a comma list of mask,scramble; got {text!r}")
    return cipher.StageSelection(mask="mask" in names, scramble="scramble" in names)


def _scan_range(text: str):
    try:
        start, end, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"--scan expects START:END:STEP, got {text!r}") from None
    if not (0 < start <= end and step > 0):
        raise UsageError("--scan needs 0 < START <= END and STEP > 0")
    return start, end, step


def _positive(name: str, value: Optional[float]) -> None:
    if value is not None and value <= 0:
        raise UsageError(f"{name} must be positive, got {value}")


# -- subcommands -------------------------------------------------------------

def cmd_pickup(args) -> int:
    key = _load_key(args.key)
    img = read_image(args.input)
    write_image(args.output, _per_channel(img, lambda c: cgii_pickup(c, key.geometry).pixels))
    return EXIT_OK


def cmd_convert_depth(args) -> int:
    key = _load_key(args.key)
    img = read_image(args.input)
    conv = lambda c: depth_convert(ElementalImageArray(key.geometry, c)).pixels
    write_image(args.output, _per_channel(img, conv))
    return EXIT_OK


def _eia(pixels, key, kind):
    if kind == "converted":
        return as_depth_converted(pixels, key.geometry)
    return ElementalImageArray(key.geometry, pixels)


def cmd_reconstruct(args) -> int:
    _positive("--z", args.z)
    scan = _scan_range(args.scan) if args.scan else None
    if scan and args.ref is None:
        raise UsageError("--scan needs --ref to score depths")
    key = _load_key(args.key)
    img = read_image(args.input)
    ref = read_image(args.ref) if args.ref else None
    if ref is not None and ref.shape != img.shape:
        raise DimensionMismatch(f"--ref shape {ref.shape} differs from EIA shape {img.shape}")
    converted = args.kind == "converted"

    def at(z):
        return _per_channel(img, lambda c: ciir_reconstruct(_eia(c, key, args.kind), z,
                                                            fill_empty=converted).image)

    if scan is None:
        z = args.z
        if z is None:
            z = conversion_distance(key.geometry).z_out_mm if converted else key.geometry.distance_mm
        out = at(z)
        if ref is not None:
            print(f"{z:g},{_fmt(metrics.psnr(ref, out))}")
    else:
        start, end, step = scan
        n = int((end - start) / step + 1e-9) + 1
        best = None
        print("depth_mm,psnr_db")
        for k in range(n):
            z = start + k * step
            rec = at(z)
            score = metrics.psnr(ref, rec)
            print(f"{z:g},{_fmt(score)}")
            if best is None or score > best[0]:
                best = (score, rec)
        out = best[1]
    if args.output:
        write_image(args.output, out)
    return EXIT_OK


def cmd_encrypt(args) -> int:
    stages = _stages(args.stages)
    key = _load_key(args.key)
    img = read_image(args.input)
    write_image(args.output, _per_channel(img, lambda c: cipher.encrypt_channel(c, key, stages)))
    return EXIT_OK


def cmd_decrypt(args) -> int:
    stages = _stages(args.stages)
    _positive("--z", args.z)
    key = _load_key(args.key)
    img = read_image(args.input)
    eias = []

    def dec(c):
        eia, rec = cipher.decrypt_channel(c, key, stages, args.z, zeros_lost=not args.keep_zeros)
        eias.append(eia.pixels)
        return rec

    out = _per_channel(img, dec)
    write_image(args.output, out)
    if args.eia_out:
        write_image(args.eia_out, eias[0] if img.ndim == 2 else np.stack(eias, axis=-1))
    return EXIT_OK


def cmd_attack(args) -> int:
    if (args.occlude is None) == (args.noise is None):
        raise UsageError("give exactly one of --occlude or --noise")
    if args.occlude is not None and not 0 < args.occlude < 1:
        raise UsageError("--occlude must lie in (0, 1)")
    if args.noise is not None and args.noise < 0:
        raise UsageError("--noise must be >= 0")
    img = read_image(args.input)
    if args.occlude is not None:
        out = bench.occlude(img, args.occlude, args.mode, args.seed)
    else:
        out = bench.gaussian_noise(img, args.noise, args.seed)
    write_image(args.output, out)
    return EXIT_OK


def _fmt(x: float) -> str:
    return "inf" if x == float("inf") else f"{x:.4f}"


def cmd_analyze(args) -> int:
    img = read_image(args.input)
    ref = read_image(args.ref) if args.ref else None
    if ref is not None and ref.shape != img.shape:
        raise DimensionMismatch(f"--ref shape {ref.shape} differs from {img.shape}")
    chans = [("Y", img, ref)] if img.ndim == 2 else [
        (n, img[:, :, k], None if ref is None else ref[:, :, k]) for k, n in enumerate("RGB")]
    header = "channel,entropy_bits,chi_square" + (",psnr_db" if ref is not None else "")
    print(header)
    for name, ch, rch in chans:
        fields = [name, _fmt(metrics.entropy(ch)), _fmt(metrics.chi_square_uniform(ch))]
        if rch is not None:
            fields.append(_fmt(metrics.psnr(rch, ch)))
        print(",".join(fields))
    return EXIT_OK


def cmd_report(args) -> int:
    key = _load_key(args.key)
    params = bench.SuiteParams(occlusion_mode=args.occlusion_mode)
    images = [(os.path.splitext(os.path.basename(p))[0], read_image(p)) for p in args.input]
    report = bench.run_suites(images, key, params)
    text = report.to_csv()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for name, value in report.metadata.items():
        print(f"# {name}: {value}", file=sys.stderr)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ciicrypt", description="Depth-conversion integral-imaging image cipher")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def io_args(p, out_required=True):
        p.add_argument("--in", dest="input", required=True, help="input PGM/PPM")
        p.add_argument("--out", dest="output", required=out_required, help="output PGM/PPM")

    p = sub.add_parser("pickup", help="record an image as an elemental image array")
    io_args(p)
    p.add_argument("--key", required=True)
    p.set_defaults(func=cmd_pickup)

    p = sub.add_parser("convert-depth", help="smart-map a picked-up EIA")
    io_args(p)
    p.add_argument("--key", required=True)
    p.set_defaults(func=cmd_convert_depth)

    p = sub.add_parser("reconstruct", help="CIIR reconstruction at a depth or over a depth scan")
    io_args(p, out_required=False)
    p.add_argument("--key", required=True)
    p.add_argument("--z", type=float, help="depth in mm (default d-l for converted, l for direct)")
    p.add_argument("--kind", choices=("converted", "direct"), default="converted",
                   help="whether the input EIA is depth-converted (default) or directly picked up")
    p.add_argument("--scan", help="START:END:STEP depth scan in mm; prints depth,psnr")
    p.add_argument("--ref", help="reference plane image for PSNR")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("encrypt", help="encrypt a plane or colour image")
    io_args(p)
    p.add_argument("--key", required=True)
    p.add_argument("--stages", default="mask,scramble")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt and reconstruct")
    io_args(p)
    p.add_argument("--key", required=True)
    p.add_argument("--stages", default="mask,scramble")
    p.add_argument("--z", type=float, help="reconstruction depth in mm (default d-l)")
    p.add_argument("--eia-out", help="also write the recovered depth-converted EIA")
    p.add_argument("--keep-zeros", action="store_true",
                   help="treat zero cipher pixels as data rather than erasures")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("attack", help="occlude or add noise to a cipher image")
    io_args(p)
    p.add_argument("--occlude", type=float, metavar="D", help="fraction of pixels to zero")
    p.add_argument("--mode", choices=("block", "random"), default="block")
    p.add_argument("--noise", type=float, metavar="V", help="multiplicative Gaussian noise strength")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("analyze", help="entropy, chi-square and optional PSNR per channel")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--ref", help="reference image for PSNR")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="run the attack suite and emit a CSV report")
    p.add_argument("--in", dest="input", required=True, nargs="+", help="plain test images")
    p.add_argument("--key", required=True)
    p.add_argument("--suite", choices=("standard",), default="standard")
    p.add_argument("--occlusion-mode", choices=("block", "random"), default="block")
    p.add_argument("--out", dest="output", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"ciicrypt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyFileError as exc:
        print(f"ciicrypt: key error: {exc}", file=sys.stderr)
        return EXIT_KEY
    except (DimensionMismatch, DepthNotConvertible, NonPositiveDistance) as exc:
        print(f"ciicrypt: geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except (OSError, ImageFormatError) as exc:
        print(f"ciicrypt: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
