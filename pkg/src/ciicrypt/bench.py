"""Attack simulations and the robustness report.

All randomness comes from :class:`NoiseRng`, a fixed 64-bit LCG, so every
report is reproducible bit for bit from its seeds.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import cipher
from .cgii import cgii_pickup, ciir_reconstruct
from .errors import FractionOutOfRange
from .metrics import entropy, psnr

LCG_MULT = 6364136223846793005
LCG_INC = 1442695040888963407
_MASK64 = (1 << 64) - 1
_BLOCK = 4096


def _block_constants(block: int) -> Tuple[int, int]:
    """Multiplier and increment that advance the LCG by ``block`` steps at once."""
    mult, inc = 1, 0
    for _ in range(block):
        mult = (mult * LCG_MULT) & _MASK64
        inc = (inc * LCG_MULT + LCG_INC) & _MASK64
    return mult, inc


_JUMP_MULT, _JUMP_INC = _block_constants(_BLOCK)


class NoiseRng:
    """64-bit LCG ``s <- s*6364136223846793005 + 1442695040888963407``.

    Uniform draws are ``((s >> 11) + 1) * 2**-53`` in (0, 1]; normal draws
    use the Box-Muller transform on consecutive uniform pairs, consuming
    both outputs.
    """

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def _states(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.uint64)
        first = min(n, _BLOCK)
        s = self.state
        for k in range(first):
            s = (s * LCG_MULT + LCG_INC) & _MASK64
            out[k] = s
        if n > _BLOCK:
            mult = np.uint64(_JUMP_MULT)
            inc = np.uint64(_JUMP_INC)
            with np.errstate(over="ignore"):
                for start in range(_BLOCK, n, _BLOCK):
                    stop = min(start + _BLOCK, n)
                    out[start:stop] = out[start - _BLOCK:stop - _BLOCK] * mult + inc
        if n:
            self.state = int(out[-1])
        return out

    def uniform(self, n: int) -> np.ndarray:
        s = self._states(n)
        return ((s >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * 2.0 ** -53

    def normal(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * math.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return z[:n]


def _ceil_count(fraction: float, total: int) -> int:
    # round first so 0.7 * 900 counts 630 rather than 631
    return int(math.ceil(round(fraction * total, 9)))


def occlude(img, fraction: float, mode: str = "block", seed: int = 0) -> np.ndarray:
    """Zero a fraction of the pixels of a plane or colour image.

    ``block`` zeroes the top ``ceil(D*H)`` rows.  ``random`` zeroes
    ``ceil(D*W*H)`` pixel positions drawn without replacement.
    """
    if not 0.0 < fraction < 1.0:
        raise FractionOutOfRange(f"occlusion fraction must lie in (0, 1), got {fraction}")
    out = np.array(img, dtype=np.uint8, copy=True)
    h, w = out.shape[:2]
    if mode == "block":
        out[:_ceil_count(fraction, h)] = 0
    elif mode == "random":
        keys = NoiseRng(seed).uniform(h * w)
        chosen = np.argsort(keys, kind="stable")[:_ceil_count(fraction, h * w)]
        out.reshape(h * w, -1)[chosen] = 0
    else:
        raise ValueError(f"unknown occlusion mode {mode!r}")
    return out


def gaussian_noise(img, strength: float, seed: int = 0) -> np.ndarray:
    """Multiplicative noise ``pixel * (1 + v*N)``, rounded and clamped to 8 bits."""
    if strength < 0:
        raise ValueError("noise strength must be >= 0")
    arr = np.asarray(img, dtype=np.uint8)
    noise = NoiseRng(seed).normal(arr.size).reshape(arr.shape)
    noisy = arr.astype(np.float64) * (1.0 + strength * noise)
    rounded = np.sign(noisy) * np.floor(np.abs(noisy) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


# -- suite -------------------------------------------------------------------

WRONG_X0 = 0.1675727
WRONG_DISTANCE = 30.0
WRONG_RULES = (90, 90, 150, 90, 90, 90, 150, 90)


@dataclass(frozen=True)
class SuiteParams:
    occlusion: Tuple[float, ...] = (0.1, 0.2, 0.5, 0.7)
    occlusion_mode: str = "block"
    occlusion_seed: int = 1
    noise: Tuple[float, ...] = (0.1, 0.5, 0.8)
    noise_seed: int = 2
    key_tests: bool = True
    wrong_x0: float = WRONG_X0
    wrong_distance_mm: float = WRONG_DISTANCE
    wrong_rules: Tuple[int, ...] = WRONG_RULES


@dataclass
class ReportRow:
    image: str
    attack: str
    param: str
    channel: str
    psnr_db: float
    entropy_bits: float


@dataclass
class AttackReport:
    rows: List[ReportRow] = field(default_factory=list)
    metadata: Dict[str, str] = field(default_factory=dict)

    HEADER = ("image", "attack", "param", "channel", "psnr_db", "entropy_bits")

    def select(self, attack: str, image: str = None) -> List[ReportRow]:
        return [r for r in self.rows if r.attack == attack and (image is None or r.image == image)]

    def psnr_of(self, image: str, attack: str, param: str, channel: str) -> float:
        for r in self.rows:
            if (r.image, r.attack, r.param, r.channel) == (image, attack, param, channel):
                return r.psnr_db
        raise KeyError((image, attack, param, channel))

    def extend(self, other: "AttackReport") -> None:
        self.rows.extend(other.rows)
        self.metadata.update(other.metadata)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.HEADER)
        for r in self.rows:
            writer.writerow([r.image, r.attack, r.param, r.channel,
                             _fmt(r.psnr_db), _fmt(r.entropy_bits)])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.4f}"


def _param(x) -> str:
    if isinstance(x, tuple):
        return "-".join(str(v) for v in x)
    return f"{x:g}"


def _channels(img):
    arr = np.asarray(img)
    if arr.ndim == 2:
        return [("Y", arr)]
    return [(name, arr[:, :, c]) for c, name in enumerate("RGB")]


def run_suite(plain, key: cipher.KeyMaterial, params: SuiteParams = SuiteParams(),
              image_id: str = "image") -> AttackReport:
    """Encrypt ``plain``, attack the cipher, decrypt and score every channel.

    PSNR is always measured against the plain image.  ``entropy_bits`` is
    the entropy of the channel handed to decryption after the attack (for
    the ``direct`` baseline, of the directly picked-up EIA).
    """
    plain_ch = _channels(plain)
    cipher_ch = [(n, cipher.encrypt_channel(c, key)) for n, c in plain_ch]
    order = {n: k for k, (n, _) in enumerate(plain_ch)}
    rows: List[Tuple[tuple, ReportRow]] = []

    def add(attack, param, name, score, ent):
        sort_param = param if isinstance(param, tuple) else (float(param),)
        rows.append(((attack, sort_param, order[name]),
                     ReportRow(image_id, attack, _param(param), name, score, ent)))

    def decrypt_rows(attack, param, attacked, use_key=key):
        for (name, ref), ch in zip(plain_ch, attacked):
            _, rec = cipher.decrypt_channel(ch, use_key)
            add(attack, param, name, psnr(ref, rec), entropy(ch))

    geo = key.geometry
    for name, ref in plain_ch:
        direct = cgii_pickup(ref, geo)
        rec = ciir_reconstruct(direct, geo.distance_mm).image
        add("direct", geo.distance_mm, name, psnr(ref, rec), entropy(direct.pixels))

    stacked = np.stack([c for _, c in cipher_ch], axis=-1)
    decrypt_rows("none", 0, [c for _, c in cipher_ch])
    for d in params.occlusion:
        hit = occlude(stacked, d, params.occlusion_mode, params.occlusion_seed)
        decrypt_rows("occlusion", d, [hit[:, :, k] for k in range(stacked.shape[2])])
    for v in params.noise:
        hit = gaussian_noise(stacked, v, params.noise_seed)
        decrypt_rows("noise", v, [hit[:, :, k] for k in range(stacked.shape[2])])
    if params.key_tests:
        clean = [c for _, c in cipher_ch]
        wrong = {
            ("key_x0", params.wrong_x0):
                key.replace(logistic=type(key.logistic)(params.wrong_x0, key.logistic.rho)),
            ("key_distance", params.wrong_distance_mm):
                key.replace(geometry=geo.replace(distance_mm=params.wrong_distance_mm)),
            ("key_rules", params.wrong_rules): key.replace(rules=params.wrong_rules),
        }
        for (attack, param), bad_key in wrong.items():
            decrypt_rows(attack, param, clean, bad_key)

    rows.sort(key=lambda item: item[0])
    meta = {
        "key_fingerprint": key.fingerprint(),
        "geometry": f"{geo.pinholes_x}x{geo.pinholes_y} pitch={geo.pitch_mm} gap={geo.gap_mm} "
                    f"distance={geo.distance_mm} m={geo.pixels_per_elemental}",
        "occlusion_mode": params.occlusion_mode,
    }
    return AttackReport([r for _, r in rows], meta)


def run_suites(images: Sequence[Tuple[str, np.ndarray]], key, params: SuiteParams = SuiteParams()) -> AttackReport:
    report = AttackReport()
    for image_id, img in images:
        report.extend(run_suite(img, key, params, image_id))
    return report
