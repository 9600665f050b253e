"""Parameter files and named presets.

A parameter file is JSON with hex-encoded integers::

    {"name": "p160", "p": "0x...", "r": "0x...", "a": "0x1", "b": "0x0",
     "cofactor": "0x...", "generator": ["0x...", "0x..."],
     "p_bits": 160, "r_bits": 144}
"""

from __future__ import annotations

import json
import random
from importlib import resources
from pathlib import Path

from .curve import Point
from .pairing import PairingParams, generate_params

PRESETS = {"toy-64": 64, "p160": 160, "p256": 256, "p512": 512}
PRESET_SEED = 20190101


def preset_name(bits: int) -> str:
    return f"toy-{bits}" if bits < 128 else f"p{bits}"


def gen(bits: int, seed: int, name: str | None = None) -> PairingParams:
    """Deterministic parameter generation for a given seed."""
    return generate_params(bits, random.Random(seed), name=name or preset_name(bits))


def to_dict(pp: PairingParams) -> dict:
    return {
        "name": pp.name,
        "p": hex(pp.p),
        "r": hex(pp.r),
        "a": hex(1),
        "b": hex(0),
        "cofactor": hex(pp.cofactor),
        "generator": [hex(pp.generator.x), hex(pp.generator.y)],
        "p_bits": pp.p.bit_length(),
        "r_bits": pp.r.bit_length(),
    }


def from_dict(d: dict, validate: bool = True) -> PairingParams:
    if int(d.get("a", "0x1"), 16) != 1 or int(d.get("b", "0x0"), 16) != 0:
        raise ValueError("only y^2 = x^3 + x is supported")
    gx, gy = (int(v, 16) for v in d["generator"])
    pp = PairingParams(
        p=int(d["p"], 16),
        r=int(d["r"], 16),
        cofactor=int(d["cofactor"], 16),
        generator=Point(gx, gy),
        name=d.get("name", ""),
    )
    if validate:
        pp.validate()
    return pp


def dumps(pp: PairingParams) -> str:
    return json.dumps(to_dict(pp), indent=2) + "\n"


def save(pp: PairingParams, path: str | Path) -> None:
    Path(path).write_text(dumps(pp))


def load(spec: str | Path, validate: bool = True) -> PairingParams:
    """Load a preset by name or a parameter file by path."""
    spec = str(spec)
    if spec in PRESETS:
        text = resources.files("pairsource").joinpath("presets").joinpath(f"{spec}.json").read_text()
    else:
        text = Path(spec).read_text()
    return from_dict(json.loads(text), validate)
