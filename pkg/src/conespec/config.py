"""Flat sectioned key-value run configuration.

Sections: [geometry], [perturbation], [numerics], [task]. No nesting, no
programmability; every value is a scalar, a comma list, or a colon-grid
spec start:stop:count[:log|lin]. Unknown keys are rejected so that configs
diff cleanly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from conespec.errors import ConfigError
from conespec import cross_section as cs
from conespec import radial_scattering as rs

_SECTIONS = ("geometry", "perturbation", "numerics", "task")

_KNOWN = {
    "geometry": {"kind", "n", "v0", "l_max", "length", "modes", "v0_samples",
                 "grid", "vol"},
    "perturbation": {"kind", "center", "width", "amplitude", "file"},
    "numerics": {"tol", "r_match", "n_lambda", "dense_points"},
    "task": {"lambda", "lambda_grid", "points", "t_grid", "kind", "lambda_c",
             "sign", "fit", "radii", "nu", "sigma", "r", "r_prime", "r0",
             "box_r", "box_n", "expr", "seed", "step", "grid", "s", "t",
             "file"},
}


def parse_config_text(text):
    """Parse the flat config format into {section: {key: value}}."""
    data = {s: {} for s in _SECTIONS}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any section")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in "
                              f"[{section}]")
        data[section][key] = value
    return data


def parse_config_file(path):
    with open(path, "r") as fh:
        return parse_config_text(fh.read())


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def parse_grid(text):
    """start:stop:count[:log|lin] or a comma list."""
    if ":" not in text:
        return np.array(_floats(text))
    parts = text.split(":")
    if parts[-1] == "dyadic":
        # start:octaves:dyadic -- two points per octave
        if len(parts) != 3:
            raise ConfigError(f"bad dyadic grid spec {text!r}")
        start, octaves = float(parts[0]), int(parts[1])
        return np.array([start * 2.0 ** (k / 2.0)
                         for k in range(2 * octaves + 1)])
    if len(parts) not in (3, 4):
        raise ConfigError(f"bad grid spec {text!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    scale = parts[3] if len(parts) == 4 else "lin"
    if count < 1:
        raise ConfigError("grid count must be >= 1")
    if scale == "log":
        if start <= 0.0:
            raise ConfigError("log grid needs positive start")
        return np.geomspace(start, stop, count)
    if scale == "lin":
        return np.linspace(start, stop, count)
    raise ConfigError(f"unknown grid scale {scale!r}")


def parse_points(text):
    """r:theta:r_prime triples separated by commas or semicolons."""
    out = []
    for chunk in text.replace(";", ",").split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad point triple {chunk!r} (want r:theta:r')")
        out.append((float(parts[0]), float(parts[1]), float(parts[2])))
    if not out:
        raise ConfigError("no evaluation points given")
    return out


@dataclass
class RunConfig:
    """Validated run configuration with the model already built."""

    raw: dict
    spectrum: object
    model: object
    tol: float = 1e-10
    task: dict = field(default_factory=dict)

    @property
    def geometry(self):
        return self.raw["geometry"]


def build_run_config(data, l_max_override=None, tol_override=None):
    geo = data["geometry"]
    kind = geo.get("kind", "sphere")
    n = int(geo.get("n", 3))
    l_max = int(geo.get("l_max", 60))
    if l_max_override is not None:
        l_max = l_max_override
    spec = cs.CrossSectionSpec(
        kind=kind,
        n=n,
        v0=float(geo.get("v0", 0.0)),
        l_max=l_max,
        length=float(geo.get("length", 2.0 * math.pi)),
        modes=tuple(tuple(map(float, pair.split(":")))
                    for pair in geo.get("modes", "").split(",") if pair.strip()),
        v0_samples=tuple(_floats(geo.get("v0_samples", ""))),
        grid=int(geo.get("grid", 128)),
        vol=float(geo.get("vol", 1.0)),
    )
    spectrum = cs.check_hyp2(spec)

    pert = data["perturbation"]
    pkind = pert.get("kind", "none")
    if pkind == "none":
        w = None
    elif pkind == "bump":
        w = rs.BumpPerturbation(float(pert["center"]), float(pert["width"]),
                                float(pert["amplitude"]))
    elif pkind == "table":
        radii, vals = [], []
        with open(pert["file"], "r") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line or line.lower().startswith("r,"):
                    continue
                a, b = line.split(",")[:2]
                radii.append(float(a))
                vals.append(float(b))
        w = rs.TablePerturbation(tuple(radii), tuple(vals))
    else:
        raise ConfigError(f"unknown perturbation kind {pkind!r}")

    num = data["numerics"]
    tol = float(num.get("tol", 1e-10))
    if tol_override is not None:
        tol = tol_override
    r_match = num.get("r_match", "auto")
    model = rs.RadialModel(
        spectrum, w, tol=tol,
        r_match=None if r_match in ("auto", "", None) else float(r_match))
    return RunConfig(raw=data, spectrum=spectrum, model=model, tol=tol,
                     task=dict(data["task"]))
