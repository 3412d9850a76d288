"""Flat key-value experiment configuration.

Config files are plain text, one `key = value` per line, `#` comments.
Documented keys (all optional, with desk-scale defaults):

    p                 comma list of exponents            1.5, 2, 3
    grids             comma list of cells per side       32, 64
    seed              base seed                          7
    n_seeds           seeds per (p, M) case              5
    comps             solution components N              1
    bounds            x0, x1, y0, y1                     0, 1, 0, 1
    radii_ratio       dyadic ratio for radius sets       0.5
    r_min_cells       smallest radius in cell widths     2.0
    r_max_frac        largest radius / domain side       0.25
    modulus           family + params, e.g. 'power 0.3'  power 0.3
    young             family + params, e.g. 'power 4'    power 4
    lorentz_r         second Lorentz index               1.0
    stability_factor  allowed fitted-constant growth     2.0
    assert_mode       fail the process on violations     false
"""

from dataclasses import dataclass, field

__all__ = ["ExperimentConfig", "parse_config_file"]


def parse_config_file(path):
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out


def _floats(text):
    return [float(t) for t in str(text).replace(",", " ").split()]


def _ints(text):
    return [int(t) for t in str(text).replace(",", " ").split()]


@dataclass
class ExperimentConfig:
    ps: list = field(default_factory=lambda: [1.5, 2.0, 3.0])
    grids: list = field(default_factory=lambda: [32, 64])
    seed: int = 7
    n_seeds: int = 5
    comps: int = 1
    bounds: tuple = (0.0, 1.0, 0.0, 1.0)
    radii_ratio: float = 0.5
    r_min_cells: float = 2.0
    r_max_frac: float = 0.25
    modulus_spec: tuple = ("power", (0.3,))
    young_spec: tuple = ("power", (4.0,))
    lorentz_r: float = 1.0
    stability_factor: float = 2.0
    assert_mode: bool = False

    def __post_init__(self):
        if not self.ps or not self.grids:
            raise ValueError("need at least one exponent and one grid size")
        if not (0.0 < self.radii_ratio < 1.0):
            raise ValueError("radii_ratio must lie in (0, 1)")

    @classmethod
    def from_mapping(cls, kv):
        kw = {}
        if "p" in kv:
            kw["ps"] = _floats(kv["p"])
        if "grids" in kv:
            kw["grids"] = _ints(kv["grids"])
        if "seed" in kv:
            kw["seed"] = int(kv["seed"])
        if "n_seeds" in kv:
            kw["n_seeds"] = int(kv["n_seeds"])
        if "comps" in kv:
            kw["comps"] = int(kv["comps"])
        if "bounds" in kv:
            kw["bounds"] = tuple(_floats(kv["bounds"]))
        if "radii_ratio" in kv:
            kw["radii_ratio"] = float(kv["radii_ratio"])
        if "r_min_cells" in kv:
            kw["r_min_cells"] = float(kv["r_min_cells"])
        if "r_max_frac" in kv:
            kw["r_max_frac"] = float(kv["r_max_frac"])
        if "modulus" in kv:
            parts = kv["modulus"].split()
            kw["modulus_spec"] = (parts[0], tuple(float(x) for x in parts[1:]))
        if "young" in kv:
            parts = kv["young"].split()
            kw["young_spec"] = (parts[0], tuple(float(x) for x in parts[1:]))
        if "lorentz_r" in kv:
            kw["lorentz_r"] = float(kv["lorentz_r"])
        if "stability_factor" in kv:
            kw["stability_factor"] = float(kv["stability_factor"])
        if "assert_mode" in kv:
            kw["assert_mode"] = kv["assert_mode"].lower() in ("1", "true", "yes", "on")
        return cls(**kw)

    @classmethod
    def from_file(cls, path):
        return cls.from_mapping(parse_config_file(path))

    def echo(self):
        """Plain dict snapshot embedded into every report."""
        return {
            "p": list(self.ps),
            "grids": list(self.grids),
            "seed": self.seed,
            "n_seeds": self.n_seeds,
            "comps": self.comps,
            "bounds": list(self.bounds),
            "radii_ratio": self.radii_ratio,
            "r_min_cells": self.r_min_cells,
            "r_max_frac": self.r_max_frac,
            "modulus": [self.modulus_spec[0], list(self.modulus_spec[1])],
            "young": [self.young_spec[0], list(self.young_spec[1])],
            "lorentz_r": self.lorentz_r,
            "stability_factor": self.stability_factor,
            "assert_mode": self.assert_mode,
        }
