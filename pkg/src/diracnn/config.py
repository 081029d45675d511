# config.py
#
# Flat INI-style run configuration with strict key checking.  Defaults are
# the standard parameter set for each system (hydrogen in Hartree atomic
# units, neutron Woods-Saxon wells in MeV/fm), so a minimal config only
# names the system and what to solve.

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .mesh import RadialMesh, build_log_mesh, build_uniform_mesh
from .potentials import (HBARC_MEV_FM, NUCLEON_MC2_MEV, SPEED_OF_LIGHT_AU,
                         CoulombSpec, WoodsSaxonSpec)


class ConfigError(ValueError):
    pass


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {s!r}")


def _parse_int_list(s: str) -> list[int]:
    items = [t for t in s.replace(",", " ").split() if t]
    return [int(t) for t in items]


_SCHEMA: dict[str, dict[str, object]] = {
    "system": {
        "kind": str,            # coulomb | woods_saxon
        "z": float,
        "c": float,
        "a_count": int,         # nucleon number A
        "n_count": int,         # neutron number N
        "z_count": int,         # proton number Z
        "depth": float,
        "asym": float,
        "r0": float,
        "a_diff": float,
        "r0_ls": float,
        "a_ls": float,
        "lambda_n": float,
        "mc2": float,
        "hbarc": float,
        "kappa": int,
        "n": int,
        "kappa_list": _parse_int_list,
        "n_fill": int,
    },
    "mesh": {
        "kind": str,            # log | uniform
        "m": int,
        "x0": float,
        "r_max": float,
    },
    "network": {
        "architecture": str,
        "hidden": int,
        "r_scaling": _parse_bool,
    },
    "training": {
        "method": str,
        "epsilon_prime": str,   # float or "auto"
        "seed": int,
        "max_epochs": int,
        "window": int,
        "tol": float,
        "learning_rate": float,
        "workers": int,
    },
    "output": {
        "dir": str,
    },
}


@dataclass
class RunConfig:
    """Resolved configuration; every field has its final value."""

    kind: str = "coulomb"
    Z: float = 1.0
    c: float = SPEED_OF_LIGHT_AU
    A: int = 16
    N: int = 8
    Zn: int = 8
    depth: float = -71.28
    asym: float = 0.462
    r0: float = 1.233
    a_diff: float = 0.615
    r0_ls: float = 1.144
    a_ls: float = 0.648
    lambda_n: float = 11.12
    mc2: float = NUCLEON_MC2_MEV
    hbarc: float = HBARC_MEV_FM
    kappa: int = -1
    n: int = 1
    kappa_list: list[int] = field(default_factory=lambda: [-1])
    n_fill: int = 8

    mesh_kind: str = ""         # default depends on system kind
    M: int = 0
    x0: float = -10.0
    r_max: float = 0.0

    architecture: str = "fully_connected"
    hidden: int = 16
    r_scaling: bool = True

    method: str = "inverse"
    epsilon_prime: float | None = None   # None = choose from the reference spectrum
    seed: int = 0
    max_epochs: int = 200_000
    window: int = 500
    tol: float | None = None             # None = unit-appropriate default
    learning_rate: float = 0.001
    workers: int = 1

    out_dir: str = "runs/out"

    def __post_init__(self):
        if self.kind not in ("coulomb", "woods_saxon"):
            raise ConfigError(f"system kind must be coulomb or woods_saxon, got {self.kind!r}")
        if not self.mesh_kind:
            self.mesh_kind = "log" if self.kind == "coulomb" else "uniform"
        if self.M == 0:
            self.M = 1700 if self.kind == "coulomb" else 2000
        if self.r_max == 0.0:
            self.r_max = 100.0 if self.kind == "coulomb" else 20.0
        if self.tol is None:
            # convergence-window spread: a.u. for coulomb, MeV for nuclear
            self.tol = 1e-9 if self.kind == "coulomb" else 1e-6

    # -- factories -----------------------------------------------------------
    def build_mesh(self) -> RadialMesh:
        if self.mesh_kind == "log":
            x_max = float(np.log(self.r_max + np.exp(self.x0)))
            return build_log_mesh(self.x0, x_max, self.M)
        if self.mesh_kind == "uniform":
            return build_uniform_mesh(self.r_max, self.M)
        raise ConfigError(f"mesh kind must be log or uniform, got {self.mesh_kind!r}")

    def potential_spec(self):
        if self.kind == "coulomb":
            return CoulombSpec(Z=self.Z, c=self.c)
        return WoodsSaxonSpec(
            A=self.A, N=self.N, Z=self.Zn, depth=self.depth, asym=self.asym,
            r0=self.r0, a=self.a_diff, r0_ls=self.r0_ls, a_ls=self.a_ls,
            lambda_n=self.lambda_n, mc2=self.mc2, hbarc=self.hbarc,
        )

    def as_dict(self) -> dict:
        d = {}
        for k, v in self.__dict__.items():
            d[k] = list(v) if isinstance(v, list) else v
        return d


_FIELD_MAP = {
    ("system", "kind"): "kind",
    ("system", "z"): "Z",
    ("system", "c"): "c",
    ("system", "a_count"): "A",
    ("system", "n_count"): "N",
    ("system", "z_count"): "Zn",
    ("system", "depth"): "depth",
    ("system", "asym"): "asym",
    ("system", "r0"): "r0",
    ("system", "a_diff"): "a_diff",
    ("system", "r0_ls"): "r0_ls",
    ("system", "a_ls"): "a_ls",
    ("system", "lambda_n"): "lambda_n",
    ("system", "mc2"): "mc2",
    ("system", "hbarc"): "hbarc",
    ("system", "kappa"): "kappa",
    ("system", "n"): "n",
    ("system", "kappa_list"): "kappa_list",
    ("system", "n_fill"): "n_fill",
    ("mesh", "kind"): "mesh_kind",
    ("mesh", "m"): "M",
    ("mesh", "x0"): "x0",
    ("mesh", "r_max"): "r_max",
    ("network", "architecture"): "architecture",
    ("network", "hidden"): "hidden",
    ("network", "r_scaling"): "r_scaling",
    ("training", "method"): "method",
    ("training", "epsilon_prime"): "epsilon_prime",
    ("training", "seed"): "seed",
    ("training", "max_epochs"): "max_epochs",
    ("training", "window"): "window",
    ("training", "tol"): "tol",
    ("training", "learning_rate"): "learning_rate",
    ("training", "workers"): "workers",
    ("output", "dir"): "out_dir",
}


def load_config(path) -> RunConfig:
    """Parse an INI config file, rejecting unknown sections or keys."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")

    values: dict[str, object] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        schema = _SCHEMA[section]
        for key, raw in parser.items(section):
            if key not in schema:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            conv = schema[key]
            try:
                if (section, key) == ("training", "epsilon_prime"):
                    values["epsilon_prime"] = (None if raw.strip().lower() == "auto"
                                               else float(raw))
                    continue
                values[_FIELD_MAP[(section, key)]] = conv(raw)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc
    return RunConfig(**values)


def write_template(path) -> None:
    Path(path).write_text(
        "[system]\n"
        "kind = coulomb\n"
        "z = 1.0\n"
        "c = 137.035999\n"
        "kappa = -1\n"
        "n = 1\n"
        "\n"
        "[mesh]\n"
        "kind = log\n"
        "m = 1700\n"
        "x0 = -10.0\n"
        "r_max = 20.0\n"
        "\n"
        "[network]\n"
        "architecture = fully_connected\n"
        "hidden = 16\n"
        "r_scaling = true\n"
        "\n"
        "[training]\n"
        "method = inverse\n"
        "epsilon_prime = -0.51\n"
        "seed = 0\n"
        "max_epochs = 200000\n"
        "window = 500\n"
        "tol = 1e-9\n"
        "learning_rate = 0.001\n"
        "workers = 1\n"
        "\n"
        "[output]\n"
        "dir = runs/hydrogen-1s\n"
    )
