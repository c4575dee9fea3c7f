"""Experiment configuration: INI documents, one flat section per module.

The grammar is strict: every key is typed, unknown sections or keys are
errors (not warnings), and parse failures carry the line they came from.
``parse_config`` returns an :class:`ExperimentSpec` holding both the
canonical key/value view (used for echoing and round-trips) and the built
runtime configuration for the requested experiment kind.
"""

from __future__ import annotations

import configparser
import io
import os
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .core import Grid1D, MaterialModel, SimulationConfig, validate_config
from .sources import CallbackSource, GaussianSpikeSource, LogisticBeamSource
from .spike import SpikeConfig, SpikeMaterial

KINDS = ("cartesian-1d", "lumped", "thermal-spike", "convergence", "instability-sweep")

_NAME_RE = re.compile(r"^[A-Za-z0-9._-]+$")


class SpecError(ValueError):
    """Schema violation in an experiment document (names the bad key)."""


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ValueError(f"invalid float {text!r}") from exc


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ValueError(f"invalid integer {text!r}") from exc


def _str(text: str) -> str:
    return text.strip()


def _boundary(text: str):
    text = text.strip()
    if text == "insulated":
        return text
    try:
        return float(text)
    except ValueError as exc:
        raise ValueError(f"expected 'insulated' or a temperature, got {text!r}") from exc


def _choice(*options: str):
    def convert(text: str) -> str:
        text = text.strip()
        if text not in options:
            raise ValueError(f"expected one of {options}, got {text!r}")
        return text

    return convert


_REQUIRED = object()

_MATERIAL_KEYS = {
    "base_capacity": (_float, 1.0),
    "conductivity": (_float, _REQUIRED),
    "latent_heat": (_float, 0.0),
    "transition_temp": (_float, _REQUIRED),
    "smoothing_width": (_float, _REQUIRED),
}

_CARTESIAN_SECTIONS = {
    "grid": {
        "n_x": (_int, _REQUIRED),
        "t_max": (_float, _REQUIRED),
        "n_t": (_int, _REQUIRED),
    },
    "material": _MATERIAL_KEYS,
    "source": {
        "type": (_choice("logistic", "none"), "logistic"),
        "amplitude": (_float, 0.0),
        "x_edge": (_float, 0.07),
        "t_edge": (_float, 1.0),
        "steepness_x": (_float, 100.0),
        "steepness_t": (_float, 100.0),
    },
    "scheme": {
        "gamma": (_float, 0.5),
        "initial_temp": (_float, 1.0),
        "cosine_amp": (_float, 0.0),
        "cosine_mode": (_int, 1),
        "left_boundary": (_boundary, "insulated"),
        "capacity_iterations": (_int, 0),
        "store_stride": (_int, 0),
    },
}

SCHEMAS: dict[str, dict[str, dict]] = {
    "cartesian-1d": _CARTESIAN_SECTIONS,
    "lumped": {
        "material": _MATERIAL_KEYS,
        "source": {
            "type": (_choice("constant", "logistic_time", "ramp"), _REQUIRED),
            "power": (_float, 0.0),
            "amplitude": (_float, 0.0),
            "t_edge": (_float, 1.0),
            "steepness_t": (_float, 100.0),
            "base": (_float, 0.0),
            "slope": (_float, 0.0),
        },
        "run": {
            "t_max": (_float, _REQUIRED),
            "n_steps": (_int, 1000),
            "band": (_float, 2.0),
            "initial_temp": (_float, 1.0),
        },
    },
    "thermal-spike": {
        "grid": {
            "n_r": (_int, _REQUIRED),
            "r_max": (_float, 1.0),
            "t_max": (_float, _REQUIRED),
            "n_t": (_int, _REQUIRED),
        },
        "electrons": {
            "capacity": (_float, _REQUIRED),
            "conductivity": (_float, _REQUIRED),
        },
        "lattice": _MATERIAL_KEYS,
        "coupling": {
            "density": (_float, 1.0),
            "coupling": (_float, _REQUIRED),
        },
        "source": {
            "type": (_choice("gaussian_spike", "none"), "gaussian_spike"),
            "total_energy": (_float, 0.0),
            "radius": (_float, 0.1),
            "center_time": (_float, 0.0),
            "duration": (_float, 0.001),
        },
        "scheme": {
            "gamma": (_float, 0.5),
            "ambient_temp": (_float, 1.0),
            "store_stride": (_int, 0),
        },
    },
    "convergence": {
        **_CARTESIAN_SECTIONS,
        "convergence": {
            "levels": (_int, 3),
            "refine": (_int, 2),
            "reference": (_choice("fine", "cosine"), "fine"),
        },
    },
    "instability-sweep": {
        **_CARTESIAN_SECTIONS,
        "instability": {
            "epsilon_rel": (_float, 0.005),
            "threshold": (_float, 10.0),
        },
    },
}

_EXPERIMENT_KEYS = {
    "name": (_str, _REQUIRED),
    "kind": (_choice(*KINDS), _REQUIRED),
    "output_dir": (_str, ""),
}


@dataclass(frozen=True)
class LumpedExperiment:
    """Declarative uniform-model run; ``q_of_t`` builds the drive."""

    material: MaterialModel
    source_type: str
    params: dict
    t_max: float
    n_steps: int
    band: float
    initial_temp: float

    def q_of_t(self):
        p = self.params
        if self.source_type == "constant":
            level = p["power"]
            return lambda t: np.full_like(np.asarray(t, dtype=float), level)
        if self.source_type == "ramp":
            base, slope = p["base"], p["slope"]
            return lambda t: base + slope * np.asarray(t, dtype=float)
        amp, edge, mu = p["amplitude"], p["t_edge"], p["steepness_t"]

        def logistic_pulse(t):
            arg = np.clip(mu * (np.asarray(t, dtype=float) - edge), -700.0, 700.0)
            return amp / (1.0 + np.exp(arg))

        return logistic_pulse


@dataclass(frozen=True)
class ConvergenceExperiment:
    base: SimulationConfig
    levels: int
    refine: int
    reference: str


@dataclass(frozen=True)
class InstabilityExperiment:
    base: SimulationConfig
    epsilon_rel: float
    threshold: float


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully validated experiment: canonical key/value view plus the
    built runtime config (the latter excluded from equality)."""

    name: str
    kind: str
    output_dir: str
    sections: dict
    config: object = field(compare=False, repr=False)


def _read_document(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise SpecError(f"parse error: {exc}") from exc
    return parser


def _convert_section(kind_schema: dict, section: str, raw: dict) -> dict:
    schema = kind_schema[section]
    out = {}
    for key, value in raw.items():
        if key not in schema:
            raise SpecError(f"unknown key {key!r} in [{section}]")
        converter, _ = schema[key]
        try:
            out[key] = converter(value)
        except ValueError as exc:
            raise SpecError(f"key {key!r} in [{section}]: {exc}") from exc
    for key, (converter, default) in schema.items():
        if key in out:
            continue
        if default is _REQUIRED:
            raise SpecError(f"missing required key {key!r} in [{section}]")
        out[key] = default
    return out


def _build_material(values: dict) -> MaterialModel:
    return MaterialModel(
        base_capacity=values["base_capacity"],
        conductivity=values["conductivity"],
        latent_heat=values["latent_heat"],
        transition_temp=values["transition_temp"],
        smoothing_width=values["smoothing_width"],
    )


def _build_cartesian(sections: dict) -> SimulationConfig:
    g = sections["grid"]
    s = sections["source"]
    sch = sections["scheme"]
    if s["type"] == "none":
        source = CallbackSource(lambda x, t: np.zeros_like(np.asarray(x, dtype=float)))
    else:
        source = LogisticBeamSource(
            amplitude=s["amplitude"],
            x_edge=s["x_edge"],
            t_edge=s["t_edge"],
            steepness_x=s["steepness_x"],
            steepness_t=s["steepness_t"],
        )
    cfg = SimulationConfig(
        grid_x=Grid1D(g["n_x"], 1.0),
        grid_t=Grid1D(g["n_t"], g["t_max"]),
        material=_build_material(sections["material"]),
        source=source,
        gamma=sch["gamma"],
        initial_temp=sch["initial_temp"],
        cosine_amp=sch["cosine_amp"],
        cosine_mode=sch["cosine_mode"],
        left_boundary=sch["left_boundary"],
        capacity_iterations=sch["capacity_iterations"],
        store_stride=sch["store_stride"] or None,
    )
    return validate_config(cfg)


def _build_spike(sections: dict) -> SpikeConfig:
    g = sections["grid"]
    el = sections["electrons"]
    s = sections["source"]
    sch = sections["scheme"]
    lattice = _build_material(sections["lattice"])
    material = SpikeMaterial.from_constants(
        density=sections["coupling"]["density"],
        coupling=sections["coupling"]["coupling"],
        electron_capacity=el["capacity"],
        electron_conductivity=el["conductivity"],
        lattice=lattice,
    )
    if s["type"] == "none":
        source = CallbackSource(lambda r, t: np.zeros_like(np.asarray(r, dtype=float)))
    else:
        source = GaussianSpikeSource(
            total_energy=s["total_energy"],
            radius=s["radius"],
            center_time=s["center_time"],
            duration=s["duration"],
        )
    cfg = SpikeConfig(
        radial_grid=Grid1D(g["n_r"], g["r_max"]),
        grid_t=Grid1D(g["n_t"], g["t_max"]),
        material=material,
        source=source,
        gamma=sch["gamma"],
        ambient_temp=sch["ambient_temp"],
        store_stride=sch["store_stride"] or None,
    )
    problems = cfg.check()
    if problems:
        raise SpecError("; ".join(problems))
    return cfg


def _build_lumped(sections: dict) -> LumpedExperiment:
    run = sections["run"]
    src = sections["source"]
    return LumpedExperiment(
        material=_build_material(sections["material"]),
        source_type=src["type"],
        params=dict(src),
        t_max=run["t_max"],
        n_steps=run["n_steps"],
        band=run["band"],
        initial_temp=run["initial_temp"],
    )


def parse_config(text: str) -> ExperimentSpec:
    """Validate a config document and build its runtime configuration."""
    parser = _read_document(text)
    if not parser.has_section("experiment"):
        raise SpecError("kind missing: no [experiment] section")
    exp_raw = dict(parser["experiment"])
    if "kind" not in exp_raw:
        raise SpecError("kind missing in [experiment]")
    exp = _convert_section({"experiment": _EXPERIMENT_KEYS}, "experiment", exp_raw)
    if not _NAME_RE.match(exp["name"]):
        raise SpecError(f"experiment name {exp['name']!r} is not filesystem-safe")

    kind = exp["kind"]
    schema = SCHEMAS[kind]
    sections: dict[str, dict] = {"experiment": exp}
    for section in parser.sections():
        if section == "experiment":
            continue
        if section not in schema:
            raise SpecError(f"unknown section [{section}] for kind {kind!r}")
    for section in schema:
        raw = dict(parser[section]) if parser.has_section(section) else {}
        sections[section] = _convert_section(schema, section, raw)

    if kind == "cartesian-1d":
        config: object = _build_cartesian(sections)
    elif kind == "convergence":
        conv = sections["convergence"]
        base = _build_cartesian(sections)
        if conv["reference"] == "cosine" and (
            base.material.latent_heat != 0.0 or base.cosine_amp == 0.0
        ):
            raise SpecError(
                "reference 'cosine' needs latent_heat = 0 and a cosine perturbation"
            )
        config = ConvergenceExperiment(
            base=base, levels=conv["levels"], refine=conv["refine"],
            reference=conv["reference"],
        )
    elif kind == "instability-sweep":
        inst = sections["instability"]
        config = InstabilityExperiment(
            base=_build_cartesian(sections),
            epsilon_rel=inst["epsilon_rel"],
            threshold=inst["threshold"],
        )
    elif kind == "lumped":
        config = _build_lumped(sections)
    else:
        config = _build_spike(sections)

    return ExperimentSpec(
        name=exp["name"],
        kind=kind,
        output_dir=exp["output_dir"],
        sections=sections,
        config=config,
    )


def emit_config(spec: ExperimentSpec) -> str:
    """Deterministic INI echo of a spec; parse(emit(spec)) == spec."""
    parser = configparser.ConfigParser(interpolation=None)
    order = ["experiment"] + [s for s in SCHEMAS[spec.kind] if s in spec.sections]
    for section in order:
        values = spec.sections[section]
        parser[section] = {}
        schema = _EXPERIMENT_KEYS if section == "experiment" else SCHEMAS[spec.kind][section]
        for key in schema:
            value = values[key]
            if isinstance(value, float):
                parser[section][key] = repr(value)
            else:
                parser[section][key] = str(value)
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def load_spec(path_or_name: str) -> ExperimentSpec:
    """Load a spec from a file path, or by bare name from the bundled set."""
    if os.path.exists(path_or_name):
        with open(path_or_name, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    name = path_or_name.removesuffix(".ini")
    try:
        text = (
            resources.files("phasefront").joinpath("specs", f"{name}.ini").read_text("utf-8")
        )
    except FileNotFoundError as exc:
        raise SpecError(
            f"no such file and no bundled spec named {path_or_name!r}"
        ) from exc
    return parse_config(text)


def bundled_spec_names() -> list[str]:
    out = []
    for item in resources.files("phasefront").joinpath("specs").iterdir():
        if item.name.endswith(".ini"):
            out.append(item.name[:-4])
    return sorted(out)
