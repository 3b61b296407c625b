"""Experiment manifests: the JSON configuration format of the CLI.

A manifest selects one of four experiment families (extract, scatter-verify,
teleclone, ghzw), carries its config payload, the seed, optional output
settings and the unit-convention flags. Validation is strict: unknown fields
are rejected and every error message names the offending field path, e.g.
``config.max_launches: expected a positive integer``. Parsed manifests
round-trip losslessly through ``to_dict``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "ManifestError",
    "Conventions",
    "ExtractConfig",
    "ScatterVerifyConfig",
    "TelecloneConfig",
    "GhzwConfig",
    "ExperimentManifest",
    "parse_manifest",
    "load_manifest",
    "manifest_hash",
]

EXPERIMENTS = ("extract", "scatter-verify", "teleclone", "ghzw")
EXTRACT_PRESETS = ("singlet", "aharonov", "five-center")


class ManifestError(ValueError):
    """Schema violation; ``field_path`` names the offending entry."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}" if field_path else message)


def _require_mapping(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ManifestError(path, "expected an object")
    return obj


def _reject_unknown(obj: dict, known: tuple[str, ...], path: str) -> None:
    for key in obj:
        if key not in known:
            where = f"{path}.{key}" if path else key
            raise ManifestError(where, "unknown field")


def _get_number(obj: dict, key: str, path: str, default=None, positive=False):
    if key not in obj:
        if default is None:
            raise ManifestError(f"{path}.{key}" if path else key, "required field missing")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ManifestError(f"{path}.{key}" if path else key, "expected a number")
    if positive and value <= 0:
        raise ManifestError(f"{path}.{key}" if path else key, "expected a positive number")
    return float(value)


def _get_int(obj: dict, key: str, path: str, default=None, minimum=None):
    if key not in obj:
        if default is None:
            raise ManifestError(f"{path}.{key}" if path else key, "required field missing")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ManifestError(f"{path}.{key}" if path else key, "expected an integer")
    if minimum is not None and value < minimum:
        raise ManifestError(f"{path}.{key}" if path else key, f"expected an integer >= {minimum}")
    return value


@dataclass(frozen=True)
class Conventions:
    """Unit-convention flags echoed into every output artifact.

    ``mass`` is the mobile particle's mass in hbar = 1 units;
    ``sigma_convention`` selects spin-1/2 matrices ("spin", the default) or
    bare Pauli matrices ("pauli") for the mobile spin operators.
    """

    mass: float = 1.0
    sigma_convention: str = "spin"

    @classmethod
    def parse(cls, obj: dict, path: str) -> "Conventions":
        _reject_unknown(obj, ("mass", "sigma_convention"), path)
        mass = _get_number(obj, "mass", path, default=1.0, positive=True)
        sigma = obj.get("sigma_convention", "spin")
        if sigma not in ("spin", "pauli"):
            raise ManifestError(f"{path}.sigma_convention", "expected 'spin' or 'pauli'")
        return cls(mass=mass, sigma_convention=sigma)

    def to_dict(self) -> dict:
        return {"mass": self.mass, "sigma_convention": self.sigma_convention}


@dataclass(frozen=True)
class ExtractConfig:
    """Extraction run: which preparation, coupling, and launch budget."""

    preset: str = "singlet"
    n_centers: int | None = None
    j: float = 2.0
    k: float = 1.0
    max_launches: int = 16
    monte_carlo_trials: int | None = None

    KNOWN = ("preset", "n_centers", "j", "k", "max_launches", "monte_carlo_trials")

    @classmethod
    def parse(cls, obj: dict, path: str) -> "ExtractConfig":
        _reject_unknown(obj, cls.KNOWN, path)
        preset = obj.get("preset", "singlet")
        if preset not in EXTRACT_PRESETS:
            raise ManifestError(f"{path}.preset", f"expected one of {EXTRACT_PRESETS}")
        n_centers = None
        if preset == "singlet":
            n_centers = _get_int(obj, "n_centers", path, minimum=2)
            if n_centers % 2:
                raise ManifestError(f"{path}.n_centers", "expected an even number of centers")
            if n_centers > 12:
                raise ManifestError(f"{path}.n_centers", "size guardrail: at most 12 centers")
        elif "n_centers" in obj:
            raise ManifestError(f"{path}.n_centers", f"not applicable to preset '{preset}'")
        trials = None
        if "monte_carlo_trials" in obj:
            trials = _get_int(obj, "monte_carlo_trials", path, minimum=1)
        return cls(
            preset=preset,
            n_centers=n_centers,
            j=_get_number(obj, "j", path, default=2.0),
            k=_get_number(obj, "k", path, default=1.0, positive=True),
            max_launches=_get_int(obj, "max_launches", path, default=16, minimum=1),
            monte_carlo_trials=trials,
        )

    def to_dict(self) -> dict:
        out = {
            "preset": self.preset,
            "j": self.j,
            "k": self.k,
            "max_launches": self.max_launches,
        }
        if self.n_centers is not None:
            out["n_centers"] = self.n_centers
        if self.monte_carlo_trials is not None:
            out["monte_carlo_trials"] = self.monte_carlo_trials
        return out


@dataclass(frozen=True)
class ScatterVerifyConfig:
    """Compare the exact and effective solvers for one geometry."""

    register: tuple[float, ...] = (0.5, 0.5)
    j: float = 2.0
    k: float = 1.0
    model: str = "heisenberg"
    q: tuple[int, ...] | None = None
    positions: tuple[float, ...] | None = None

    KNOWN = ("register", "j", "k", "model", "q", "positions")

    @classmethod
    def parse(cls, obj: dict, path: str) -> "ScatterVerifyConfig":
        _reject_unknown(obj, cls.KNOWN, path)
        register = obj.get("register", [0.5, 0.5])
        if not isinstance(register, list) or not register:
            raise ManifestError(f"{path}.register", "expected a non-empty list of spins")
        for i, s in enumerate(register):
            if isinstance(s, bool) or not isinstance(s, (int, float)):
                raise ManifestError(f"{path}.register[{i}]", "expected a number")
            if round(2 * s) != 2 * s or not 0.5 <= s <= 3:
                raise ManifestError(
                    f"{path}.register[{i}]", "expected a (half-)integer spin in 0.5..3"
                )
        model = obj.get("model", "heisenberg")
        if model not in ("heisenberg", "xy"):
            raise ManifestError(f"{path}.model", "expected 'heisenberg' or 'xy'")
        q = None
        positions = None
        if "q" in obj and "positions" in obj:
            raise ManifestError(f"{path}.q", "give either q or positions, not both")
        if "positions" in obj:
            raw = obj["positions"]
            if not isinstance(raw, list) or len(raw) != len(register):
                raise ManifestError(f"{path}.positions", "expected one position per center")
            for i, x in enumerate(raw):
                if isinstance(x, bool) or not isinstance(x, (int, float)):
                    raise ManifestError(f"{path}.positions[{i}]", "expected a number")
            positions = tuple(float(x) for x in raw)
        else:
            raw = obj.get("q", [1] * (len(register) - 1))
            if not isinstance(raw, list) or len(raw) != len(register) - 1:
                raise ManifestError(f"{path}.q", "expected one integer per gap")
            for i, v in enumerate(raw):
                if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                    raise ManifestError(f"{path}.q[{i}]", "expected a positive integer")
            q = tuple(raw)
        return cls(
            register=tuple(float(s) for s in register),
            j=_get_number(obj, "j", path, default=2.0),
            k=_get_number(obj, "k", path, default=1.0, positive=True),
            model=model,
            q=q,
            positions=positions,
        )

    def to_dict(self) -> dict:
        out = {
            "register": list(self.register),
            "j": self.j,
            "k": self.k,
            "model": self.model,
        }
        if self.positions is not None:
            out["positions"] = list(self.positions)
        elif self.q is not None:
            out["q"] = list(self.q)
        return out


@dataclass(frozen=True)
class TelecloneConfig:
    """Telecloning run: clone count and the Haar sample budget."""

    n: int = 2
    samples: int = 100
    input_state: tuple[complex, complex] | None = None  # (alpha, beta)

    KNOWN = ("n", "samples", "input_state")

    @classmethod
    def parse(cls, obj: dict, path: str) -> "TelecloneConfig":
        _reject_unknown(obj, cls.KNOWN, path)
        n = _get_int(obj, "n", path, default=2, minimum=1)
        if n > 6:
            raise ManifestError(f"{path}.n", "size guardrail: at most 6 clones")
        input_state = None
        if "input_state" in obj:
            raw = _require_mapping(obj["input_state"], f"{path}.input_state")
            _reject_unknown(raw, ("alpha", "beta"), f"{path}.input_state")
            parts = {}
            for name in ("alpha", "beta"):
                pair = raw.get(name)
                if (
                    not isinstance(pair, list)
                    or len(pair) != 2
                    or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in pair)
                ):
                    raise ManifestError(
                        f"{path}.input_state.{name}", "expected [real, imaginary]"
                    )
                parts[name] = complex(pair[0], pair[1])
            norm = abs(parts["alpha"]) ** 2 + abs(parts["beta"]) ** 2
            if abs(norm - 1) > 1e-9:
                raise ManifestError(f"{path}.input_state", "amplitudes must be normalized")
            input_state = (parts["alpha"], parts["beta"])
        return cls(
            n=n,
            samples=_get_int(obj, "samples", path, default=100, minimum=1),
            input_state=input_state,
        )

    def to_dict(self) -> dict:
        out = {"n": self.n, "samples": self.samples}
        if self.input_state is not None:
            alpha, beta = self.input_state
            out["input_state"] = {
                "alpha": [alpha.real, alpha.imag],
                "beta": [beta.real, beta.imag],
            }
        return out


@dataclass(frozen=True)
class GhzwConfig:
    """GHZ/W branch analysis; no tunables."""

    KNOWN = ()

    @classmethod
    def parse(cls, obj: dict, path: str) -> "GhzwConfig":
        _reject_unknown(obj, cls.KNOWN, path)
        return cls()

    def to_dict(self) -> dict:
        return {}


_CONFIG_TYPES = {
    "extract": ExtractConfig,
    "scatter-verify": ScatterVerifyConfig,
    "teleclone": TelecloneConfig,
    "ghzw": GhzwConfig,
}


@dataclass(frozen=True)
class ExperimentManifest:
    experiment: str
    config: ExtractConfig | ScatterVerifyConfig | TelecloneConfig | GhzwConfig
    seed: int = 0
    output_dir: str | None = None
    conventions: Conventions = field(default_factory=Conventions)

    def to_dict(self) -> dict:
        out = {
            "experiment": self.experiment,
            "seed": self.seed,
            "conventions": self.conventions.to_dict(),
            "config": self.config.to_dict(),
        }
        if self.output_dir is not None:
            out["output_dir"] = self.output_dir
        return out


def parse_manifest(obj: dict) -> ExperimentManifest:
    _require_mapping(obj, "")
    _reject_unknown(obj, ("experiment", "config", "seed", "output_dir", "conventions"), "")
    experiment = obj.get("experiment")
    if experiment is None:
        raise ManifestError("experiment", "required field missing")
    if experiment not in EXPERIMENTS:
        raise ManifestError("experiment", f"expected one of {EXPERIMENTS}")
    seed = _get_int(obj, "seed", "", default=0, minimum=0)
    output_dir = obj.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ManifestError("output_dir", "expected a string")
    conventions = Conventions.parse(
        _require_mapping(obj.get("conventions", {}), "conventions"), "conventions"
    )
    config = _CONFIG_TYPES[experiment].parse(
        _require_mapping(obj.get("config", {}), "config"), "config"
    )
    return ExperimentManifest(
        experiment=experiment,
        config=config,
        seed=seed,
        output_dir=output_dir,
        conventions=conventions,
    )


def load_manifest(path: str | Path) -> ExperimentManifest:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ManifestError("", f"cannot read manifest: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError("", f"manifest is not valid JSON: {exc}") from exc
    return parse_manifest(obj)


def manifest_hash(manifest: ExperimentManifest) -> str:
    """Stable hash of the resolved manifest (defaults filled in)."""
    canonical = json.dumps(manifest.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]
