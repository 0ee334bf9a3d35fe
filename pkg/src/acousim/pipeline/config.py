"""Single-file run configuration.

A TOML file with sections ``[room] [materials] [environment] [transducers]
[signal] [positions] [simulation] [postprocess] [positioning] [evaluation]
[run]``. Unknown keys are rejected; every error carries the dotted path of
the offending field.
"""

import math
from pathlib import Path
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import tomli
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from ..exceptions import ParseError, UnknownKey, ValidationError
from ..positioning.solvers import METHODS
from ..scene.directivity import PATTERNS, Directivity, Transducer
from ..scene.materials import get_material
from ..scene.room import Environment, RoomSpec, validate_room
from ..signal.chirp import ChirpSpec

Vec3 = Tuple[float, float, float]
MaterialSpec = Union[str, float, Dict[str, Union[str, float, List[float]]]]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RoomConfig(_Section):
    floor_vertices: Optional[List[Tuple[float, float]]] = None
    dimensions: Optional[Vec3] = None
    height: Optional[float] = None
    rt60_target: Optional[float] = None

    @model_validator(mode="after")
    def _shape(self):
        if (self.floor_vertices is None) == (self.dimensions is None):
            raise ValueError("give exactly one of floor_vertices or dimensions")
        if self.floor_vertices is not None and self.height is None:
            raise ValueError("height is required with floor_vertices")
        if self.dimensions is not None and self.height is not None:
            raise ValueError("height is part of dimensions")
        return self

    def vertices_and_height(self):
        if self.dimensions is not None:
            lx, ly, lz = self.dimensions
            return [(0.0, 0.0), (lx, 0.0), (lx, ly), (0.0, ly)], lz
        return [tuple(v) for v in self.floor_vertices], self.height


class MaterialsConfig(_Section):
    default: Optional[MaterialSpec] = None
    surfaces: Dict[str, MaterialSpec] = Field(default_factory=dict)


class EnvironmentConfig(_Section):
    temperature_c: float = 20.0
    relative_humidity: float = 0.5


class SpeakerConfig(_Section):
    position: Vec3
    pattern: Union[str, float] = "omni"
    aim: Optional[Union[Literal["center"], Vec3]] = None
    role: Literal["anchor", "interferer"] = "anchor"

    @field_validator("pattern")
    @classmethod
    def _pattern(cls, v):
        if isinstance(v, str) and v not in PATTERNS:
            raise ValueError(f"unknown pattern {v!r}; choose from {sorted(PATTERNS)}")
        if not isinstance(v, str) and not 0.0 <= v <= 1.0:
            raise ValueError("pattern parameter must lie in [0, 1]")
        return v


class MicrophoneConfig(_Section):
    pattern: Union[str, float] = "omni"
    aim: Optional[Vec3] = None
    sample_rate_hz: int = Field(250_000, gt=0)

    _pattern = field_validator("pattern")(SpeakerConfig._pattern.__func__)


class TransducersConfig(_Section):
    speakers: List[SpeakerConfig]
    microphone: MicrophoneConfig = MicrophoneConfig()

    @field_validator("speakers")
    @classmethod
    def _anchors(cls, v):
        if sum(s.role == "anchor" for s in v) < 1:
            raise ValueError("at least one anchor speaker is required")
        return v


class SignalConfig(_Section):
    f_start: float = 45_000.0
    f_end: float = 25_000.0
    duration: float = Field(0.03, gt=0)
    amplitude: float = Field(1.0, gt=0)


class PositionsConfig(_Section):
    spacing: float = Field(1.0, gt=0)
    margin: float = Field(0.5, ge=0)
    n_cloud: int = Field(0, ge=0)
    ratios: Tuple[float, float] = (0.8, 0.2)
    seed: Optional[int] = None
    test_subset: Optional[int] = Field(None, ge=1)

    @field_validator("ratios")
    @classmethod
    def _ratios(cls, v):
        if min(v) < 0 or not math.isclose(sum(v), 1.0, abs_tol=1e-9):
            raise ValueError("train/dev ratios must be non-negative and sum to 1")
        return v


class SimulationConfig(_Section):
    mode: Literal["ism", "hybrid"] = "ism"
    max_order: Optional[int] = Field(None, ge=0)
    sim_rate: int = Field(250_000, gt=0)
    n_rays: int = Field(10_000, ge=1)
    capture_s: float = Field(0.1, gt=0)
    air_absorption: bool = True
    experimental: bool = False


class InterfererConfig(_Section):
    f_start: float
    f_end: float
    duration: float
    delay_s: float = 0.0


class PostprocessConfig(_Section):
    snr_db: Union[float, List[float], None] = 30.0
    sir_db: Optional[float] = None
    interferer: Optional[InterfererConfig] = None
    monte_carlo_runs: int = Field(1, ge=1)
    envelope_cutoff_hz: float = Field(5_000.0, gt=0)
    fixed_length: int = Field(1000, ge=2)
    one_bit: bool = False
    agc: bool = False

    @model_validator(mode="after")
    def _sir(self):
        if self.sir_db is not None and self.interferer is None:
            raise ValueError("sir_db requires an interferer")
        return self

    @property
    def snr_list(self):
        if self.snr_db is None:
            return [math.inf]
        return list(self.snr_db) if isinstance(self.snr_db, list) else [self.snr_db]


class PositioningConfig(_Section):
    methods: List[Literal[METHODS]] = list(METHODS)
    tof_mode: Literal["max", "prominence"] = "max"
    min_prominence: float = Field(0.3, gt=0, le=1)
    interpolate: bool = False


class EvaluationConfig(_Section):
    percentiles: List[Annotated[float, Field(ge=0, le=100)]] = [50.0, 90.0, 95.0]
    error_map: bool = True


class RunConfig(_Section):
    workers: int = Field(1, ge=1)
    out: str = "out"
    seed: int = 0


class PipelineConfig(_Section):
    room: RoomConfig
    materials: MaterialsConfig = MaterialsConfig()
    environment: EnvironmentConfig = EnvironmentConfig()
    transducers: TransducersConfig
    signal: SignalConfig = SignalConfig()
    positions: PositionsConfig = PositionsConfig()
    simulation: SimulationConfig = SimulationConfig()
    postprocess: PostprocessConfig = PostprocessConfig()
    positioning: PositioningConfig = PositioningConfig()
    evaluation: EvaluationConfig = EvaluationConfig()
    run: RunConfig = RunConfig()

    def section(self, name):
        return getattr(self, name).model_dump(mode="json")

    def with_overrides(self, **sections):
        """Copy with some fields replaced, e.g. ``postprocess={"snr_db": 10}``."""
        data = self.model_dump(mode="json")
        for name, values in sections.items():
            data[name] = {**data[name], **values}
        return parse_config(data)


def _path(loc):
    return ".".join(str(p) for p in loc)


def parse_config(data):
    """Validate a plain mapping into a :class:`PipelineConfig`."""
    try:
        cfg = PipelineConfig.model_validate(data)
    except PydanticValidationError as exc:
        err = exc.errors()[0]
        path = _path(err["loc"])
        if err["type"] == "extra_forbidden":
            raise UnknownKey("unknown key", path) from None
        raise ValidationError(err["msg"], path) from None
    room = build_room(cfg)
    speakers = build_speakers(cfg, room)
    from ..propagation.simulate import check_capabilities
    from ..propagation.rir import bands_for_rate
    from ..signal.chirp import generate_chirp

    generate_chirp(chirp_spec(cfg), cfg.simulation.sim_rate)
    mics = build_mics(cfg, room, [room_center(room)])
    check_capabilities(room, speakers, mics, cfg.simulation.mode, cfg.simulation.experimental,
                       bands_for_rate(cfg.simulation.sim_rate))
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return parse_config(data)


# domain objects --------------------------------------------------------------

def build_room(cfg):
    verts, height = cfg.room.vertices_and_height()
    n = len(verts)
    names = [f"wall{i}" for i in range(n)] + ["floor", "ceiling"]
    mats = cfg.materials
    if cfg.room.rt60_target is not None:
        if mats.default is not None or mats.surfaces:
            raise ValidationError("use either rt60_target or materials, not both", "materials")
        materials = None
    else:
        unknown = sorted(set(mats.surfaces) - set(names))
        if unknown:
            raise UnknownKey(f"no surface named {unknown[0]!r}; surfaces are {names}", "materials.surfaces")
        default = "hard_surface" if mats.default is None else mats.default
        materials = {}
        for name in names:
            spec = mats.surfaces.get(name, default)
            try:
                materials[name] = get_material(spec)
            except ValidationError as exc:
                raise ValidationError(str(exc), f"materials.surfaces.{name}") from None
    env = Environment(cfg.environment.temperature_c, cfg.environment.relative_humidity)
    spec = RoomSpec(np.asarray(verts, float), float(height), materials, cfg.room.rt60_target, env)
    return validate_room(spec)


def room_center(room):
    lo, hi = room.bbox
    return 0.5 * (np.asarray(lo) + np.asarray(hi))


def _directivity(pattern, aim, position, room, path):
    if aim is None:
        p = PATTERNS[pattern] if isinstance(pattern, str) else float(pattern)
        if p < 1.0:
            raise ValidationError("directional pattern needs an aim", path)
        return Directivity()
    if isinstance(aim, str):
        return Directivity.aimed(pattern, position, room_center(room))
    return Directivity.from_pattern(pattern, np.asarray(aim, float) / np.linalg.norm(aim))


def build_speakers(cfg, room):
    out = []
    for i, s in enumerate(cfg.transducers.speakers):
        pos = np.asarray(s.position, float)
        if not room.contains(pos[None, :])[0]:
            raise ValidationError(f"speaker at {list(s.position)} is not inside the room",
                                  f"transducers.speakers.{i}.position")
        d = _directivity(s.pattern, s.aim, pos, room, f"transducers.speakers.{i}.aim")
        out.append(Transducer("speaker", pos, d, emitted_signal="interferer" if s.role == "interferer" else "chirp",
                              id=str(i)))
    mic = cfg.transducers.microphone
    if mic.sample_rate_hz > cfg.simulation.sim_rate:
        raise ValidationError("microphone rate exceeds simulation rate", "transducers.microphone.sample_rate_hz")
    return out


def build_mics(cfg, room, positions):
    mic = cfg.transducers.microphone
    out = []
    for i, p in enumerate(positions):
        d = _directivity(mic.pattern, mic.aim, p, room, "transducers.microphone.aim")
        out.append(Transducer("microphone", np.asarray(p, float), d, mic.sample_rate_hz, id=str(i)))
    return out


def chirp_spec(cfg):
    s = cfg.signal
    return ChirpSpec(s.f_start, s.f_end, s.duration, s.amplitude)
