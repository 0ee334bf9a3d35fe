"""Per-room simulation: RIRs for every (speaker, mic) pair and the received signals."""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from ..exceptions import DirectionalTransducerUnsupported, MixedMaterialsUnsupported, ValidationError
from ..scene.directivity import Directivity, Transducer
from .filterbank import OctaveFilterBank
from .ism import enumerate_images_general, enumerate_images_shoebox
from .raytracing import trace_rays
from .rir import bands_for_rate, synthesize_rir

HYBRID_ISM_ORDER = 2


@dataclass
class SimulationResult:
    rirs: dict = field(default_factory=dict)  # (speaker_id, mic_id) -> Rir
    received: dict = field(default_factory=dict)  # (speaker_id, mic_id) -> ndarray at mic rate
    mic_rate: float = 0.0
    sim_rate: float = 0.0


def _as_mic(m, i, mic_rate):
    if isinstance(m, Transducer):
        return m
    return Transducer("microphone", np.asarray(m, float), Directivity(), int(mic_rate), id=f"{i}")


def check_capabilities(room, speakers, mics, mode, experimental=False, bands=None):
    """Reject configurations the chosen propagation model cannot represent."""
    directional_spk = any(not s.directivity.is_omni for s in speakers)
    directional_mic = any(not m.directivity.is_omni for m in mics)
    uniform = room.has_uniform_material(bands) if bands else room.has_uniform_material()
    if mode == "hybrid":
        if not uniform:
            raise MixedMaterialsUnsupported("ray tracing needs one material on every surface")
        if directional_spk or directional_mic:
            raise DirectionalTransducerUnsupported("ray tracing supports omnidirectional devices only")
    elif mode == "ism":
        if not room.is_shoebox:
            if directional_spk:
                raise DirectionalTransducerUnsupported(
                    "speaker directivity is not supported for non-shoebox image sources"
                )
            if not uniform and not experimental:
                raise MixedMaterialsUnsupported(
                    "different surface materials in non-shoebox rooms need simulation.experimental"
                )
    else:
        raise ValidationError(f"unknown mode {mode!r}", "simulation.mode")


def simulate_room(room, speakers, mic_positions, sim_rate=250_000, mode="ism", max_order=None,
                  seed=0, mic_rate=None, capture_s=0.1, air_absorption=True, n_rays=10_000,
                  experimental=False, ray_seeds=None):
    """Simulate every (speaker, microphone) pair of one room.

    Speakers emit one after another, so each received signal holds a single
    anchor's transmission. Speakers whose ``emitted_signal`` attribute is
    tagged ``"interferer"`` are instead added to every anchor reception.

    ``speakers`` is a list of ``(Transducer, signal)`` pairs, ``signal`` being
    sampled at ``sim_rate``.
    """
    from ..signal.resample import resample

    if mic_rate is None:
        mic_rate = sim_rate
    if mic_rate > sim_rate:
        raise ValidationError("microphone rate exceeds simulation rate", "transducers.mic_rate")
    mics = [_as_mic(m, i, mic_rate) for i, m in enumerate(mic_positions)]
    spk = [s for s, _ in speakers]
    bands = bands_for_rate(sim_rate)
    check_capabilities(room, spk, mics, mode, experimental, bands)
    if max_order is None:
        max_order = room.max_order_hint if room.max_order_hint is not None else 10
    for t in spk + mics:
        if not room.contains(t.position[None, :])[0]:
            raise ValidationError(f"{t.kind} {t.id} at {t.position.tolist()} is not inside the room")

    fb = OctaveFilterBank(sim_rate, bands)
    n_cap = int(round(capture_s * sim_rate))
    ism_order = min(max_order, HYBRID_ISM_ORDER) if mode == "hybrid" else max_order
    result = SimulationResult(mic_rate=float(mic_rate), sim_rate=float(sim_rate))

    interferers = {}
    for si, (s, signal) in enumerate(speakers):
        images = enumerate_images_shoebox(room, s.position, ism_order, bands) if room.is_shoebox else None
        for mi, m in enumerate(mics):
            imgs = images if images is not None else enumerate_images_general(
                room, s.position, m.position, ism_order, bands
            )
            tail, rseed = None, None
            if mode == "hybrid":
                rseed = ray_seeds[(si, mi)] if ray_seeds is not None else [seed, si, mi]
                hist = trace_rays(room, s, m, n_rays, rseed, sim_rate, bands=bands,
                                  air_absorption=air_absorption)
                d_max = np.max(np.linalg.norm(imgs.positions - m.position, axis=1)) if len(imgs) else 0.0
                tail = hist.after(d_max / room.sound_speed)
            rir = synthesize_rir(
                imgs, m, s, room.environment, sim_rate, ray_tail=tail, air_absorption=air_absorption,
                bands=bands, filterbank=fb, source_id=s.id, mic_id=m.id,
                tail_seed=[*np.atleast_1d(rseed).tolist(), 1] if tail is not None else 0,
            )
            rx = fftconvolve(np.asarray(signal, float), rir.samples)
            rx = np.pad(rx, (0, max(0, n_cap - len(rx))))[:n_cap]
            if s.emitted_signal == "interferer":
                interferers[(s.id, m.id)] = rx
                continue
            result.rirs[(s.id, m.id)] = rir
            result.received[(s.id, m.id)] = rx

    for (sid, mid), rx in list(result.received.items()):
        total = rx.copy()
        for (iid, imid), irx in interferers.items():
            if imid == mid:
                total += irx
        result.received[(sid, mid)] = resample(total, sim_rate, mic_rate)
    return result
