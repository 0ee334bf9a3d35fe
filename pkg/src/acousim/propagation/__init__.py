from .filterbank import OctaveFilterBank
from .ism import ImageSet, ImageSource, enumerate_images_general, enumerate_images_shoebox, is_visible
from .physics import air_absorption_coefficient, air_absorption_factor, reflection_amplitude, speed_of_sound
from .raytracing import RayHistogram, trace_rays
from .rir import Rir, bands_for_rate, fractional_delay_kernel, synthesize_rir
from .simulate import SimulationResult, check_capabilities, simulate_room

__all__ = [
    "OctaveFilterBank", "ImageSet", "ImageSource", "enumerate_images_general", "enumerate_images_shoebox",
    "is_visible", "air_absorption_coefficient", "air_absorption_factor", "reflection_amplitude",
    "speed_of_sound", "RayHistogram", "trace_rays", "Rir", "bands_for_rate", "fractional_delay_kernel",
    "synthesize_rir", "SimulationResult", "check_capabilities", "simulate_room",
]
