from .directivity import PATTERNS, Directivity, Transducer, check_transducer, directivity_gain
from .materials import MATERIALS, OCTAVE_BANDS, Material, band_edges, get_material
from .positions import PositionSet, generate_positions, generate_test_grid, generate_train_dev_cloud
from .room import (
    SABINE_CONSTANT,
    Environment,
    Room,
    RoomSpec,
    Surface,
    inverse_sabine,
    point_in_room,
    sabine_rt60,
    shoebox,
    validate_room,
)

__all__ = [
    "PATTERNS", "Directivity", "Transducer", "check_transducer", "directivity_gain",
    "MATERIALS", "OCTAVE_BANDS", "Material", "band_edges", "get_material",
    "PositionSet", "generate_positions", "generate_test_grid", "generate_train_dev_cloud",
    "SABINE_CONSTANT", "Environment", "Room", "RoomSpec", "Surface", "inverse_sabine",
    "point_in_room", "sabine_rt60", "shoebox", "validate_room",
]
