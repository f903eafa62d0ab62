"""Cut-cell tetrahedral decomposition of level-set fields on hex lattices."""

from .cutcell import BAT, IAT, UNAMBIGUOUS, CutCellMesh, Tet, decompose
from .diagnostics import (
    SHELL_CSV_HEADER,
    GeometryReport,
    ShellRow,
    ShellStudy,
    measure,
    shell_csv,
    shell_field,
    shell_preset,
    shell_study,
)
from .errors import DegeneracyError, HexcutError, InputError, OutputError
from .field import (
    Cuboid,
    FilterSpec,
    LevelSetField,
    PrimitiveScene,
    ScenePrimitive,
    Sphere,
    apply_filter,
    sample_scene,
)
from .lattice import HexLattice
from .npac import (
    GROUP_NAMES,
    NpacClass,
    canonical_group,
    canonicalize,
    class_representatives,
    orbit_counts,
    pattern_code,
)
from .rules import (
    DECIDER_VARIANTS,
    RULE_NAMES,
    IterationState,
    Resolution,
    ResolutionReport,
    RuleConfig,
    resolve,
    saddle_value,
)
from .vtkio import GridFile, export_mesh, export_mesh_file, read_mesh, read_mesh_file

__version__ = "0.1.0"

__all__ = [
    "BAT",
    "IAT",
    "UNAMBIGUOUS",
    "CutCellMesh",
    "Tet",
    "decompose",
    "SHELL_CSV_HEADER",
    "GeometryReport",
    "ShellRow",
    "ShellStudy",
    "measure",
    "shell_csv",
    "shell_field",
    "shell_preset",
    "shell_study",
    "DegeneracyError",
    "HexcutError",
    "InputError",
    "OutputError",
    "Cuboid",
    "FilterSpec",
    "LevelSetField",
    "PrimitiveScene",
    "ScenePrimitive",
    "Sphere",
    "apply_filter",
    "sample_scene",
    "HexLattice",
    "GROUP_NAMES",
    "NpacClass",
    "canonical_group",
    "canonicalize",
    "class_representatives",
    "orbit_counts",
    "pattern_code",
    "DECIDER_VARIANTS",
    "RULE_NAMES",
    "IterationState",
    "Resolution",
    "ResolutionReport",
    "RuleConfig",
    "resolve",
    "saddle_value",
    "GridFile",
    "export_mesh",
    "export_mesh_file",
    "read_mesh",
    "read_mesh_file",
    "__version__",
]
