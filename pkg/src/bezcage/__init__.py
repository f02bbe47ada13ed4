"""Green coordinates for cages of Bezier patches and triangles."""

from .basis import basis_derivatives, basis_weights, patch_partials, patch_point, patch_points, sample_basis
from .cage import (
    Cage,
    EmbeddedMesh,
    TensorPatch,
    TrianglePatch,
    ValidationReport,
    elevate_quad_cage,
    exterior_vertices,
    tessellate_cage,
    triangle_index,
    validate_cage,
    winding_numbers,
)
from .coons import BoundaryLoop, coons_point, fill_interior
from .coordinates import CoordinateTable, cage_coordinates, patch_phi, patch_psi, patch_psi_crossproduct, reconstruct
from .deformation import (
    apply_deformation,
    cage_sigma,
    deform,
    deform_with_data,
    neumann_vectors,
    scale_factor_L,
    sigma_coefficients,
)
from .errors import BezcageError
from .integration import (
    ProjectedSeed,
    TessellationPattern,
    build_uv_tessellation,
    green_integral_triangle,
    invert_point,
    signed_solid_angle,
)
from .normals import cage_net_normals, control_net_normals, surface_normal
from .projection import ConstraintSystem, build_system, constraint_matrix, project_rows, project_table


def compute_coordinates(cage, mesh, grid=8, levels=4, variant="normals", project=True):
    """Coordinates of ``mesh`` in ``cage``, projected onto exact linear reproduction by default."""
    table = cage_coordinates(cage, mesh, grid, levels, variant)
    if not project:
        return table
    system = constraint_matrix(cage, variant=variant)
    pts = mesh.vertices if isinstance(mesh, EmbeddedMesh) else mesh
    return project_table(system, table, pts)


__version__ = "0.1.0"
