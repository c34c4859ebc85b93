"""
Fundamental octagon of an oH surface from its Weierstrass data.

The upper half plane is parametrized by w = log z = s + i phi, s in [-L, L],
phi in [0, pi]. Grid nodes are clustered toward the real axis and toward the
s-coordinates of the branch points. Interior values are integrated from the
base point z = i along the s = 0 column and then along rows; the two real-axis
rows are integrated in z with endpoint-exact tanh-sinh steps so the branch
points themselves are grid vertices.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.spatial import cKDTree
from scipy.special import erf, roots_legendre

from core.exceptions import ConvergenceError, DomainError, PeriodProblemError
from core.periods import period_residuals, periods
from core.quadrature import QuadratureSpec, gauss_legendre_panels, tanh_sinh
from core.weierstrass_data import SurfaceParams, eval_phi, phi_from_differences, simplify

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 16

# alpha + beta below this is a near-Traizet surface with thin necks
NECK_WARNING = 0.05

DEGENERATE_AREA = 1e-18

MAX_PANELS = 200000

FREE_ARCS = {
    # arc: (coordinate, sign of the plane offset, box extent)
    'V1V2': (0, 1.0, 'A'),
    'V2V3': (1, -1.0, 'B'),
    'V3V4': (0, 1.0, 'A_prime'),
    'V5V6': (0, -1.0, 'A'),
    'V6V7': (1, 1.0, 'B'),
    'V7V8': (0, -1.0, 'A_prime'),
}

VERTICAL_MARKERS = ('V2', 'V3', 'V6', 'V7')


@dataclass
class OctagonMesh:
    """
    Triangulated fundamental octagon in the box [-A, A] x [-B, B] x [-1, 1].

    Vertices are stored row-major over the (s, phi) grid, so vertex i * n_phi + j
    is the image of exp(s_i + i phi_j).
    """
    vertices: np.ndarray
    faces: np.ndarray
    labels: List[str]
    boundary_arcs: Dict[str, np.ndarray]
    markers: Dict[str, np.ndarray]
    A: float
    B: float
    A_prime: float
    params: SurfaceParams
    s_nodes: np.ndarray
    phi_nodes: np.ndarray
    scale: float
    provenance: Dict[str, object] = field(default_factory=dict)

    @property
    def grid_shape(self) -> Tuple[int, int]:
        """(n_s, n_phi) of the row-major vertex grid."""
        return self.s_nodes.size, self.phi_nodes.size


@dataclass
class SymmetryCell:
    """Eight copies of the octagon and the translation lattice of the surface."""
    copies: List[OctagonMesh]
    names: List[str]
    lattice: np.ndarray

    def points(self) -> np.ndarray:
        """Vertices of all copies stacked in copy order."""
        return np.vstack([copy.vertices for copy in self.copies])

    def shared_arc_distance(self, label: str, first: int, second: int) -> float:
        """Hausdorff distance between one boundary arc in two copies."""
        p = self.copies[first].boundary_arcs[label]
        q = self.copies[second].boundary_arcs[label]
        forward, _ = cKDTree(q).query(p)
        backward, _ = cKDTree(p).query(q)
        return float(max(forward.max(), backward.max()))

    def translation_defect(self, vector: np.ndarray, margin: float = 1e-3) -> Tuple[float, int]:
        """
        Largest distance from a translated cell point to the cell, over the
        translated points strictly inside the cell's bounding box.

        Returns:
            Tuple of (defect, number of points compared)
        """
        points = self.points()
        lo, hi = points.min(axis=0), points.max(axis=0)
        pad = margin * (hi - lo)
        moved = points + np.asarray(vector, dtype=float)
        inside = np.all((moved > lo + pad) & (moved < hi - pad), axis=1)
        if not inside.any():
            return 0.0, 0
        distance, _ = cKDTree(points).query(moved[inside])
        return float(distance.max()), int(inside.sum())


def clustered_nodes(lo: float, hi: float, intervals: int, width: float, dense: str = 'both') -> np.ndarray:
    """
    Nodes on [lo, hi] from the error function, dense at both ends or at lo only.

    The end nodes are exactly lo and hi.
    """
    if dense == 'both':
        u = np.linspace(-width, width, intervals + 1)
        x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * erf(u) / erf(width)
    elif dense == 'lo':
        u = np.linspace(0.0, width, intervals + 1)
        x = hi - (hi - lo) * (erf(u) / erf(width))[::-1]
    else:
        raise DomainError(f"unknown clustering {dense!r}")
    x[0], x[-1] = lo, hi
    return x


def _segment_distance(points: np.ndarray, a: complex, b: complex) -> float:
    """Distance from the closest of the points to the segment [a, b]."""
    d = b - a
    u = np.clip(((points - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return float(np.min(np.abs(points - (a + u * d))))


class OctagonMesher:
    """Builds, checks and extends the fundamental octagon."""

    def __init__(self, config: Dict, quadrature: Optional[QuadratureSpec] = None, n_jobs: int = 1):
        """
        Initialize mesher.

        Args:
            config: Mesher configuration dictionary
            quadrature: Controls for the real-axis tanh-sinh steps
            n_jobs: Worker threads for the row integrations
        """
        self.config = config
        self.quadrature = quadrature or QuadratureSpec()
        self.n_jobs = n_jobs
        self.resolution = config.get('RESOLUTION', 64)
        self.margin = config.get('TRUNCATION_MARGIN', 14.0)
        self.grid_width = config.get('GRID_WIDTH', 3.0)
        self.period_tol = config.get('PERIOD_TOL', 1e-8)
        self.nodes, self.weights = roots_legendre(config.get('GAUSS_NODES', 8))

    # ------------------------------------------------------------------
    # grid
    # ------------------------------------------------------------------

    def _s_grid(self, p: SurfaceParams, resolution: int) -> np.ndarray:
        per_segment = max(4, resolution // 8)
        log_t = math.log(p.t)
        cut = log_t + self.margin
        breaks = np.unique([0.0, abs(math.log(p.a)), abs(math.log(p.b)), log_t, cut])
        pieces = [np.array([0.0])]
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            dense = 'lo' if hi == cut else 'both'
            pieces.append(clustered_nodes(lo, hi, per_segment, self.grid_width, dense)[1:])
        half = np.concatenate(pieces)
        return np.concatenate([-half[::-1], half[1:]])

    def _phi_grid(self, resolution: int) -> np.ndarray:
        half = clustered_nodes(0.0, 0.5 * math.pi, max(8, resolution // 4), self.grid_width, 'lo')
        return np.concatenate([half, math.pi - half[::-1][1:]])

    @staticmethod
    def _marker_indices(p: SurfaceParams, s_nodes: np.ndarray) -> Dict[str, int]:
        """Grid index of each branch point along its real-axis row."""
        indices = {}
        for k, v in enumerate(p.branch_points):
            target = math.log(abs(v))
            indices[f'V{k + 1}'] = int(np.argmin(np.abs(s_nodes - target)))
        return indices

    # ------------------------------------------------------------------
    # integration
    # ------------------------------------------------------------------

    @staticmethod
    def _omega(diffs, rho: float) -> np.ndarray:
        phi1, phi2, dh = phi_from_differences(diffs, rho)
        return np.stack([0.5 * (phi2 - phi1), 0.5j * (phi2 + phi1), dh])

    def _gauss(self, integrand, a: complex, b: complex, singular: np.ndarray) -> np.ndarray:
        length = abs(b - a)
        distance = _segment_distance(singular, a, b)
        if not distance > 0:
            raise ConvergenceError(f"path segment ({a}, {b}) passes through a branch point")
        panels = max(1, math.ceil(2.0 * length / distance))
        if panels > MAX_PANELS:
            raise ConvergenceError(f"segment ({a}, {b}) needs {panels} panels")
        return gauss_legendre_panels(integrand, a, b, panels, self.nodes, self.weights)

    def _row(self, p: SurfaceParams, s_nodes: np.ndarray, phi: float, start: np.ndarray,
             origin: int, singular_w: np.ndarray) -> np.ndarray:
        """Prefix integrals along one interior row, outward from the s = 0 node."""
        v = p.branch_points

        def integrand(w):
            z = np.exp(w)
            return self._omega([z - vk for vk in v], p.rho) * z

        row = np.zeros((s_nodes.size, 3), dtype=complex)
        row[origin] = start
        w = s_nodes + 1j * phi
        for i in range(origin + 1, s_nodes.size):
            row[i] = row[i - 1] + self._gauss(integrand, w[i - 1], w[i], singular_w)
        for i in range(origin - 1, -1, -1):
            row[i] = row[i + 1] - self._gauss(integrand, w[i], w[i + 1], singular_w)
        return row

    def _real_step(self, p: SurfaceParams, x_from: float, x_to: float) -> np.ndarray:
        """Integral of the forms along the real axis, with either end possibly a branch point."""
        v = p.branch_points
        lo, hi = min(x_from, x_to), max(x_from, x_to)

        def integrand(x, d_lo, d_hi):
            diffs = [np.where(d_lo <= d_hi, (lo - vk) + d_lo, (hi - vk) - d_hi) + 0j for vk in v]
            return self._omega(diffs, p.rho)

        value = tanh_sinh(integrand, lo, hi, self.quadrature).value
        return value if x_to > x_from else -value

    def _boundary_row(self, p: SurfaceParams, s_nodes: np.ndarray, x_nodes: np.ndarray,
                      adjacent: np.ndarray, phi_adjacent: float, markers: List[float]) -> np.ndarray:
        """
        Values on a real-axis row, anchored by a straight drop from the
        adjacent interior row at the node farthest from every branch point.
        """
        v = p.branch_points
        inner = np.abs(s_nodes) <= math.log(p.t)
        clearance = np.min(np.abs(np.subtract.outer(s_nodes, markers)), axis=1)
        anchor = int(np.argmax(np.where(inner, clearance, -1.0)))
        z0 = complex(np.exp(s_nodes[anchor] + 1j * phi_adjacent))

        def integrand(z):
            return self._omega([z - vk for vk in v], p.rho)

        row = np.zeros((s_nodes.size, 3), dtype=complex)
        row[anchor] = adjacent[anchor] + self._gauss(integrand, z0, complex(x_nodes[anchor]), v + 0j)
        for i in range(anchor + 1, s_nodes.size):
            row[i] = row[i - 1] + self._real_step(p, x_nodes[i - 1], x_nodes[i])
        for i in range(anchor - 1, -1, -1):
            row[i] = row[i + 1] - self._real_step(p, x_nodes[i], x_nodes[i + 1])
        return row

    def _integrate(self, p: SurfaceParams, s_nodes: np.ndarray, phi_nodes: np.ndarray,
                   marker_index: Dict[str, int]) -> np.ndarray:
        v = p.branch_points
        n_s, n_phi = s_nodes.size, phi_nodes.size
        origin = int(np.argmin(np.abs(s_nodes)))
        middle = n_phi // 2
        singular_w = np.log(np.abs(v)) + 1j * np.where(v > 0, 0.0, math.pi)

        def column_integrand(w):
            z = np.exp(w)
            return self._omega([z - vk for vk in v], p.rho) * z

        column = np.zeros((n_phi, 3), dtype=complex)
        w_col = 1j * phi_nodes
        for j in range(middle + 1, n_phi - 1):
            column[j] = column[j - 1] + self._gauss(column_integrand, w_col[j - 1], w_col[j], singular_w)
        for j in range(middle - 1, 0, -1):
            column[j] = column[j + 1] - self._gauss(column_integrand, w_col[j], w_col[j + 1], singular_w)

        rows = Parallel(n_jobs=self.n_jobs, prefer='threads')(
            delayed(self._row)(p, s_nodes, phi_nodes[j], column[j], origin, singular_w)
            for j in range(1, n_phi - 1)
        )
        values = np.zeros((n_s, n_phi, 3), dtype=complex)
        for j, row in enumerate(rows, start=1):
            values[:, j] = row

        positive = np.exp(s_nodes)
        negative = -np.exp(s_nodes)
        for k, vk in enumerate(v):
            name = f'V{k + 1}'
            if vk > 0:
                positive[marker_index[name]] = vk
            else:
                negative[marker_index[name]] = vk
        log_abs = np.log(np.abs(v))
        values[:, 0] = self._boundary_row(p, s_nodes, positive, values[:, 1], phi_nodes[1],
                                          list(log_abs[v > 0]))
        values[:, -1] = self._boundary_row(p, s_nodes, negative, values[:, -2], phi_nodes[-2],
                                           list(log_abs[v < 0]))
        return values

    # ------------------------------------------------------------------
    # assembly
    # ------------------------------------------------------------------

    def _check_periods(self, p: SurfaceParams) -> None:
        s = simplify(p)
        pset = periods(s, self.quadrature)
        first, second = period_residuals(s, p.rho, pset)
        limit = self.period_tol * max(1.0, pset.I2)
        if max(abs(first), abs(second)) > limit:
            raise PeriodProblemError(
                f"parameters a={p.a}, b={p.b}, t={p.t}, rho={p.rho} do not solve the period "
                f"problem: residuals {first:.3g}, {second:.3g} above {limit:.3g}"
            )
        if s.alpha + s.beta < NECK_WARNING:
            logger.warning("alpha+beta=%.3g: thin catenoidal necks, mesh fidelity is not controlled",
                           s.alpha + s.beta)

    @staticmethod
    def _arc_paths(marker_index: Dict[str, int], n_s: int) -> Dict[str, List[Tuple[int, int]]]:
        """(s index, row) sequences of each boundary arc, from its first vertex to its second."""
        top, bottom = -1, 0

        def run(row, start, stop):
            step = 1 if stop >= start else -1
            return [(i, row) for i in range(start, stop + step, step)]

        m = marker_index
        return {
            'V1V2': run(top, m['V1'], m['V2']),
            'V2V3': run(top, m['V2'], m['V3']),
            'V3V4': run(top, m['V3'], m['V4']),
            'V4V5': run(top, m['V4'], 0) + run(bottom, 0, m['V5']),
            'V5V6': run(bottom, m['V5'], m['V6']),
            'V6V7': run(bottom, m['V6'], m['V7']),
            'V7V8': run(bottom, m['V7'], m['V8']),
            'V8V1': run(bottom, m['V8'], n_s - 1) + run(top, n_s - 1, m['V1']),
        }

    @staticmethod
    def _triangulate(grid: np.ndarray) -> np.ndarray:
        """Split every grid quad along its shorter diagonal and drop degenerate triangles."""
        n_s, n_phi, _ = grid.shape
        i, j = np.meshgrid(np.arange(n_s - 1), np.arange(n_phi - 1), indexing='ij')
        i, j = i.ravel(), j.ravel()
        c00 = i * n_phi + j
        c10 = (i + 1) * n_phi + j
        c11 = (i + 1) * n_phi + j + 1
        c01 = i * n_phi + j + 1
        flat = grid.reshape(-1, 3)
        main = np.linalg.norm(flat[c11] - flat[c00], axis=1)
        anti = np.linalg.norm(flat[c01] - flat[c10], axis=1)
        use_main = main <= anti
        first = np.where(use_main[:, None], np.stack([c00, c10, c11], axis=1), np.stack([c00, c10, c01], axis=1))
        second = np.where(use_main[:, None], np.stack([c00, c11, c01], axis=1), np.stack([c10, c11, c01], axis=1))
        faces = np.vstack([first, second])
        cross = np.cross(flat[faces[:, 1]] - flat[faces[:, 0]], flat[faces[:, 2]] - flat[faces[:, 0]])
        area = 0.5 * np.linalg.norm(cross, axis=1)
        return faces[area > DEGENERATE_AREA]

    def build_octagon(self, p: SurfaceParams, resolution: Optional[int] = None) -> OctagonMesh:
        """
        Integrate the Weierstrass representation over the grid and assemble the octagon.

        Args:
            p: Surface parameters solving the period problem, rho included
            resolution: Grid resolution, at least 16 (settings default if omitted)

        Returns:
            OctagonMesh normalized to box height 2

        Raises:
            DomainError: If the resolution is below 16
            PeriodProblemError: If p does not solve the period problem
            ConvergenceError: If a path integral fails
        """
        resolution = resolution or self.resolution
        if resolution < MIN_RESOLUTION:
            raise DomainError(f"resolution must be at least {MIN_RESOLUTION}, got {resolution}")
        self._check_periods(p)
        s_nodes = self._s_grid(p, resolution)
        phi_nodes = self._phi_grid(resolution)
        marker_index = self._marker_indices(p, s_nodes)
        n_s, n_phi = s_nodes.size, phi_nodes.size
        logger.info("octagon a=%.10g b=%.10g t=%.10g on a %d x %d grid", p.a, p.b, p.t, n_s, n_phi)

        raw = self._integrate(p, s_nodes, phi_nodes, marker_index).real
        height = raw[marker_index['V8'], 0, 2] - raw[marker_index['V5'], 0, 2]
        scale = 2.0 / abs(height)
        grid = raw * scale
        paths = self._arc_paths(marker_index, n_s)

        def arc(label):
            return np.array([grid[i, j] for i, j in paths[label]])

        signs = np.array([
            1.0 if arc('V1V2')[:, 0].mean() > 0 else -1.0,
            -1.0 if arc('V2V3')[:, 1].mean() > 0 else 1.0,
            1.0 if grid[marker_index['V8'], 0, 2] > 0 else -1.0,
        ])
        grid = grid * signs

        labels = ['interior'] * (n_s * n_phi)
        boundary_arcs = {}
        for label, path in paths.items():
            boundary_arcs[label] = arc(label)
            for i, j in path:
                labels[i * n_phi + (j % n_phi)] = label
        markers = {}
        for k in range(8):
            name = f'V{k + 1}'
            row = 0 if k >= 4 else n_phi - 1
            labels[marker_index[name] * n_phi + row] = name
            markers[name] = grid[marker_index[name], row].copy()
        origin = int(np.argmin(np.abs(s_nodes)))
        markers['center'] = grid[origin, n_phi // 2].copy()

        mesh = OctagonMesh(
            vertices=grid.reshape(-1, 3),
            faces=self._triangulate(grid),
            labels=labels,
            boundary_arcs=boundary_arcs,
            markers=markers,
            A=float(boundary_arcs['V1V2'][:, 0].mean()),
            B=float(-boundary_arcs['V2V3'][:, 1].mean()),
            A_prime=float(boundary_arcs['V3V4'][:, 0].mean()),
            params=p,
            s_nodes=s_nodes,
            phi_nodes=phi_nodes,
            scale=scale,
            provenance={
                'a': p.a, 'b': p.b, 't': p.t, 'rho': p.rho,
                'resolution': resolution,
                'truncation_margin': self.margin,
                'grid_width': self.grid_width,
                'gauss_nodes': self.nodes.size,
                'quad_abs_tol': self.quadrature.target_abs_tol,
            },
        )
        logger.info("octagon box A=%.10g A'=%.10g B=%.10g, %d faces", mesh.A, mesh.A_prime, mesh.B,
                    len(mesh.faces))
        return mesh

    # ------------------------------------------------------------------
    # checks
    # ------------------------------------------------------------------

    @staticmethod
    def _vertex_normals(mesh: OctagonMesh) -> np.ndarray:
        v, f = mesh.vertices, mesh.faces
        cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
        normals = np.zeros_like(v)
        for corner in range(3):
            np.add.at(normals, f[:, corner], cross)
        return normals

    @staticmethod
    def _conformality(mesh: OctagonMesh) -> float:
        """Median relative gap between s-edge lengths and the metric (|phi1|+|phi2|)/2 |dz|."""
        n_s, n_phi = mesh.grid_shape
        grid = mesh.vertices.reshape(n_s, n_phi, 3)
        chord = np.linalg.norm(np.diff(grid[:, 1:-1], axis=0), axis=2)
        ds = np.diff(mesh.s_nodes)
        mid = 0.5 * (mesh.s_nodes[1:] + mesh.s_nodes[:-1])
        z = np.exp(mid[:, None] + 1j * mesh.phi_nodes[None, 1:-1])
        phi1, phi2, _ = eval_phi(z, mesh.params, check=False)
        predicted = mesh.scale * 0.5 * (np.abs(phi1) + np.abs(phi2)) * np.abs(z) * ds[:, None]
        return float(np.median(np.abs(chord - predicted) / predicted))

    def check_invariants(self, mesh: OctagonMesh) -> Dict[str, float]:
        """
        Geometric residuals of a built octagon.

        Plane and box entries are absolute distances in box units; marker_normal
        entries are angles from the vertical in degrees. imaginary_axis_offset
        is the horizontal deviation of the image of the positive imaginary axis,
        which is a vertical segment only when a = b.
        """
        arcs = mesh.boundary_arcs
        extents = {'A': mesh.A, 'B': mesh.B, 'A_prime': mesh.A_prime}
        residuals = {}
        for label, (axis, sign, extent) in FREE_ARCS.items():
            residuals[f'plane_{label}'] = float(np.max(np.abs(arcs[label][:, axis] - sign * extents[extent])))
        residuals['box_mismatch'] = abs(mesh.A - mesh.A_prime)
        for label, height in (('V8V1', 1.0), ('V4V5', -1.0)):
            residuals[f'fixed_{label}_height'] = float(np.max(np.abs(arcs[label][:, 2] - height)))
            residuals[f'fixed_{label}_offset'] = float(np.max(np.abs(arcs[label][:, 1])))
        v = mesh.vertices
        box = np.array([mesh.A, mesh.B, 1.0])
        residuals['box_excess'] = float(max(0.0, np.max(np.abs(v) - box)))
        distance, _ = cKDTree(v).query(-v)
        residuals['inversion'] = float(distance.max())
        residuals['center_offset'] = float(np.linalg.norm(mesh.markers['center']))
        n_s, n_phi = mesh.grid_shape
        # phi = pi/2 column: the image of the positive imaginary axis
        column = v.reshape(n_s, n_phi, 3)[:, n_phi // 2]
        residuals['imaginary_axis_offset'] = float(np.max(np.hypot(column[:, 0], column[:, 1])))
        residuals['conformality'] = self._conformality(mesh)
        normals = self._vertex_normals(mesh)
        for name in VERTICAL_MARKERS:
            index = mesh.labels.index(name)
            n = normals[index]
            cosine = min(1.0, abs(n[2]) / np.linalg.norm(n))
            residuals[f'marker_normal_{name}'] = math.degrees(math.acos(cosine))
        return residuals

    # ------------------------------------------------------------------
    # symmetry extension
    # ------------------------------------------------------------------

    @staticmethod
    def _transform(mesh: OctagonMesh, matrix: np.ndarray, offset: np.ndarray) -> OctagonMesh:
        def move(points):
            return points @ matrix.T + offset

        faces = mesh.faces[:, ::-1] if np.linalg.det(matrix) < 0 else mesh.faces
        return replace(
            mesh,
            vertices=move(mesh.vertices),
            faces=faces.copy(),
            labels=list(mesh.labels),
            boundary_arcs={k: move(a) for k, a in mesh.boundary_arcs.items()},
            markers={k: move(m) for k, m in mesh.markers.items()},
        )

    def extend_cell(self, mesh: OctagonMesh) -> SymmetryCell:
        """
        Extend the octagon by the reflections in x = A and y = -B and the
        half-turn about the top segment V8V1.
        """
        A, B = mesh.A, mesh.B
        identity = (np.eye(3), np.zeros(3))
        mirror_x = (np.diag([-1.0, 1.0, 1.0]), np.array([2 * A, 0.0, 0.0]))
        mirror_y = (np.diag([1.0, -1.0, 1.0]), np.array([0.0, -2 * B, 0.0]))
        half_turn = (np.diag([1.0, -1.0, -1.0]), np.array([0.0, 0.0, 2.0]))

        def compose(outer, inner):
            return outer[0] @ inner[0], outer[0] @ inner[1] + outer[1]

        mirrors = [('', identity), ('sx', mirror_x), ('sy', mirror_y), ('sx.sy', compose(mirror_x, mirror_y))]
        copies, names = [], []
        for turn_name, turn in (('', identity), ('r', half_turn)):
            for mirror_name, mirror in mirrors:
                matrix, offset = compose(mirror, turn)
                copies.append(self._transform(mesh, matrix, offset))
                names.append('.'.join(part for part in (mirror_name, turn_name) if part) or 'id')
        lattice = np.array([[A, 0.0, 1.0], [-A, 0.0, 1.0], [0.0, 2 * B, 0.0]])
        return SymmetryCell(copies=copies, names=names, lattice=lattice)
