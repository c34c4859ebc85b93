"""
OBJ and CSV writers for octagon meshes and symmetry cells.
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from core.exceptions import DomainError
from surface.mesher import OctagonMesh, SymmetryCell

logger = logging.getLogger(__name__)

NUMBER_FORMAT = '%.17g'


def format_number(value) -> str:
    """Text of a value as written in OBJ and CSV files; floats keep 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return NUMBER_FORMAT % value
    return str(value)


def provenance_lines(provenance: Dict[str, object], prefix: str = '# ') -> List[str]:
    """Header comment lines, one per key, in sorted key order."""
    return [f"{prefix}{key}: {format_number(provenance[key])}" for key in sorted(provenance)]


class Exporter:
    """Writes meshes to disk; every file starts with a provenance header."""

    @staticmethod
    def _pieces(mesh: Union[OctagonMesh, SymmetryCell]) -> List[OctagonMesh]:
        if isinstance(mesh, SymmetryCell):
            return list(mesh.copies)
        if isinstance(mesh, OctagonMesh):
            return [mesh]
        raise DomainError(f"cannot export {type(mesh).__name__}")

    @staticmethod
    def write_obj(mesh: Union[OctagonMesh, SymmetryCell], path: Union[str, Path],
                  provenance: Optional[Dict[str, object]] = None) -> Path:
        """
        Write vertices and triangle faces as ASCII OBJ.

        Args:
            mesh: Octagon or symmetry cell (copies are written as one object)
            path: Output file
            provenance: Header entries; the mesh's own provenance if omitted

        Returns:
            The written path
        """
        path = Path(path)
        pieces = Exporter._pieces(mesh)
        header = provenance if provenance is not None else pieces[0].provenance
        lines = provenance_lines(header)
        lines.append(f"# copies: {len(pieces)}")
        offset = 1  # OBJ is 1-indexed
        vertex_lines, face_lines = [], []
        for piece in pieces:
            for x, y, z in piece.vertices:
                vertex_lines.append(f"v {NUMBER_FORMAT % x} {NUMBER_FORMAT % y} {NUMBER_FORMAT % z}")
            for a, b, c in piece.faces:
                face_lines.append(f"f {a + offset} {b + offset} {c + offset}")
            offset += len(piece.vertices)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write('\n'.join(lines + vertex_lines + face_lines) + '\n')
        logger.info("wrote %d vertices and %d faces to %s", len(vertex_lines), len(face_lines), path)
        return path

    @staticmethod
    def read_obj(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
        """Vertices and 0-indexed triangle faces of an OBJ file; other records are skipped."""
        vertices, faces = [], []
        with open(path, 'r', encoding='utf-8') as f:
            for line in f:
                parts = line.split()
                if not parts or parts[0].startswith('#'):
                    continue
                if parts[0] == 'v':
                    vertices.append([float(x) for x in parts[1:4]])
                elif parts[0] == 'f':
                    # keep only the vertex index of v/vt/vn references
                    faces.append([int(ref.split('/')[0]) - 1 for ref in parts[1:4]])
        return np.array(vertices, dtype=float).reshape(-1, 3), np.array(faces, dtype=int).reshape(-1, 3)

    @staticmethod
    def write_csv(mesh: Union[OctagonMesh, SymmetryCell], path: Union[str, Path],
                  provenance: Optional[Dict[str, object]] = None) -> Path:
        """Write one row per vertex with columns x,y,z,arc_label."""
        path = Path(path)
        pieces = Exporter._pieces(mesh)
        header = provenance if provenance is not None else pieces[0].provenance
        lines = provenance_lines(header)
        lines.append('x,y,z,arc_label')
        for piece in pieces:
            for (x, y, z), label in zip(piece.vertices, piece.labels):
                lines.append(f"{NUMBER_FORMAT % x},{NUMBER_FORMAT % y},{NUMBER_FORMAT % z},{label}")
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write('\n'.join(lines) + '\n')
        logger.info("wrote %d points to %s", len(lines) - len(header) - 1, path)
        return path
