"""
Settings for the oh_lab project.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Base directory
BASE_DIR = Path(__file__).resolve().parent.parent

# Load .env file (explicit path)
load_dotenv(dotenv_path=BASE_DIR / '.env')


# -------------------
# Basic Settings
# -------------------

LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING').upper()

JOBS = int(os.getenv('TPMS_OH_JOBS', '1'))


# -------------------
# Quadrature
# -------------------

QUADRATURE_CONFIG = {
    'ABS_TOL': float(os.getenv('QUAD_ABS_TOL', '1e-12')),
    'MAX_LEVELS': int(os.getenv('QUAD_MAX_LEVELS', '12')),
    'ABSCISSA_MAX': float(os.getenv('QUAD_T_MAX', '4.0')),
}


# -------------------
# Root finding / loci
# -------------------

SOLVER_CONFIG = {
    'RESIDUAL_TOL': float(os.getenv('SOLVER_RESIDUAL_TOL', '1e-10')),
    'XTOL': float(os.getenv('SOLVER_XTOL', '1e-12')),
    'BRACKET_T_MAX': float(os.getenv('SOLVER_T_MAX', '1e6')),
    'DELTA_FRACTION': float(os.getenv('SOLVER_DELTA_FRACTION', '1e-3')),
    'SCAN_EXTRA': int(os.getenv('SOLVER_SCAN_EXTRA', '6')),
    'TAU_SCAN_MAX': float(os.getenv('SOLVER_TAU_SCAN_MAX', '1e4')),
    'ISOSUM_BETA_CAP': float(os.getenv('SOLVER_ISOSUM_BETA_CAP', '8.0')),
    'SEED': int(os.getenv('SOLVER_SEED', '20240601')),
}


# -------------------
# Mesher
# -------------------

MESH_CONFIG = {
    'RESOLUTION': int(os.getenv('MESH_RESOLUTION', '64')),
    'GAUSS_NODES': int(os.getenv('MESH_GAUSS_NODES', '8')),
    'TRUNCATION_MARGIN': float(os.getenv('MESH_TRUNCATION_MARGIN', '14.0')),
    'GRID_WIDTH': float(os.getenv('MESH_GRID_WIDTH', '3.0')),
    'PERIOD_TOL': float(os.getenv('MESH_PERIOD_TOL', '1e-8')),
}
