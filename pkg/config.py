import os
from dotenv import load_dotenv

load_dotenv()

class Config:
    # Zonal polynomial tables
    ZONAL_DEGREE_CEILING = int(os.getenv("ZONAL_DEGREE_CEILING", "50"))
    ZONAL_CACHE_DIR = os.getenv("ZONAL_CACHE_DIR", "")

    # Series truncation defaults
    SERIES_MAX_DEGREE = int(os.getenv("SERIES_MAX_DEGREE", "50"))
    SERIES_REL_TOLERANCE = float(os.getenv("SERIES_REL_TOLERANCE", "1e-15"))
    SERIES_CONSECUTIVE_SMALL = int(os.getenv("SERIES_CONSECUTIVE_SMALL", "3"))
    SERIES_DIVERGENCE_HORIZON = int(os.getenv("SERIES_DIVERGENCE_HORIZON", "30"))

    # Identity checks
    VERIFY_TOLERANCE = float(os.getenv("VERIFY_TOLERANCE", "1e-6"))

    # Monte Carlo
    MC_CHUNK_SIZE = int(os.getenv("MC_CHUNK_SIZE", "100000"))
    MC_MAX_RETRIES = int(os.getenv("MC_MAX_RETRIES", "5"))

    # Symmetric eigen-solver
    JACOBI_TOLERANCE = float(os.getenv("JACOBI_TOLERANCE", "1e-12"))
    JACOBI_MAX_SWEEPS = int(os.getenv("JACOBI_MAX_SWEEPS", "50"))

    # Location fitting
    FIT_BUDGET = int(os.getenv("FIT_BUDGET", "2000"))
    FIT_SIMPLEX_STEP = float(os.getenv("FIT_SIMPLEX_STEP", "0.25"))
    FIT_XATOL = float(os.getenv("FIT_XATOL", "1e-5"))
    FIT_FATOL = float(os.getenv("FIT_FATOL", "1e-7"))

    LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING").upper()

    # Landmark-count/dimension pairs whose configuration density is a polynomial
    ADMISSIBLE_SHAPES = [(5, 2), (7, 2), (4, 1), (6, 3)]
