import os

# Get the base directory of the application
basedir = os.path.abspath(os.path.dirname(__file__))


class Config:
    BASE_DIR = basedir

    # Bundled example configs live in the data folder
    DATA_DIR = os.environ.get('SINGLET_DATA_DIR') or os.path.join(basedir, 'data')
    CONFIG_DIR = os.path.join(DATA_DIR, 'configs')

    # Thermal deviation scale for rho = 1/2^n + eps * sum(I_kz)
    REFERENCE_POLARIZATION = float(os.environ.get('SINGLET_REFERENCE_POLARIZATION') or 1e-3)
    DEFAULT_RECORD_POINTS = int(os.environ.get('SINGLET_RECORD_POINTS') or 512)

    # Density matrix checks
    HERMITIAN_RTOL = 1e-12
    TRACE_TOL = 1e-12
    PSD_TOL = 1e-10
    IMAG_TOL = 1e-10

    # Rate model integration
    RK4_STEPS_PER_TIMESCALE = 100
    RK4_MAX_STEPS = int(5e7)

    # Least-squares fits
    FIT_XTOL = 1e-10
    FIT_MAX_ITERATIONS = 200

    DEFAULT_THREADS = int(os.environ.get('SINGLET_THREADS') or 1)
    CONFIG_SCHEMA_VERSION = 1
    LOG_LEVEL = os.environ.get('SINGLET_LOG_LEVEL') or 'WARNING'
