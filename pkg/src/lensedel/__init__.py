# lensedel
__all__ = [
    "geocore",      # refers to the 'geocore' dir
    "sfm",          # refers to the 'sfm' dir
    "cam",          # refers to the 'cam' dir
    "flood",        # refers to the 'flood' dir
    "pipeline",     # refers to the 'pipeline' dir
    "errors",       # refers to the 'errors' file
    "worker_pool",  # refers to the 'worker_pool' file
    "cli",          # refers to the 'cli' file
]
__version__ = "0.1.0"
