__all__ = [
    "cam_extent",   # refers to the 'cam_extent.py' file
]
