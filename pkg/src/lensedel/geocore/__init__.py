__all__ = [
    "geodetic",     # refers to the 'geodetic.py' file
    "polygons",     # refers to the 'polygons.py' file
]
