__all__ = [
    "reconstruction",   # refers to the 'reconstruction.py' file
    "recon_align",      # refers to the 'recon_align.py' file
    "homography",       # refers to the 'homography.py' file
    "ransac",           # refers to the 'ransac.py' file
]
