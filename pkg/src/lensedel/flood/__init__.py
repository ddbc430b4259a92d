__all__ = [
    "footprint_filter",     # refers to the 'footprint_filter.py' file
    "evaluation",           # refers to the 'evaluation.py' file
    "label_agg",            # refers to the 'label_agg.py' file
]
