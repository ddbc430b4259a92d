__all__ = [
    "config",           # refers to the 'config.py' file
    "pipeline_io",      # refers to the 'pipeline_io.py' file
    "synth_scene",      # refers to the 'synth_scene.py' file
    "runner",           # refers to the 'runner.py' file
    "plotting",         # refers to the 'plotting.py' file
]
