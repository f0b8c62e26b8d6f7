from .settings import ExperimentConfig
