from spectral_torus.models.validation.experiment_validation import (
    validate_experiment,
)

__all__ = [validate_experiment]
