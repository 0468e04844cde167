class UndefinedEstimateError(ValueError):
    """An estimator's conditioning event is empty (no exceedances, Γ̂ = 0, ...)."""
