from contextvars import ContextVar, Token

_tolerance_scale_token = ContextVar("DJANGO_DOMINATIVE_LAPLACE_TOLERANCE_SCALE", default=1.0)


def set_tolerance_scale(value: float) -> Token[float]:
    if not value > 0:
        raise ValueError(f"Tolerance scale must be positive, got {value}")
    return _tolerance_scale_token.set(float(value))


def get_tolerance_scale() -> float:
    return _tolerance_scale_token.get()


def reset_tolerance_scale(ctx_token: Token[float] | None = None):
    if ctx_token:
        _tolerance_scale_token.reset(ctx_token)
    else:
        _tolerance_scale_token.set(1.0)
