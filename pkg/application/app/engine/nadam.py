"""
Nesterov-accelerated Adam with the momentum schedule of the published Nadam update (the Keras form):

    mu_t      = beta1 * (1 - 0.5 * 0.96 ** (0.004 * t))
    m_t       = beta1 * m + (1 - beta1) * g
    v_t       = beta2 * v + (1 - beta2) * g^2
    m_bar     = (1 - mu_t) * g / (1 - prod_{i<=t} mu_i) + mu_{t+1} * m_t / (1 - prod_{i<=t+1} mu_i)
    p        -= lr * m_bar / (sqrt(v_t / (1 - beta2 ** t)) + eps)
"""
import numpy as np

from application.app.engine.engine_exceptions import DimensionMismatchException, TrainingDivergenceException
from application.app.engine.param_store import ParamStore

BETA_1 = 0.9
BETA_2 = 0.999
EPSILON = 1e-7
SCHEDULE_DECAY = 0.004


def _momentum(step: int) -> float:
    return BETA_1 * (1.0 - 0.5 * 0.96 ** (SCHEDULE_DECAY * step))


def nadam_step(store: ParamStore, gradients: dict[str, np.ndarray], learning_rate: float) -> ParamStore:
    """Applies one update in place and returns the store. Gradients are checked before anything changes."""
    for name, grad in gradients.items():
        if grad.shape != store[name].shape:
            raise DimensionMismatchException(f"nadam '{name}'", store[name].shape, grad.shape)
        if not np.isfinite(grad).all():
            raise TrainingDivergenceException(f"parameter '{name}'")

    step = store.step + 1
    mu = _momentum(step)
    mu_next = _momentum(step + 1)
    m_schedule = store.m_schedule * mu
    m_schedule_next = m_schedule * mu_next

    for name, grad in gradients.items():
        first = store.first_moments[name]
        second = store.second_moments[name]
        first *= BETA_1
        first += (1.0 - BETA_1) * grad
        second *= BETA_2
        second += (1.0 - BETA_2) * grad * grad

        grad_hat = grad / (1.0 - m_schedule)
        first_hat = first / (1.0 - m_schedule_next)
        second_hat = second / (1.0 - BETA_2 ** step)
        blended = (1.0 - mu) * grad_hat + mu_next * first_hat
        store[name].data = store[name].data - learning_rate * blended / (np.sqrt(second_hat) + EPSILON)

    store.step = step
    store.m_schedule = m_schedule
    return store
