"""First- and second-order large-n approximations of the predictive weights.

With beta_n = phi_h(n k**(-1/alpha)):

* first order:             (k alpha / n, 1 / n)
* second order, rational:  ((beta_n + k alpha) / (beta_n + n), 1 / (beta_n + n))
* second order, expanded:  (k alpha / n + beta_n / n, 1 / n - beta_n / n**2)

The rational form is normalised and coincides with the exact PD weights;
the expanded form is the two-term expansion and leaves a normalisation
defect of k alpha beta_n / n**2.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import DomainError
from .models import GibbsModel, check_nk, phi_h


class Form(enum.Enum):
    EXACT = "exact"
    FIRST_ORDER = "first"
    SECOND_ORDER_RATIONAL = "second_rational"
    SECOND_ORDER_EXPANDED = "second_expanded"
    MC = "mc"


RATIONAL = Form.SECOND_ORDER_RATIONAL
EXPANDED = Form.SECOND_ORDER_EXPANDED


@dataclass(frozen=True)
class PredictiveWeights:
    """Probability of a new type, and the factor multiplying (n_i - alpha) for type i.

    ``std_error`` and ``rejection_count`` are only set by the MC backend.
    ``flagged`` marks an expanded form whose existing_factor was clamped at
    0, or an MC estimate outside (0, 1).
    """

    new_mass: float
    existing_factor: float
    form: Form
    std_error: float = 0.0
    flagged: bool = False
    rejection_count: int = 0

    def total_mass(self, n, k, alpha):
        return self.new_mass + (n - k * alpha) * self.existing_factor


def beta_n(model: GibbsModel, n, k):
    """Second-order correction phi_h(n k**(-1/alpha))."""
    n, k = check_nk(n, k)
    return float(phi_h(model, n * k ** (-1.0 / model.alpha)))


def first_order_weights(model: GibbsModel, n, k) -> PredictiveWeights:
    n, k = check_nk(n, k)
    return PredictiveWeights(k * model.alpha / n, 1.0 / n, Form.FIRST_ORDER)


def second_order_weights(model: GibbsModel, n, k, form=RATIONAL) -> PredictiveWeights:
    n, k = check_nk(n, k)
    form = Form(form)
    b = beta_n(model, n, k)
    ka = k * model.alpha
    if form is Form.SECOND_ORDER_RATIONAL:
        if not b + n > 0:
            raise DomainError(f"rational form needs beta_n + n > 0, got beta_n={b}")
        return PredictiveWeights((b + ka) / (b + n), 1.0 / (b + n), form)
    if form is Form.SECOND_ORDER_EXPANDED:
        factor = 1.0 / n - b / n ** 2
        clamped = factor < 0.0
        return PredictiveWeights(ka / n + b / n, max(factor, 0.0), form, flagged=clamped)
    raise DomainError(f"second_order_weights takes RATIONAL or EXPANDED, got {form}")
