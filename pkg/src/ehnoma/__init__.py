"""Outage probability of an EH MIMO-NOMA downlink with joint antenna selection."""

from .analysis import bessel_k, op_closed_form, op_closed_form_raw, op_numerical
from .fading import (
    ETA_TABLE,
    EtaTable,
    NakagamiParams,
    ThetaTable,
    UnsupportedModelError,
    build_theta_table,
    cdf_best_first_hop,
    cdf_majority_user,
    cdf_squared_gain,
    pdf_best_first_hop,
    pdf_squared_gain,
    sample_squared_gain,
)
from .link import (
    InfeasibleConfigError,
    SystemConfig,
    amplification_factor,
    outage_event,
    sinr,
    tau_star,
)
from .montecarlo import McEstimate, estimate_op, sample_realization
from .selection import (
    ChannelRealization,
    SelectionOutcome,
    jtras_maj,
    jtras_opt,
    order_users,
    select,
)

__version__ = "0.1.0"
