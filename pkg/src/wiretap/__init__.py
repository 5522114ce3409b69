"""Secrecy metrics (SOP, ESR, EPSR) of fading wiretap channels when the
transmitter knows only the channel statistics."""

__version__ = "0.1.0"

from .channels import (DegradedCascade, Deterministic, FiniteSupport, RayleighIID, joint_sample,
                       norm_law, sample_channel)
from .errors import (ConfigError, DimensionError, DomainError, InvariantError, NotPSDError,
                     PowerBudgetError, WiretapError)
from .inputs import (BpskScalar, GaussianNonPrecoded, GaussianWithMask, PowerBudget,
                     counterexample_an_input, counterexample_gaussian_input, isotropic,
                     validate_input)
from .metrics import (SimomeRayleighScenario, epsr_closed_form, epsr_mc, esr_mc,
                      finite_support_metric_exact, simome_metric_exact, sop_closed_form, sop_mc)
from .rates import (bpsk_mmse, delta_curve, find_convexity_interval, gaussian_secrecy_rate,
                    i_bpsk, masked_gaussian_secrecy_rate, secrecy_rate)
