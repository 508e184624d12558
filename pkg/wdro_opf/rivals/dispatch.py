"""
This module sends a solve to the formulation a MethodConfig names
"""

import logging
from typing import Tuple

from wdro_opf.case_io import AdmittanceSet, Network
from wdro_opf.opfcore.enforcement import EnforcementReport, enforce, prepare, solve_with_enforcement
from wdro_opf.opfcore.strategy import OperatingStrategy
from wdro_opf.rivals.cutting_plane import cutting_plane_solve
from wdro_opf.rivals.dc import dc_opf
from wdro_opf.rivals.methods import MOMENT_METHODS, MethodConfig, benchmark_omega, ro_sizer
from wdro_opf.wasserstein import SampleSet


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())


def ro_solve(
        net: Network, samples: SampleSet, config: MethodConfig, adm: AdmittanceSet = None,
) -> Tuple[OperatingStrategy, EnforcementReport]:
    """The robust strategy: every constraint holds on the whole support box"""

    settings = config.opf_settings
    ctx = prepare(net, samples, settings, adm, sizer=ro_sizer(settings.sigma_max))
    ctx.omega = benchmark_omega(ctx.omega)
    return enforce(ctx, settings)


def solve_method(
        net: Network,
        samples: SampleSet,
        config: MethodConfig = None,
        adm: AdmittanceSet = None,
) -> Tuple[OperatingStrategy, EnforcementReport]:
    """Compute the strategy of any method.

    Args:
        net: The network.
        samples: Historical forecast errors, one column per wind farm.
        config: The method and its settings, WDRO with defaults when not given.
        adm: Admittance structures, built when not given.
    """

    config = config or MethodConfig()
    LOGGER.info('Computing the %s strategy of %s', config.method.upper(), net.name)
    if config.method == 'wdro':
        return solve_with_enforcement(net, samples, config.opf_settings, adm)
    if config.method == 'ro':
        return ro_solve(net, samples, config, adm)
    if config.method in MOMENT_METHODS:
        return cutting_plane_solve(net, samples, config, adm)
    return dc_opf(net, samples, config, adm)
