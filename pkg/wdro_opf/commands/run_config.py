"""
This module holds the settings of one command run and turns them into the
objects the library works with: the network, the historical samples, the OPF
settings of a method and the evaluation samples.

A run takes its historical forecast errors either from a sample CSV or from a
protocol file. With a protocol, `--seed` replaces the protocol's seed, the
historical draw uses that seed and the out-of-sample draw uses the next one,
so the two sets never share draws.

The uncertainty cache lives in `--cache-dir`, or in the directory named by the
WDRO_OPF_CACHE environment variable when that is set. There is one cache file
per case, β and σ_max; inside it entries are keyed by method and quantity and
checked against the sample hash and ρ.
"""

from dataclasses import asdict, dataclass, field, replace
import hashlib
import json
import logging
import os
from typing import Optional, Tuple

from wdro_opf.case_io import Network, case_hash, load_case, scale_wind
from wdro_opf.chance.sizing import RhoLevels
from wdro_opf.commands import CommandError
from wdro_opf.opfcore import OpfSettings
from wdro_opf.rivals import MethodConfig
from wdro_opf.simlab import RngProtocol, generate_samples, load_protocol, read_samples
from wdro_opf.wasserstein import SampleSet


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

CACHE_ENV = 'WDRO_OPF_CACHE'
DEFAULT_CACHE_DIR = '.wdro_opf_cache'
DEFAULT_OUT_DIR = 'wdro_opf_out'
DEFAULT_N_SAMPLES = 1000
DEFAULT_N_MC = 100000


def resolve_cache_dir(cache_dir: Optional[str]) -> Optional[str]:
    """The cache directory to use: the environment wins over the argument"""

    return os.environ.get(CACHE_ENV) or cache_dir


@dataclass(frozen=True)
class RunConfig:  # pylint: disable=too-many-instance-attributes
    """The settings of one command run.

    Attributes:
        case: Path of the case file.
        samples: Path of a sample CSV (MW), or None.
        protocol: Path of a protocol JSON, or None.
        method: The formulation.
        rho: One violation probability, or four (reserve, voltage, reactive, flow).
        beta: Confidence of the Wasserstein balls.
        sigma_max: Half side of the standardized support box.
        n_samples: Historical draws taken from a protocol.
        n_mc: Monte Carlo trials of an evaluation.
        seed: Replaces the protocol seed when given.
        cache_dir: Directory of the uncertainty cache, None to disable it.
        out: Directory the artifacts are written to.
        jobs: Worker count for sizing, evaluation and sweeps.
        max_rounds: Enforcement round limit.
        violation_tol: Smallest violation that makes a constraint enforced.
        relax: Constraint families left without chance constraints.
        fallback: Size the balls from the support diameter instead of C.
        enforce_all: Enforce every chance constraint from the first round.
    """

    case: str
    samples: Optional[str] = None
    protocol: Optional[str] = None
    method: str = 'wdro'
    rho: Tuple[float, ...] = (0.05,)
    beta: float = 0.9
    sigma_max: float = 10.0
    n_samples: int = DEFAULT_N_SAMPLES
    n_mc: int = DEFAULT_N_MC
    seed: Optional[int] = None
    cache_dir: Optional[str] = DEFAULT_CACHE_DIR
    out: str = DEFAULT_OUT_DIR
    jobs: int = 1
    max_rounds: int = 20
    violation_tol: float = 1e-6
    relax: Tuple[str, ...] = field(default_factory=tuple)
    fallback: bool = False
    enforce_all: bool = False

    def __post_init__(self):
        if self.samples and self.protocol:
            raise CommandError('give either --samples or --protocol, not both')
        try:
            RhoLevels.from_sequence(self.rho)
        except ValueError as exc:
            raise CommandError(str(exc)) from exc
        object.__setattr__(self, 'rho', tuple(float(value) for value in self.rho))
        object.__setattr__(self, 'relax', tuple(self.relax or ()))
        object.__setattr__(self, 'cache_dir', resolve_cache_dir(self.cache_dir))

    @classmethod
    def from_document(cls, document: dict, **overrides) -> 'RunConfig':
        """Rebuild the settings recorded in an artifact, with the given fields
        (the input paths, usually) replaced.

        Raises:
            CommandError: when the recorded settings are incomplete.
        """

        recorded = document.get('config')
        if not isinstance(recorded, dict):
            raise CommandError('the artifact carries no run settings')
        try:
            return cls(**{**recorded, **overrides})
        except TypeError as exc:
            raise CommandError(f'the recorded run settings are not usable: {exc}') from exc

    def canonical(self) -> dict:
        """The settings that shape a result, as a JSON-ready dict. File paths are
        left out, the content they point at enters the hash instead.
        """

        document = asdict(self)
        for key in ('case', 'samples', 'protocol', 'cache_dir', 'out', 'jobs', 'n_mc'):
            document.pop(key)
        document['rho'] = list(self.rho)
        document['relax'] = list(self.relax)
        return document

    def config_hash(self, net: Network, samples: Optional[SampleSet]) -> str:
        """sha256 of the canonical settings together with the case and sample hashes"""

        document = {
            'config': self.canonical(),
            'case': case_hash(net),
            'samples': samples.digest() if samples is not None else None,
        }
        return hashlib.sha256(json.dumps(document, sort_keys=True).encode('utf-8')).hexdigest()

    def load_protocol(self) -> Optional[RngProtocol]:
        """The protocol, with --seed applied, or None when samples come from a file"""

        if not self.protocol:
            return None
        protocol = load_protocol(self.protocol)
        if self.seed is not None:
            protocol = replace(protocol, seed=self.seed)
        return protocol

    def load_network(self) -> Network:
        """The case, with the protocol's wind scale applied"""

        net = load_case(self.case)
        protocol = self.load_protocol()
        if protocol is not None and protocol.wind_scale != 1.0:
            net = scale_wind(net, protocol.wind_scale)
            LOGGER.info('Scaled the wind farms of %s by %g', net.name, protocol.wind_scale)
        return net

    def load_samples(self, net: Network, n_samples: int = None) -> Optional[SampleSet]:
        """The historical forecast errors, None when neither source is given"""

        if self.samples:
            return read_samples(self.samples, net.base_mva, net.wind_farms)
        protocol = self.load_protocol()
        if protocol is None:
            return None
        return generate_samples(protocol, net.wind_farms, n_samples or self.n_samples)

    def evaluation_samples(self, net: Network) -> SampleSet:
        """Out-of-sample errors for the Monte Carlo evaluation.

        Raises:
            CommandError: when there is neither a protocol nor a sample file.
        """

        protocol = self.load_protocol()
        if protocol is not None:
            return generate_samples(replace(protocol, seed=protocol.seed + 1), net.wind_farms, self.n_mc)
        if self.samples:
            return read_samples(self.samples, net.base_mva, net.wind_farms)
        raise CommandError('an evaluation needs --protocol or --samples')

    def cache_path(self, net: Network) -> Optional[str]:
        """The uncertainty cache file of this case, β and σ_max"""

        if not self.cache_dir:
            return None
        return os.path.join(
            self.cache_dir, f'{case_hash(net)[:16]}-beta{self.beta:g}-sigma{self.sigma_max:g}.json',
        )

    def method_config(self, net: Network, method: str = None) -> MethodConfig:
        """The method and its settings.

        Raises:
            CommandError: when a setting doesn't fit the method.
        """

        settings = OpfSettings(
            rho=RhoLevels.from_sequence(self.rho),
            beta=self.beta,
            sigma_max=self.sigma_max,
            relax=self.relax,
            fallback=self.fallback,
            enforce_all=self.enforce_all,
            max_rounds=self.max_rounds,
            violation_tol=self.violation_tol,
            jobs=self.jobs,
            cache_path=self.cache_path(net),
        )
        try:
            return MethodConfig(method=method or self.method, settings=settings)
        except ValueError as exc:
            raise CommandError(str(exc)) from exc

    def out_path(self, *parts: str) -> str:
        """A path inside the output directory, which is created on demand"""

        os.makedirs(self.out, exist_ok=True)
        return os.path.join(self.out, *parts)
