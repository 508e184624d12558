"""
Sizing a hypercube needs the C estimate and the bisection over σ, which is the
slow part of preparing a solve. This module persists the result per quantity in
a JSON file so that a second run over the same data skips it. An entry is only
reused when the hash of the projected samples and ρ both match.
"""

import json
import logging
import os
from typing import Dict, Optional, Tuple

import numpy as np

from wdro_opf.chance.hypercube import HypercubeResult
from wdro_opf.chance.robust import UncertaintySet


LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())


class UncertaintyCache:
    """A JSON file mapping quantity ids to their sized uncertainty sets"""

    def __init__(self, path: str = None):
        self.path = path
        self.entries: Dict[str, dict] = {}
        self.hits = 0
        if path and os.path.exists(path):
            with open(path, encoding='utf-8') as cache_file:
                try:
                    self.entries = json.load(cache_file).get('quantities', {})
                except json.JSONDecodeError:
                    LOGGER.warning('Ignoring unreadable uncertainty cache %s', path)
            LOGGER.info('Loaded %d uncertainty sets from cache %s', len(self.entries), path)

    def get(self, qid: str, sample_hash: str, rho: float) -> Optional[Tuple[HypercubeResult, UncertaintySet]]:
        """The cached result for qid, or None when missing or stale"""

        entry = self.entries.get(qid)
        if entry is None or entry['sample_hash'] != sample_hash or entry['rho'] != rho:
            return None
        self.hits += 1
        result = HypercubeResult(
            sigma=entry['sigma'], multiplier=entry['multiplier'], level=entry['level'],
            epsilon=entry['epsilon'], rho=entry['rho'],
        )
        uset = UncertaintySet(
            vertices=np.array(entry['vertices'], dtype=float), sigma=entry['sigma'],
            mean=np.array(entry['mean'], dtype=float), sqrt_cov=np.array(entry['sqrt_cov'], dtype=float),
        )
        return result, uset

    def put(self, qid: str, sample_hash: str, result: HypercubeResult, uset: UncertaintySet) -> None:
        """Record the sized set of one quantity"""

        self.entries[qid] = {
            'sigma': result.sigma,
            'multiplier': result.multiplier,
            'level': result.level,
            'epsilon': result.epsilon,
            'rho': result.rho,
            'vertices': uset.vertices.tolist(),
            'mean': uset.mean.tolist(),
            'sqrt_cov': uset.sqrt_cov.tolist(),
            'sample_hash': sample_hash,
        }

    def save(self) -> None:
        """Write the cache file (a no-op for a cache without a path)"""

        if not self.path:
            return
        directory = os.path.dirname(self.path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        # concurrent runs may share a cache file, replace it in one step
        partial_path = f'{self.path}.{os.getpid()}.tmp'
        with open(partial_path, 'w', encoding='utf-8') as cache_file:
            json.dump({'quantities': self.entries}, cache_file, sort_keys=True)
        os.replace(partial_path, self.path)
        LOGGER.info('Saved %d uncertainty sets to %s', len(self.entries), self.path)
