"""
Twin Operation - Co-advance two nearby states and monitor the uniqueness functional
"""

import argparse
import logging
from typing import Any, Dict

from operations.base import BaseOperation
from simulation_engine import SimulationEngine

_logger = logging.getLogger("twin")


class TwinOperation(BaseOperation):
    """Twin run with the Osgood envelope report written to twin.csv"""

    def get_metadata(self) -> Dict[str, str]:
        return {
            'key': 'twin',
            'title': 'Twin Run',
            'description': 'Advance two perturbed states and compare Phi with its Osgood envelope',
            'category': 'runs'
        }

    def configure_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--perturbation", type=float, default=None,
                            help="RMS size of the perturbation (overrides [initial] perturbation)")

    def params_from_args(self, args: argparse.Namespace) -> Dict[str, Any]:
        perturbation = getattr(args, "perturbation", None)
        if perturbation is not None and perturbation < 0:
            raise ValueError(f"--perturbation must be >= 0, got {perturbation}")
        return {'run_config': self.run_config_from_args(args), 'perturbation': perturbation}

    def execute(self, **kwargs) -> Dict[str, Any]:
        """Execute the twin run"""
        run_config = kwargs['run_config']
        _logger.info(f"twin start hash={run_config.config_hash[:12]}")
        result = SimulationEngine().run_task(
            "twin",
            run_config=run_config,
            verbose=kwargs.get('verbose', True),
            perturbation=kwargs.get('perturbation'),
        )
        if result.success:
            _logger.info(f"twin success max_Phi={result.metadata.get('max_Phi')}")
        else:
            _logger.error(f"twin error: {'; '.join(result.errors)}")
        return self.result_dict(result)
