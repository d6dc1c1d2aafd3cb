"""
Littlewood-Paley Check Operation - Empirical constants of the harmonic-analysis inequalities
"""

import argparse
import logging
from dataclasses import replace
from typing import Any, Dict

from operations.base import BaseOperation
from operations.config import DEFAULT_LP_TRIALS, DEFAULT_PRODUCT_EXPONENTS, LP_CHECK_CHOICES
from simulation_engine import SimulationEngine

_logger = logging.getLogger("lp_check")


class LpCheckOperation(BaseOperation):
    """Measure lhs/rhs ratios over random trials and write lp-report-<check>.csv"""

    def get_metadata(self) -> Dict[str, str]:
        return {
            'key': 'lp-check',
            'title': 'Littlewood-Paley Check',
            'description': 'Measure Bernstein, commutator, product-law and log-interpolation ratios',
            'category': 'checks'
        }

    def configure_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("check", choices=LP_CHECK_CHOICES, help="Inequality to check, or all")
        parser.add_argument("--grid", type=int, default=None, dest="n_axis",
                            help="Points per axis (overrides [grid] n_axis)")
        parser.add_argument("--trials", type=int, default=DEFAULT_LP_TRIALS, help="Random trials per check")
        parser.add_argument("--exponents", type=float, nargs=2, default=list(DEFAULT_PRODUCT_EXPONENTS),
                            metavar=("S", "T"), help="Sobolev exponents of the product law")

    def params_from_args(self, args: argparse.Namespace) -> Dict[str, Any]:
        trials = getattr(args, "trials", DEFAULT_LP_TRIALS)
        if trials < 0:
            raise ValueError(f"--trials must be >= 0, got {trials}")
        n_axis = getattr(args, "n_axis", None)
        run_config = self.run_config_from_args(args)
        if n_axis is not None:
            # validates the new axis count through Grid.__post_init__
            run_config = replace(run_config, grid=replace(run_config.grid, n_axis=n_axis))
        return {
            'run_config': run_config,
            'check': args.check,
            'trials': trials,
            'exponents': tuple(getattr(args, "exponents", DEFAULT_PRODUCT_EXPONENTS)),
        }

    def execute(self, **kwargs) -> Dict[str, Any]:
        """Execute the check(s)"""
        check = kwargs['check']
        _logger.info(f"lp_check start check={check} trials={kwargs['trials']}")
        result = SimulationEngine().run_task(
            "lp_check",
            run_config=kwargs['run_config'],
            verbose=kwargs.get('verbose', True),
            check=check,
            trials=kwargs['trials'],
            exponents=kwargs.get('exponents', DEFAULT_PRODUCT_EXPONENTS),
        )
        if result.success:
            _logger.info(f"lp_check success rows={result.metadata.get('rows')}")
        else:
            _logger.error(f"lp_check error: {'; '.join(result.errors)}")
        return self.result_dict(result)
