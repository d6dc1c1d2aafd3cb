"""
Audit Operation - Cancellation ledgers, scaling invariance and energy balance
"""

import argparse
import logging
from typing import Any, Dict

from operations.base import BaseOperation
from operations.config import AUDIT_KINDS, DEFAULT_SCALING_DELTA, NEGATIVE_CONTROLS
from simulation_engine import SimulationEngine

_logger = logging.getLogger("audit")

NEGATIVE_CONTROL_CHOICES = sorted({name for names in NEGATIVE_CONTROLS.values() for name in names})


class AuditOperation(BaseOperation):
    """Run one audit kind and write audit-<kind>.csv"""

    def get_metadata(self) -> Dict[str, str]:
        return {
            'key': 'audit',
            'title': 'Audit',
            'description': 'Check the energy and uniqueness cancellations, scaling invariance or energy balance',
            'category': 'audits'
        }

    def configure_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("kind", choices=AUDIT_KINDS, help="Audit to run")
        parser.add_argument("--seeds", type=int, default=None,
                            help="Number of random field draws (lyapunov, uniqueness)")
        parser.add_argument("--negative-control", choices=NEGATIVE_CONTROL_CHOICES, default=None,
                            help="Deliberately break a structural property; the audit is expected to fail")
        parser.add_argument("--delta", type=int, default=DEFAULT_SCALING_DELTA,
                            help="Integer rescaling factor (scaling)")

    def params_from_args(self, args: argparse.Namespace) -> Dict[str, Any]:
        kind = args.kind
        control = getattr(args, "negative_control", None)
        if control and control not in NEGATIVE_CONTROLS[kind]:
            raise ValueError(f"--negative-control {control} does not apply to the {kind} audit")
        seeds = getattr(args, "seeds", None)
        if seeds is not None and seeds < 0:
            raise ValueError(f"--seeds must be >= 0, got {seeds}")
        delta = getattr(args, "delta", DEFAULT_SCALING_DELTA)
        if delta < 1:
            raise ValueError(f"--delta must be a positive integer, got {delta}")
        return {
            'run_config': self.run_config_from_args(args),
            'kind': kind,
            'seeds': seeds,
            'negative_control': control,
            'delta': delta,
        }

    def execute(self, **kwargs) -> Dict[str, Any]:
        """Execute the audit"""
        kind = kwargs['kind']
        _logger.info(f"audit start kind={kind} control={kwargs.get('negative_control')}")
        result = SimulationEngine().run_task(
            "audit",
            run_config=kwargs['run_config'],
            verbose=kwargs.get('verbose', True),
            kind=kind,
            seeds=kwargs.get('seeds'),
            negative_control=kwargs.get('negative_control'),
            delta=kwargs.get('delta', DEFAULT_SCALING_DELTA),
        )
        if result.success:
            _logger.info(f"audit success kind={kind} checks={result.metadata.get('checks')}")
        else:
            _logger.error(f"audit error: {'; '.join(result.errors)}")
        return self.result_dict(result)
