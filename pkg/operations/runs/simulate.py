"""
Simulate Operation - Advance one configuration to t_final and write diagnostics
"""

import argparse
import logging
from typing import Any, Dict

from config import RunConfig
from operations.base import BaseOperation
from simulation_engine import SimulationEngine

_logger = logging.getLogger("simulate")


class SimulateOperation(BaseOperation):
    """Run the solver and write diagnostics.csv (plus snapshots when enabled)"""

    def get_metadata(self) -> Dict[str, str]:
        return {
            'key': 'simulate',
            'title': 'Simulation',
            'description': 'Advance the coupled flow / Q-tensor system and write the diagnostics table',
            'category': 'runs'
        }

    def configure_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--snapshot-cadence", type=int, default=None,
                            help="Write Q and u snapshots every this many diagnostic rows (0 disables)")

    def params_from_args(self, args: argparse.Namespace) -> Dict[str, Any]:
        if getattr(args, "snapshot_cadence", None) is not None:
            overrides = list(getattr(args, "override", None) or [])
            overrides.append(f"output.snapshot_cadence={args.snapshot_cadence}")
            args = argparse.Namespace(**{**vars(args), "override": overrides})
        return {'run_config': self.run_config_from_args(args)}

    def execute(self, **kwargs) -> Dict[str, Any]:
        """Execute the simulation"""
        run_config: RunConfig = kwargs['run_config']
        _logger.info(f"simulate start hash={run_config.config_hash[:12]}")
        result = SimulationEngine().run_task("simulate", run_config=run_config, verbose=kwargs.get('verbose', True))
        if result.success:
            _logger.info(f"simulate success rows={result.metadata.get('rows')}")
        else:
            _logger.error(f"simulate error: {'; '.join(result.errors)}")
        return self.result_dict(result)
