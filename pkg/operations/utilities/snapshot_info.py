"""
Snapshot Info Operation
"""

import argparse
import logging
from typing import Any, Dict

from operations.base import BaseOperation
from simulation_engine import SimulationEngine

_logger = logging.getLogger("snapshot_info")


class SnapshotInfoOperation(BaseOperation):
    """Print the header and per-component statistics of a snapshot file"""

    def get_metadata(self) -> Dict[str, str]:
        return {
            'key': 'snapshot-info',
            'title': 'Snapshot Info',
            'description': 'Show header and min/max/L2 per component of a snapshot',
            'category': 'utilities'
        }

    def configure_parser(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("path", help="Snapshot file")

    def params_from_args(self, args: argparse.Namespace) -> Dict[str, Any]:
        return {'path': args.path}

    def execute(self, **kwargs) -> Dict[str, Any]:
        path = kwargs['path']
        _logger.info(f"snapshot_info start path={path}")
        result = SimulationEngine().run_task(
            "snapshot_info", run_config=kwargs.get('run_config'), verbose=kwargs.get('verbose', True), path=path
        )
        if not result.success:
            _logger.error(f"snapshot_info error: {'; '.join(result.errors)}")
        return self.result_dict(result)
