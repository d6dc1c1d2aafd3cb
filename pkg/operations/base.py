"""
Base Operation Class
"""

import argparse
import logging
from abc import ABC, abstractmethod
from typing import Any, Dict

from config import RunConfig, load_run_config, with_output_directory
from report_helpers.constants import EXIT_OK, EXIT_USAGE, STATUS_LABELS

_logger = logging.getLogger("base_operation")


class BaseOperation(ABC):
    """Base class for all command-line operations"""

    def __init__(self):
        self.metadata = self.get_metadata()

    @abstractmethod
    def get_metadata(self) -> Dict[str, str]:
        """
        Return operation metadata

        Returns:
            dict with keys: 'key', 'title', 'description', 'category'
        """
        pass

    def configure_parser(self, parser: argparse.ArgumentParser) -> None:
        """Add operation-specific arguments to the subcommand parser"""

    @abstractmethod
    def params_from_args(self, args: argparse.Namespace) -> Dict[str, Any]:
        """
        Translate parsed arguments into execute() parameters

        Returns:
            Dictionary of keyword arguments for execute()
        """
        pass

    def run_config_from_args(self, args: argparse.Namespace) -> RunConfig:
        """Load the RunConfig named by the global flags (--config, --override, --seed, --threads, --out)"""
        run_config = load_run_config(
            getattr(args, "config", None),
            overrides=getattr(args, "override", None) or (),
            seed=getattr(args, "seed", None),
            threads=getattr(args, "threads", None),
        )
        return with_output_directory(run_config, getattr(args, "out", None))

    @abstractmethod
    def execute(self, **kwargs) -> Dict[str, Any]:
        """
        Execute the operation

        Args:
            **kwargs: Operation-specific parameters

        Returns:
            dict with keys: 'success' (bool), 'output_path' (str), 'error' (str), 'exit_code' (int)
        """
        pass

    @staticmethod
    def result_dict(result) -> Dict[str, Any]:
        """Flatten an engine TaskResult into the execute() return dictionary"""
        outputs = {key: str(path) for key, path in result.outputs.items()}
        return {
            "success": result.success,
            "output_path": next(iter(outputs.values()), ""),
            "outputs": outputs,
            "metadata": result.metadata,
            "error": "; ".join(result.errors),
            "exit_code": result.exit_code,
        }

    def run(self, args: argparse.Namespace) -> int:
        """Main entry point - executes with parsed arguments and reports the outcome"""
        print(f"{STATUS_LABELS['start']} {self.metadata['title']}")
        try:
            params = self.params_from_args(args)
        except ValueError as e:
            _logger.error(f"{self.metadata['key']} error: {e}")
            print(f"{STATUS_LABELS['failure']} Error: {e}")
            return EXIT_USAGE

        result = self.execute(**params)

        if result.get('success'):
            print(f"{STATUS_LABELS['success']} Operation completed successfully!")
        else:
            print(f"{STATUS_LABELS['failure']} Error: {result.get('error', 'Unknown error')}")
        if result.get('output_path'):
            print(f"{STATUS_LABELS['output']} Output file: {result['output_path']}")
        return int(result.get('exit_code', EXIT_OK if result.get('success') else EXIT_USAGE))
