"""
Operation Registry

Maps subcommand keys to operation classes. The CLI builds one subparser per
registered key, in category order (runs, audits, checks, utilities).
"""

from typing import Dict, Iterator, List, Tuple, Type

from operations.base import BaseOperation

CATEGORIES = ("runs", "audits", "checks", "utilities")
REQUIRED_METADATA = ("key", "title", "description", "category")


class OperationRegistry:
    """Central registry for all command-line operations"""

    def __init__(self):
        self._operations: Dict[str, Type[BaseOperation]] = {}
        self._categories: Dict[str, List[str]] = {category: [] for category in CATEGORIES}

    def register(self, operation_class: Type[BaseOperation]) -> Type[BaseOperation]:
        """
        Register an operation class.

        Raises:
            ValueError: Metadata incomplete, unknown category or key already taken
        """
        metadata = operation_class().get_metadata()
        missing = [name for name in REQUIRED_METADATA if name not in metadata]
        if missing:
            raise ValueError(f"{operation_class.__name__} metadata lacks {missing}")
        key, category = metadata['key'], metadata['category']
        if category not in self._categories:
            raise ValueError(f"{key}: unknown category {category!r}; expected one of {CATEGORIES}")
        if key in self._operations and self._operations[key] is not operation_class:
            raise ValueError(f"operation key {key!r} is already registered")

        self._operations[key] = operation_class
        if key not in self._categories[category]:
            self._categories[category].append(key)
        return operation_class

    def get_operation(self, key: str) -> BaseOperation:
        """Fresh operation instance for a key"""
        if key not in self._operations:
            raise KeyError(f"Operation '{key}' not found")
        return self._operations[key]()

    def get_categories(self) -> Dict[str, List[str]]:
        """Categories with their operation keys, in registration order"""
        return {category: list(keys) for category, keys in self._categories.items()}

    def iter_operations(self) -> Iterator[Tuple[str, BaseOperation]]:
        """(key, instance) pairs in category order"""
        for keys in self._categories.values():
            for key in keys:
                yield key, self.get_operation(key)

    def __contains__(self, key: str) -> bool:
        return key in self._operations

    def __len__(self) -> int:
        return len(self._operations)


# Global registry instance
registry = OperationRegistry()


def register_all_operations() -> OperationRegistry:
    """Import and register every subcommand"""
    from operations.runs.simulate import SimulateOperation
    from operations.runs.twin import TwinOperation
    from operations.audits.audit import AuditOperation
    from operations.checks.lp_check import LpCheckOperation
    from operations.utilities.snapshot_info import SnapshotInfoOperation

    for operation_class in (SimulateOperation, TwinOperation, AuditOperation, LpCheckOperation, SnapshotInfoOperation):
        registry.register(operation_class)
    return registry


# Initialize
register_all_operations()
