from .base import Backend, FrontendConfig, ParsedFile
from .cpp_backend import CppBackend
from .python_backend import PythonBackend, module_name
from .resolve import resolve_calls
from .scanner import ScanError, discover_files, scan_repository

__all__ = [
    "Backend",
    "CppBackend",
    "FrontendConfig",
    "ParsedFile",
    "PythonBackend",
    "ScanError",
    "discover_files",
    "module_name",
    "resolve_calls",
    "scan_repository",
]
