"""
Source provenance for profile headers.
"""

import subprocess
from pathlib import Path
from typing import Optional, Tuple

PACKAGE_DIR = Path(__file__).resolve().parent


def run_git_command(cmd: str, cwd: Optional[Path] = None) -> Tuple[bool, str]:
    """
    Execute a Git command and return the result.

    Args:
        cmd: Git command string to execute
        cwd: Working directory; defaults to the package directory

    Returns:
        Tuple of (success, output or error message)
    """
    try:
        result = subprocess.run(cmd, shell=True, capture_output=True, text=True,
                                cwd=str(cwd or PACKAGE_DIR), timeout=10)
        return (result.returncode == 0, result.stdout if result.returncode == 0 else result.stderr)
    except Exception as e:
        return False, str(e)


def source_revision() -> str:
    """Short commit hash of the source tree, or 'unknown' outside a Git checkout."""
    success, output = run_git_command('git rev-parse --short HEAD')
    revision = output.strip()
    return revision if success and revision else 'unknown'


def provenance() -> str:
    """
    Package version and source revision, e.g. 'chemotaxis-waves 0.1.0 (3f2a9c1)'.
    """
    from . import __version__
    return f"chemotaxis-waves {__version__} ({source_revision()})"
