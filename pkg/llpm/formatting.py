"""
Optional external tools for generated artifacts: clang-format for C
headers and Icarus Verilog for a syntax check of emitted RTL.
"""

import shutil
import subprocess
import tempfile
from typing import Tuple


def is_clang_format_available() -> bool:
    """Check if clang-format is installed on the system."""
    return shutil.which("clang-format") is not None


def is_iverilog_available() -> bool:
    return shutil.which("iverilog") is not None


def format_c_code(file_path: str, style: str = "LLVM") -> bool:
    """
    Format C code in place using clang-format.

    Args:
        file_path: Path to file to format
        style: clang-format style (LLVM, Google, Chromium, Mozilla, WebKit, Microsoft, GNU)

    Returns:
        True if formatting succeeded, False if clang-format not available or failed
    """
    if not is_clang_format_available():
        return False

    try:
        result = subprocess.run(
            ["clang-format", "-i", f"--style={style}", file_path], capture_output=True, timeout=10, check=False
        )
        return result.returncode == 0
    except (subprocess.TimeoutExpired, subprocess.SubprocessError):
        return False


def check_verilog_syntax(file_paths) -> Tuple[bool, str]:
    """
    Elaborate Verilog sources with iverilog, discarding the output.

    Args:
        file_paths: Verilog files, the emitted file first

    Returns:
        (passed, tool output); (True, "") when iverilog is not installed
    """
    if not is_iverilog_available():
        return True, ""

    with tempfile.TemporaryDirectory() as scratch:
        try:
            result = subprocess.run(
                ["iverilog", "-g2005", "-o", f"{scratch}/a.out", *file_paths],
                capture_output=True,
                text=True,
                timeout=60,
                check=False,
            )
        except (subprocess.TimeoutExpired, subprocess.SubprocessError) as error:
            return False, str(error)
    return result.returncode == 0, (result.stdout + result.stderr).strip()
