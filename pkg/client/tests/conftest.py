import re
import subprocess
import sys
import time
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent.parent
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    assert FIXTURES.is_dir(), "fixture corpus missing; run scripts/make_fixtures.py"
    return FIXTURES


@pytest.fixture(scope="session")
def live_server():
    """The reference server as a subprocess, reached only over TCP."""
    proc = subprocess.Popen(
        [sys.executable, "-m", "crafterkit.cli", "serve", "--transport", "tcp",
         "--host", "127.0.0.1", "--port", "0"],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True)
    try:
        line = ""
        deadline = time.time() + 120  # first run may JIT-compile
        while time.time() < deadline:
            line = proc.stdout.readline()
            if "listening on" in line:
                break
        match = re.search(r"listening on ([\d.]+):(\d+)", line)
        if not match:
            proc.kill()
            pytest.skip("reference server unavailable (is crafterkit installed?)")
        yield (match.group(1), int(match.group(2)))
    finally:
        proc.kill()
        proc.wait(timeout=10)
