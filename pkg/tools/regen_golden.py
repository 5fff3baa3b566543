"""Rewrite tests/golden/*.bin from the current CLI. Review the diff before committing."""

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from cli_golden import run_chain, save_golden  # noqa: E402

if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as tmp:
        transcripts = run_chain(tmp, threads=1)
    save_golden(transcripts)
    for name, blob in transcripts.items():
        print(f"{name}: {len(blob)} bytes, {blob.splitlines()[0].decode()}")
