import sys
from pathlib import Path

# Test-local helpers (generators, oracles) live next to the tests.
sys.path.insert(0, str(Path(__file__).parent))
