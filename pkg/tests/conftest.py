import sys
from pathlib import Path

from hypothesis import settings

# Statistical tests do real numeric work; the default deadline is too twitchy.
settings.register_profile("cplsh", deadline=None, max_examples=60)
settings.load_profile("cplsh")

sys.path.insert(0, str(Path(__file__).parent))
