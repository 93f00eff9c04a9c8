"""Allow ``python -m entlab``."""

import sys

from entlab.cli.main import main

sys.exit(main())
