"""python -m snb"""

import sys

from .reports.cli import main

sys.exit(main())
