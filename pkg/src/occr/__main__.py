import sys

from occr.cli import main

sys.exit(main())
