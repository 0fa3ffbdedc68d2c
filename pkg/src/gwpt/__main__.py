import sys

from gwpt.cli import main

sys.exit(main())
