import sys

from gmcpos.cli import main

sys.exit(main())
