import sys

from gconvex.cli import main

sys.exit(main())
