import sys

from mhh.cli import main

sys.exit(main())
