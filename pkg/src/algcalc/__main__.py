import sys

from algcalc.cli import main

sys.exit(main())
