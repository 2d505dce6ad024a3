import sys

from isac_netsim.cli import main

sys.exit(main())
