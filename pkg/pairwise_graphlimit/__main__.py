import sys

from pairwise_graphlimit.cli import main

sys.exit(main())
