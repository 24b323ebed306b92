import sys

from nearjordan.cli import main

sys.exit(main())
