import sys

from swapqkd.cli import main

sys.exit(main())
