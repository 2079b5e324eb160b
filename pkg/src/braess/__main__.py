import sys

from braess.cli import main

sys.exit(main())
