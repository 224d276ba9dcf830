import sys

from parcopula.cli import main

sys.exit(main())
