import sys

from compsense.cli import main

sys.exit(main())
