import sys

from polybeam.cli import main

sys.exit(main())
