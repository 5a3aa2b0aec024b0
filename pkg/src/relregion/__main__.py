import sys

from relregion.bench.cli import main

sys.exit(main())
