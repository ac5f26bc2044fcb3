import sys

from nilrec.cli import main

sys.exit(main())
