import sys

from probseg.cli import main

sys.exit(main())
