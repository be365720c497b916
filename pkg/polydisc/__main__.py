import sys

from polydisc.cli import main

sys.exit(main())
