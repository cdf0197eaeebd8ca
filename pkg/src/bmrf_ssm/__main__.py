import sys

from bmrf_ssm.cli import main

sys.exit(main())
