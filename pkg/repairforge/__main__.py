import sys

from repairforge.main import main

sys.exit(main())
