import sys

from sldet.main import main

sys.exit(main())
