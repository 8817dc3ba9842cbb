import sys

from reachset.scripts.cli import main

if __name__ == "__main__":
    sys.exit(main())
