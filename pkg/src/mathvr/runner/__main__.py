import sys

from mathvr.runner.shim import main

if __name__ == "__main__":
    sys.exit(main())
