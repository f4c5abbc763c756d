"""styleadapt entry point: ``python main.py <verb> ...``."""

import sys

from styleadapt.interfaces.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
