"""Command-line face of the toy dominant-channel classifier.

Speaks the subprocess adapter contract: ``python -m esia.toy_classifier
IMAGE`` prints one label token (``red``, ``green`` or ``blue``).
"""

import sys

from .evaluation import dominant_channel
from .imageio import load_image


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m esia.toy_classifier IMAGE", file=sys.stderr)
        return 2
    print(dominant_channel(load_image(argv[0])))
    return 0


if __name__ == "__main__":
    sys.exit(main())
