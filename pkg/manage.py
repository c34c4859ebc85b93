#!/usr/bin/env python
"""Command-line utility for oH lab tasks."""
import sys


def main():
    """Run the oh-lab command line."""
    try:
        from oh_lab.cli import cli
    except ImportError as exc:
        raise ImportError(
            "Couldn't import the oh_lab package or one of its dependencies. "
            "Did you install requirements.txt and run from the project root?"
        ) from exc
    cli(args=sys.argv[1:], prog_name='manage.py')


if __name__ == '__main__':
    main()
