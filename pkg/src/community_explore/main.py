#!/usr/bin/env python3
"""
Community Explore Main Entry Point
"""

from community_explore.cli import app
from community_explore.utils import setup_logging


def run():
    """Console entry point"""
    setup_logging()
    app(prog_name="community-explore")


if __name__ == '__main__':
    run()
