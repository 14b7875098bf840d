#!/usr/bin/env python3
"""
Main entry point for the crowd-certain command line.
"""

import sys
import os
from dotenv import load_dotenv

# Load environment variables from .env file BEFORE importing package modules
load_dotenv()

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from crowdcertain.cli import main  # noqa: E402

if __name__ == '__main__':
    sys.exit(main())
