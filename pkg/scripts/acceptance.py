#!/usr/bin/env python3
"""Run only the acceptance criteria and show their PASS/FAIL lines."""
import pathlib
import sys

import pytest

here = pathlib.Path(__file__).resolve().parent.parent
sys.exit(pytest.main([str(here / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"]))
