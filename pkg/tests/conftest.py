import os
import sys

# make the sibling oracle module importable from any test
sys.path.insert(0, os.path.dirname(__file__))
