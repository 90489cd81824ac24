import os
import sys

# deterministic single-threaded numerics for the whole suite; must happen
# before numpy initializes its thread pools
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

sys.path.insert(0, os.path.dirname(__file__))
