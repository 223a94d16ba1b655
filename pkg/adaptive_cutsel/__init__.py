from .cli import main
from .lab import (
    run_corollary,
    run_evaluate,
    run_generate,
    run_grid_search,
    run_theorem_demo,
    run_train,
)
