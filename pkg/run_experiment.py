"""실험 실행 스크립트. ``python run_experiment.py run toric-fig3`` 등."""
import sys
sys.path.insert(0, ".")

from src.experiments.cli import main

if __name__ == "__main__":
    sys.exit(main())
