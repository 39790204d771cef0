"""
Entry point for running as a module: python -m chemotaxis_waves
"""

from .cli import main

if __name__ == "__main__":
    main()
