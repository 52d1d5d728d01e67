"""
Allow `python -m dropreef`
"""
from dropreef.cli.main import main

if __name__ == "__main__":
    raise SystemExit(main())
