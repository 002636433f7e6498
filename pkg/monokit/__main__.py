# -*- coding: utf-8 -*-
"""
monokit: monodromy groupoids and locally trivial topologies from the command line.
"""
from monokit.frontend.main_frontend import main

if __name__ == "__main__":
    raise SystemExit(main())
