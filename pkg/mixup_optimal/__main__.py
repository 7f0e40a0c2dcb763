"""Allow ``python -m mixup_optimal``."""

from mixup_optimal.cli import main

raise SystemExit(main())
