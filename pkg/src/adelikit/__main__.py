from adelikit.cli import main

raise SystemExit(main())
