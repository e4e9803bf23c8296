from hurricane_nra.cli import main

raise SystemExit(main())
