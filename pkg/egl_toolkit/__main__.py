from egl_toolkit.main import main

raise SystemExit(main())
