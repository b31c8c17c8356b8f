"""Backend selection: compiled Cython core when available, pure Python twin
otherwise. Set CONESPEC_BACKEND=python to force the fallback."""

import os

if os.environ.get("CONESPEC_BACKEND", "").lower() == "python":
    from conespec import _corepy as core
else:
    try:
        from conespec import _core as core  # type: ignore[attr-defined]
    except ImportError:
        from conespec import _corepy as core

BACKEND = core.BACKEND_NAME
