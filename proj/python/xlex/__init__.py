try:
    from ._xlex import *  # noqa: F401,F403
    from ._xlex import __doc__  # noqa: F401
except ImportError:  # in-tree build: the extension sits next to the package
    from _xlex import *  # noqa: F401,F403
    from _xlex import __doc__  # noqa: F401
